#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wpt/rng.hpp"

namespace wpt::channel {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Free-space path loss (lambda / (4*pi*d))^2 with the distance expressed in
// wavelengths.
inline double path_loss(double d_over_lambda) {
    if (!(d_over_lambda > 0.0))
        throw std::invalid_argument("path_loss: distance must be > 0");
    const double x = 1.0 / (4.0 * kPi * d_over_lambda);
    return x * x;
}

// Distance (in wavelengths) that produces the given linear path loss.
inline double distance_for_loss(double loss) {
    if (!(loss > 0.0)) throw std::invalid_argument("distance_for_loss: loss must be > 0");
    return 1.0 / (4.0 * kPi * std::sqrt(loss));
}

struct RicianParams {
    double kappa;        // linear Rice factor, >= 0
    std::uint64_t seed;  // used by the convenience overload of rician_draw
    int n_tones;
    int n_antennas;
};

// One draw of the links from the power transmitter. H is the harvester link,
// G the optional information-receiver link. Distances are in wavelengths and
// L_* are the linear path-loss factors already folded into the entries.
struct ChannelRealization {
    Eigen::MatrixXcd H;  // n_tones x n_antennas
    std::optional<Eigen::MatrixXcd> G;
    double d_h = 0.0;
    double d_g = 0.0;
    double L_h = 1.0;
    double L_g = 1.0;
};

// Rician entries sqrt(L_P) * Z with Z = sqrt(kappa/(kappa+1)) + w, where w is
// zero-mean complex Gaussian of total variance 1/(kappa+1). Entries are drawn
// independently, tone-major (tone 1 antenna 1, tone 1 antenna 2, ...).
inline Eigen::MatrixXcd rician_matrix(const RicianParams& p, double L_P, Rng& rng) {
    if (!(p.kappa >= 0.0)) throw std::invalid_argument("rician_matrix: kappa must be >= 0");
    if (!(L_P > 0.0 && L_P <= 1.0))
        throw std::invalid_argument("rician_matrix: path loss must be in (0, 1]");
    if (p.n_tones < 1 || p.n_antennas < 1)
        throw std::invalid_argument("rician_matrix: dimensions must be positive");
    const double mean = std::sqrt(p.kappa / (p.kappa + 1.0));
    const double var = 1.0 / (p.kappa + 1.0);
    const double scale = std::sqrt(L_P);
    Eigen::MatrixXcd H(p.n_tones, p.n_antennas);
    for (int n = 0; n < p.n_tones; ++n)
        for (int m = 0; m < p.n_antennas; ++m)
            H(n, m) = scale * rng.complex_normal(mean, var);
    return H;
}

inline ChannelRealization rician_draw(const RicianParams& p, double L_P, Rng& rng) {
    ChannelRealization r;
    r.H = rician_matrix(p, L_P, rng);
    r.L_h = L_P;
    r.d_h = distance_for_loss(L_P);
    return r;
}

// Convenience overload seeding a fresh stream from params.seed; repeated
// calls with the same params return bit-identical realizations.
inline ChannelRealization rician_draw(const RicianParams& p, double L_P) {
    Rng rng(p.seed);
    return rician_draw(p, L_P, rng);
}

// Near-flat single-antenna channel: real gains i.i.d. Gaussian with mean 1
// and variance sigma, clamped below at 0.
inline ChannelRealization flat_draw(int n_tones, double sigma, Rng& rng) {
    if (n_tones < 1) throw std::invalid_argument("flat_draw: n_tones must be >= 1");
    if (!(sigma >= 0.0)) throw std::invalid_argument("flat_draw: sigma must be >= 0");
    const double sd = std::sqrt(sigma);
    ChannelRealization r;
    r.H.resize(n_tones, 1);
    for (int n = 0; n < n_tones; ++n) {
        const double g = 1.0 + sd * rng.normal();
        r.H(n, 0) = std::complex<double>(g < 0.0 ? 0.0 : g, 0.0);
    }
    r.L_h = 1.0;
    r.d_h = distance_for_loss(1.0);
    return r;
}

// ---- CSV interchange ------------------------------------------------------
//
// Format: header "tone,antenna,link,re,im", then one row per entry with
// 1-based tone/antenna indices and link "H" or "G". Entries are written with
// enough digits to round-trip exactly. Path-loss metadata is not part of the
// format; imported realizations carry L = 1 placeholders.

inline void write_csv(std::ostream& os, const ChannelRealization& r) {
    os << "tone,antenna,link,re,im\n";
    char buf[128];
    auto emit = [&](const Eigen::MatrixXcd& M, const char* link) {
        for (Eigen::Index n = 0; n < M.rows(); ++n)
            for (Eigen::Index m = 0; m < M.cols(); ++m) {
                std::snprintf(buf, sizeof buf, "%lld,%lld,%s,%.17g,%.17g\n",
                              static_cast<long long>(n + 1), static_cast<long long>(m + 1),
                              link, M(n, m).real(), M(n, m).imag());
                os << buf;
            }
    };
    emit(r.H, "H");
    if (r.G) emit(*r.G, "G");
}

inline ChannelRealization read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("channel csv: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "tone,antenna,link,re,im")
        throw std::runtime_error("channel csv: bad header '" + line + "'");

    struct Entry {
        int tone, antenna;
        std::complex<double> v;
    };
    std::vector<Entry> h_entries, g_entries;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tone_s, ant_s, link_s, re_s, im_s;
        if (!std::getline(ss, tone_s, ',') || !std::getline(ss, ant_s, ',') ||
            !std::getline(ss, link_s, ',') || !std::getline(ss, re_s, ',') ||
            !std::getline(ss, im_s))
            throw std::runtime_error("channel csv: malformed line " + std::to_string(line_no));
        Entry e{std::stoi(tone_s), std::stoi(ant_s), {std::stod(re_s), std::stod(im_s)}};
        if (e.tone < 1 || e.antenna < 1)
            throw std::runtime_error("channel csv: indices must be 1-based, line " +
                                     std::to_string(line_no));
        if (link_s == "H")
            h_entries.push_back(e);
        else if (link_s == "G")
            g_entries.push_back(e);
        else
            throw std::runtime_error("channel csv: unknown link '" + link_s + "', line " +
                                     std::to_string(line_no));
    }
    if (h_entries.empty()) throw std::runtime_error("channel csv: no H entries");

    auto build = [](const std::vector<Entry>& es) {
        int n = 0, m = 0;
        for (const auto& e : es) {
            n = std::max(n, e.tone);
            m = std::max(m, e.antenna);
        }
        Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, m);
        Eigen::MatrixXi seen = Eigen::MatrixXi::Zero(n, m);
        for (const auto& e : es) {
            M(e.tone - 1, e.antenna - 1) = e.v;
            ++seen(e.tone - 1, e.antenna - 1);
        }
        if (seen.minCoeff() != 1 || seen.maxCoeff() != 1)
            throw std::runtime_error("channel csv: matrix entries missing or duplicated");
        return M;
    };
    ChannelRealization r;
    r.H = build(h_entries);
    if (!g_entries.empty()) r.G = build(g_entries);
    r.L_h = 1.0;
    r.L_g = 1.0;
    r.d_h = distance_for_loss(1.0);
    r.d_g = distance_for_loss(1.0);
    return r;
}

inline void write_csv_file(const std::string& path, const ChannelRealization& r) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("channel csv: cannot open " + path);
    write_csv(os, r);
}

inline ChannelRealization read_csv_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("channel csv: cannot open " + path);
    return read_csv(is);
}

}  // namespace wpt::channel
