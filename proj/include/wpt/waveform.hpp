#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "wpt/tone_grid.hpp"

namespace wpt::waveform {

// Multi-tone signal algebra. The transmit signal is
//
//     y(t) = sum_n s_n * h_n * cos(2*pi*f_n*t + phi_n),
//
// amplitudes s_n in sqrt(W) so that 0.5*||s||^2 is the transmit power and h_n
// is the (effective, non-negative) channel gain of tone n.
//
// The moments m2 = E{y^2} and m4 = E{y^4} are the DC components of y^2 and
// y^4 for non-degenerate tone placement: no fourth-order mixing product of
// distinct tone pairs falls on DC. On a perfectly uniform comb, products with
// f_i + f_j = f_k + f_l and {i,j} != {k,l} contribute additional DC terms;
// those are outside this model, which is the one the optimizer's quadratic
// form is built from. numeric_moments evaluates the same model by
// time-averaging a mixing-free harmonic placement, so it is an independent
// check of the closed forms, not a copy of them.
//
// All functions here are pure and safe to call concurrently.

// Transmit phases that align every received tone at zero phase: the
// element-wise negation of the channel phases.
inline Eigen::VectorXd optimal_phases(const Eigen::VectorXd& channel_phases) {
    return -channel_phases;
}

// Per-tone matched beamformer w = s * h^H / ||h|| for one row h of the
// channel matrix. Satisfies ||w|| = s and h.w = s * ||h|| (real, >= 0).
inline Eigen::VectorXcd matched_beamformer_weights(const Eigen::VectorXcd& h_row,
                                                   double amplitude) {
    if (!(amplitude >= 0.0))
        throw std::invalid_argument("matched_beamformer_weights: amplitude must be >= 0");
    const double nrm = h_row.norm();
    if (!(nrm > 0.0))
        throw std::invalid_argument("matched_beamformer_weights: degenerate channel");
    return (amplitude / nrm) * h_row.conjugate();
}

// Effective scalar gain per tone: the Euclidean norm of each row of the N x M
// channel matrix. Collapses the MISO link under matched beamforming.
inline Eigen::VectorXd effective_channels(const Eigen::MatrixXcd& H) {
    return H.rowwise().norm();
}

struct Moments {
    double m2;
    double m4;
};

// Closed forms for phase-aligned tones:
//   m2 = (1/2) sum_i s_i^2 h_i^2
//   m4 = (3/8) sum_i s_i^4 h_i^4 + (3/4) sum_{i != j} s_i^2 h_i^2 s_j^2 h_j^2
// with the second sum over ordered pairs.
inline Moments analytic_moments(const Eigen::VectorXd& s, const Eigen::VectorXd& h_eff) {
    if (s.size() != h_eff.size())
        throw std::invalid_argument("analytic_moments: length mismatch");
    const Eigen::ArrayXd v = (s.array() * h_eff.array()).square();
    const double sum_v = v.sum();
    const double sum_v2 = v.square().sum();
    const double m2 = 0.5 * sum_v;
    const double m4 = (3.0 / 8.0) * sum_v2 + (3.0 / 4.0) * (sum_v * sum_v - sum_v2);
    return {m2, m4};
}

namespace detail {

// Integer harmonics 1 <= k_1 < ... < k_n such that no fourth-order mixing
// product lands on DC: all pairwise sums k_i + k_j (i <= j) are distinct and
// no sum of three elements (with repetition) equals an element. Greedy and
// deterministic; for n = 8 the set is small (max element < 200).
inline std::vector<long> mixing_free_harmonics(int n) {
    std::vector<long> k;
    k.reserve(static_cast<std::size_t>(n));
    std::vector<long> pair_sums;  // kept sorted
    auto has_sum = [&](long s) {
        return std::binary_search(pair_sums.begin(), pair_sums.end(), s);
    };
    for (long cand = 1; static_cast<int>(k.size()) < n; ++cand) {
        bool ok = true;
        // sums involving cand must not collide with existing pairwise sums;
        // sums k_a + cand are mutually distinct since the k_a are, and
        // 2*cand differs from them because cand exceeds every element
        for (std::size_t a = 0; a < k.size() && ok; ++a)
            if (has_sum(k[a] + cand)) ok = false;
        if (ok && has_sum(2 * cand)) ok = false;
        // no triple sum (repetition allowed) may equal an element once cand joins
        if (ok) {
            std::vector<long> all(k);
            all.push_back(cand);
            for (std::size_t a = 0; a < all.size() && ok; ++a)
                for (std::size_t b = a; b < all.size() && ok; ++b)
                    for (std::size_t c = b; c < all.size() && ok; ++c) {
                        const long s = all[a] + all[b] + all[c];
                        for (long e : all)
                            if (s == e) { ok = false; break; }
                    }
        }
        if (!ok) continue;
        for (long e : k) pair_sums.push_back(e + cand);
        pair_sums.push_back(2 * cand);
        std::sort(pair_sums.begin(), pair_sums.end());
        k.push_back(cand);
    }
    return k;
}

}  // namespace detail

// Numeric moment evaluation: uniform sampling of one fundamental period
// T = 1/delta_f of y(t) with the tones placed on a mixing-free harmonic set
// (see module comment). With n_samples > 4 * k_max every harmonic of y^4
// aliases away except DC, so the sampled mean equals the continuous average
// exactly up to rounding. Fewer samples alias fourth-order content onto DC
// and are rejected.
inline Moments numeric_moments(const Eigen::VectorXd& s, const Eigen::VectorXd& h_eff,
                               const Eigen::VectorXd& phases, const ToneGrid& grid,
                               int n_samples = 4096) {
    const Eigen::Index n = s.size();
    if (h_eff.size() != n || phases.size() != n)
        throw std::invalid_argument("numeric_moments: length mismatch");
    if (grid.n_tones != static_cast<int>(n))
        throw std::invalid_argument("numeric_moments: grid/tone count mismatch");
    if (n == 0) return {0.0, 0.0};

    const std::vector<long> k = detail::mixing_free_harmonics(static_cast<int>(n));
    const long k_max = k.back();
    if (static_cast<long>(n_samples) < 4 * k_max + 1)
        throw std::invalid_argument("numeric_moments: undersampled");

    const Eigen::ArrayXd amp = s.array() * h_eff.array();
    const double two_pi = 2.0 * 3.141592653589793238462643383279502884;
    double acc2 = 0.0, acc4 = 0.0;
    for (long j = 0; j < n_samples; ++j) {
        double y = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            // angle of tone i at sample j: 2*pi*k_i*j/n_samples, reduced in
            // exact integer arithmetic so large harmonics lose no precision
            const long m = (k[static_cast<std::size_t>(i)] * j) % n_samples;
            y += amp[i] * std::cos(two_pi * static_cast<double>(m) / n_samples + phases[i]);
        }
        const double y2 = y * y;
        acc2 += y2;
        acc4 += y2 * y2;
    }
    return {acc2 / n_samples, acc4 / n_samples};
}

// Average power received at the information receiver: (1/2) sum_n s_n^2 g_n^2.
inline double received_power_at_ir(const Eigen::VectorXd& s, const Eigen::VectorXd& g_eff) {
    if (s.size() != g_eff.size())
        throw std::invalid_argument("received_power_at_ir: length mismatch");
    return 0.5 * (s.array() * g_eff.array()).square().sum();
}

}  // namespace wpt::waveform
