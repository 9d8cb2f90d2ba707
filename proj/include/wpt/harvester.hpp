#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace wpt::harvester {

// Non-linear energy-harvester models. Two of them reduce to the quadratic
// objective the optimizer consumes (DiodeTaylor, Poly2); the saturation-type
// models (Sigmoid, Rational, RationalSimplified) are evaluators only.

struct DiodeParams {
    double i_s;    // saturation current [A]
    double v_t;    // thermal voltage [V]
    double gamma;  // ideality factor
    double r_ant;  // antenna resistance [ohm]
};

struct DiodeTaylor {
    double k2;  // [A/V^2]
    double k4;  // [A/V^4]
    double r_ant;
};

// P_out = beta1 * P_in^2 + beta2 * P_in + beta3 (low-power region fit).
struct Poly2 {
    double beta1, beta2, beta3;
};

// Logistic saturation model.
struct Sigmoid {
    double pi1, pi2, pi3;
};

// Full rational model (eta3 p^3 + eta2 p^2 + eta1 p) / (q3 p^3 + q2 p^2 + q1 p + q0).
struct Rational {
    double eta1, eta2, eta3;
    double q0, q1, q2, q3;
};

// Reduced rational model (theta3 p + theta2)/(p + theta1) - theta2/theta1.
struct RationalSimplified {
    double theta1, theta2, theta3;
};

using HarvesterModel = std::variant<DiodeTaylor, Poly2, Sigmoid, Rational, RationalSimplified>;

// Quadratic-form coefficients shared by the two optimizable models:
// objective = c4 * E{y^4} + c2 * E{y^2} (+ offset, reporting only).
struct ObjectiveCoeffs {
    double c2;
    double c4;
    double offset;
};

struct TaylorCoeffs {
    double k2, k4;
};

// Even-order Taylor coefficients of the diode exponential,
// k_n = i_s / (n! * (gamma * v_t)^n) for n in {2, 4}.
inline TaylorCoeffs taylor_coeffs(const DiodeParams& p) {
    if (!(p.i_s > 0.0 && p.v_t > 0.0 && p.gamma > 0.0 && p.r_ant > 0.0))
        throw std::invalid_argument("taylor_coeffs: diode parameters must be > 0");
    const double gv = p.gamma * p.v_t;
    const double gv2 = gv * gv;
    return {p.i_s / (2.0 * gv2), p.i_s / (24.0 * gv2 * gv2)};
}

inline DiodeTaylor diode_taylor(const DiodeParams& p) {
    const TaylorCoeffs k = taylor_coeffs(p);
    return {k.k2, k.k4, p.r_ant};
}

inline ObjectiveCoeffs model_coeffs(const HarvesterModel& m) {
    if (const auto* d = std::get_if<DiodeTaylor>(&m)) {
        if (!(d->k2 > 0.0 && d->k4 > 0.0 && d->r_ant > 0.0))
            throw std::invalid_argument("model_coeffs: diode coefficients must be > 0");
        return {d->k2 * d->r_ant, d->k4 * d->r_ant * d->r_ant, 0.0};
    }
    if (const auto* q = std::get_if<Poly2>(&m)) {
        if (!(q->beta2 > 0.0) || q->beta1 < 0.0)
            throw std::invalid_argument(
                "model_coeffs: Poly2 needs beta2 > 0 and beta1 >= 0 (low-power-region fit)");
        return {q->beta2, q->beta1, q->beta3};
    }
    throw std::invalid_argument("model_coeffs: model not reducible to LCQP");
}

// Least-squares quadratic through (p_in, p_out) samples via the normal
// equations of the 3-column design matrix. Inputs are scaled to their max
// abscissa internally; coefficients are returned unscaled.
inline Poly2 fit_poly2(const std::vector<std::pair<double, double>>& samples) {
    if (samples.size() < 3) throw std::invalid_argument("fit_poly2: need at least 3 samples");
    std::vector<double> xs;
    xs.reserve(samples.size());
    for (const auto& s : samples) xs.push_back(s.first);
    std::sort(xs.begin(), xs.end());
    if (std::unique(xs.begin(), xs.end()) - xs.begin() < 3)
        throw std::invalid_argument("fit_poly2: need at least 3 distinct p_in values");

    const double xm = std::max(std::abs(xs.front()), std::abs(xs.back()));
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d atb = Eigen::Vector3d::Zero();
    for (const auto& [p, y] : samples) {
        const double u = p / xm;
        const Eigen::Vector3d row(u * u, u, 1.0);
        ata += row * row.transpose();
        atb += row * y;
    }
    Eigen::FullPivLU<Eigen::Matrix3d> lu(ata);
    if (!lu.isInvertible())
        throw std::invalid_argument("fit_poly2: rank-deficient design");
    const Eigen::Vector3d beta = lu.solve(atb);
    return {beta[0] / (xm * xm), beta[1] / xm, beta[2]};
}

// Closed-form model response before the reporting clamp.
inline double eval_model_raw(const HarvesterModel& m, double p_in) {
    if (!(p_in >= 0.0)) throw std::invalid_argument("eval_model: p_in must be >= 0");
    struct Visitor {
        double p;
        double operator()(const DiodeTaylor& d) const {
            // single-tone continuous-wave response: E{y^2} = p, E{y^4} = (3/2) p^2
            const double c2 = d.k2 * d.r_ant;
            const double c4 = d.k4 * d.r_ant * d.r_ant;
            return c2 * p + 1.5 * c4 * p * p;
        }
        double operator()(const Poly2& q) const { return q.beta1 * p * p + q.beta2 * p + q.beta3; }
        double operator()(const Sigmoid& s) const {
            const double base = 1.0 / (1.0 + std::exp(s.pi1 * s.pi2));
            const double logistic = s.pi3 / (1.0 + std::exp(-s.pi1 * (p - s.pi2)));
            return (logistic - s.pi3 * base) / (1.0 - base);
        }
        double operator()(const Rational& r) const {
            const double num = ((r.eta3 * p + r.eta2) * p + r.eta1) * p;
            const double den = ((r.q3 * p + r.q2) * p + r.q1) * p + r.q0;
            if (den == 0.0) throw std::invalid_argument("eval_model: pole");
            return num / den;
        }
        double operator()(const RationalSimplified& r) const {
            if (p + r.theta1 == 0.0 || r.theta1 == 0.0)
                throw std::invalid_argument("eval_model: pole");
            return (r.theta3 * p + r.theta2) / (p + r.theta1) - r.theta2 / r.theta1;
        }
    };
    return std::visit(Visitor{p_in}, m);
}

// Reporting value: clamped below at 0 (low-power fits can dip negative near
// zero input).
inline double eval_model(const HarvesterModel& m, double p_in) {
    return std::max(0.0, eval_model_raw(m, p_in));
}

// ---- CSV ingestion ----------------------------------------------------------
//
// Header "p_in_w,p_out_w", one sample per row, plain decimal notation.

inline std::vector<std::pair<double, double>> read_samples_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("harvester csv: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "p_in_w,p_out_w")
        throw std::runtime_error("harvester csv: bad header '" + line + "'");
    std::vector<std::pair<double, double>> out;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b))
            throw std::runtime_error("harvester csv: malformed line " + std::to_string(line_no));
        out.emplace_back(std::stod(a), std::stod(b));
    }
    return out;
}

inline std::vector<std::pair<double, double>> read_samples_csv_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("harvester csv: cannot open " + path);
    return read_samples_csv(is);
}

}  // namespace wpt::harvester
