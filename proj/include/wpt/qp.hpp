#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>

#include "wpt/harvester.hpp"
#include "wpt/waveform.hpp"

namespace wpt::qp {

// The tone-power allocation program. With x_i = s_i^2,
//
//     maximize   F(x) = 0.5 x'Qx + f'x
//     subject to A x <= b,  x >= 0
//
// where Q_ij = 2 (2 - delta_ij) (3 c4 / 8) h_i^2 h_j^2, f_i = (c2/2) h_i^2,
// row 1 of A is all ones with b_1 = 2P (transmit power) and the optional
// row 2 is g_i^2 with b_2 = 2 P_sat (received-power cap at the information
// receiver). Q is entrywise non-negative but indefinite, so the program is a
// non-convex LCQP.
//
// Sign conventions (load-bearing). For the *maximization* above with
// multipliers mu >= 0 on the rows and lambda >= 0 on the sign constraints,
// stationarity of -F(x) + mu'(Ax - b) - lambda'x reads
//
//     Qx + f - A'mu + lambda = 0.                                   (S)
//
// Multiplying (S) by x' and using the complementarity conditions
// x'lambda = 0 and mu_k (A_k x - b_k) = 0 gives x'Qx = b'mu - f'x, hence at
// every KKT point the quadratic objective collapses to the linear form
//
//     F(x) = 0.5 (f'x + b'mu).                                      (L)
//
// (N = 1 check: x = 2P, mu = 2Pq + f gives 0.5(2Pf + 2P(2Pq + f))
// = 2P^2 q + 2Pf = F(2P).) The global solvers maximize (L) over relaxations
// of the KKT set; a minimization-convention derivation flips the signs of
// both mu terms, which silently turns (L) into a wrong bound, so the
// convention is pinned here and asserted by the tests.

struct QpProblem {
    Eigen::MatrixXd Q;
    Eigen::VectorXd f;
    Eigen::MatrixXd A;  // K x N, K in {1, 2}
    Eigen::VectorXd b;

    // provenance
    Eigen::VectorXd h_eff;
    std::optional<Eigen::VectorXd> g_eff;
    harvester::ObjectiveCoeffs coeffs{0.0, 0.0, 0.0};
    double P = 0.0;
    std::optional<double> P_sat;

    Eigen::Index n() const { return f.size(); }
    Eigen::Index rows() const { return b.size(); }
};

struct KktPoint {
    Eigen::VectorXd x;       // N, >= 0
    Eigen::VectorXd mu;      // K, >= 0
    Eigen::VectorXd lambda;  // N, >= 0
};

inline QpProblem build_qp(const Eigen::VectorXd& h_eff, const harvester::ObjectiveCoeffs& coeffs,
                          double P,
                          const std::optional<std::pair<Eigen::VectorXd, double>>& swipt = {}) {
    const Eigen::Index n = h_eff.size();
    if (n < 1) throw std::invalid_argument("build_qp: empty channel");
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(h_eff[i] > 0.0))
            throw std::invalid_argument(
                "build_qp: h_eff has a zero-gain tone; drop it before building the program");
    if (!(P > 0.0)) throw std::invalid_argument("build_qp: P must be > 0");
    if (!(coeffs.c2 > 0.0) || coeffs.c4 < 0.0)
        throw std::invalid_argument("build_qp: need c2 > 0 and c4 >= 0");

    QpProblem p;
    const Eigen::ArrayXd h2 = h_eff.array().square();
    p.Q.resize(n, n);
    const double q_scale = 3.0 * coeffs.c4 / 8.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            p.Q(i, j) = 2.0 * (i == j ? 1.0 : 2.0) * q_scale * h2[i] * h2[j];
    p.f = (0.5 * coeffs.c2) * h2.matrix();

    const Eigen::Index k = swipt ? 2 : 1;
    p.A.resize(k, n);
    p.b.resize(k);
    p.A.row(0).setOnes();
    p.b[0] = 2.0 * P;
    if (swipt) {
        const auto& [g_eff, p_sat] = *swipt;
        if (g_eff.size() != n) throw std::invalid_argument("build_qp: g_eff length mismatch");
        if (g_eff.minCoeff() < 0.0)
            throw std::invalid_argument("build_qp: g_eff must be >= 0");
        if (!(p_sat > 0.0)) throw std::invalid_argument("build_qp: P_sat must be > 0");
        p.A.row(1) = g_eff.array().square().matrix().transpose();
        p.b[1] = 2.0 * p_sat;
        p.g_eff = g_eff;
        p.P_sat = p_sat;
    }
    p.h_eff = h_eff;
    p.coeffs = coeffs;
    p.P = P;
    return p;
}

// 0.5 x'Qx + f'x. The model offset is excluded; reporting adds coeffs.offset
// separately.
inline double objective(const QpProblem& p, const Eigen::VectorXd& x) {
    if (x.size() != p.n()) throw std::invalid_argument("objective: dimension mismatch");
    return 0.5 * x.dot(p.Q * x) + p.f.dot(x);
}

// Same quantity evaluated in amplitude space through the signal moments:
// c4 * E{y^4} + c2 * E{y^2}. Algebraically identical to objective() at
// x = s^2; the two routes are kept independent as a cross-check.
inline double fdc_from_amplitudes(const Eigen::VectorXd& s, const Eigen::VectorXd& h_eff,
                                  const harvester::ObjectiveCoeffs& coeffs) {
    const auto m = waveform::analytic_moments(s, h_eff);
    return coeffs.c4 * m.m4 + coeffs.c2 * m.m2;
}

// Worst violation of the KKT system at a point: stationarity (S), the two
// complementarity families, and the sign/feasibility constraints. Zero (up to
// tolerance) exactly at KKT points.
inline double kkt_residual(const QpProblem& p, const KktPoint& pt) {
    if (pt.x.size() != p.n() || pt.lambda.size() != p.n() || pt.mu.size() != p.rows())
        throw std::invalid_argument("kkt_residual: dimension mismatch");
    double r = 0.0;
    const Eigen::VectorXd stat = p.Q * pt.x + p.f - p.A.transpose() * pt.mu + pt.lambda;
    r = std::max(r, stat.cwiseAbs().maxCoeff());
    r = std::max(r, (pt.x.array() * pt.lambda.array()).abs().maxCoeff());
    const Eigen::VectorXd ax = p.A * pt.x;
    for (Eigen::Index k = 0; k < p.rows(); ++k) {
        r = std::max(r, std::abs(pt.mu[k] * (ax[k] - p.b[k])));
        r = std::max(r, ax[k] - p.b[k]);  // primal feasibility, positive part
        r = std::max(r, -pt.mu[k]);
    }
    r = std::max(r, -pt.x.minCoeff());
    r = std::max(r, -pt.lambda.minCoeff());
    return std::max(r, 0.0);
}

}  // namespace wpt::qp
