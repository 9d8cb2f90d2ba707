#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "wpt/qp.hpp"
#include "wpt/solution.hpp"

namespace wpt::qp {

// Exhaustive KKT enumeration. Once a support set S (the coordinates with
// x_i > 0) and the set of active rows are fixed, the KKT system becomes
// linear: x_i = 0 off-support, lambda_i = 0 on-support, mu_k = 0 for inactive
// rows, A_k x = b_k for active rows, plus the N stationarity equations. Every
// local maximizer of the LCQP satisfies one such pattern, so solving all
// 2^N * 2^K square systems and keeping the feasible solutions certifies the
// global optimum at desk scale (N <= 16).
//
// All polytope vertices are additionally evaluated as a safety net; a vertex
// beating every enumerated KKT point would mean the enumeration missed a
// pattern and raises an error.
inline Solution enumerate_kkt_oracle(const QpProblem& p) {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = static_cast<int>(p.n());
    const int kr = static_cast<int>(p.rows());
    if (n > 16) throw std::invalid_argument("enumerate_kkt_oracle: N must be <= 16");
    if (kr > 2) throw std::invalid_argument("enumerate_kkt_oracle: at most 2 constraint rows");

    constexpr double kResidualTol = 1e-8;
    constexpr double kTieTol = 1e-10;
    constexpr double kCondLimit = 1e12;

    // primal cleanliness scale: a pattern whose solution dips below zero by
    // more than rounding is an infeasible active set, not a KKT point, even
    // when the absolute residual is within tolerance. On small-budget
    // problems such phantoms would otherwise overshoot the true optimum.
    double x_scale = 0.0;
    for (int i = 0; i < n; ++i) {
        double u = std::numeric_limits<double>::infinity();
        for (int k = 0; k < kr; ++k)
            if (p.A(k, i) > 0.0) u = std::min(u, p.b[k] / p.A(k, i));
        if (std::isfinite(u)) x_scale = std::max(x_scale, u);
    }
    const double x_feas_tol = 1e-9 * std::max(x_scale, 1e-300);

    bool have_best = false;
    double best_obj = 0.0;
    KktPoint best_pt;
    std::vector<int> best_support;
    long systems_solved = 0;

    std::vector<int> support, off;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        support.clear();
        off.clear();
        for (int i = 0; i < n; ++i)
            ((mask >> i) & 1u ? support : off).push_back(i);

        for (unsigned act = 0; act < (1u << kr); ++act) {
            std::vector<int> active;
            for (int k = 0; k < kr; ++k)
                if ((act >> k) & 1u) active.push_back(k);

            // unknowns: x over support, lambda off-support, mu over active rows
            const int dim = n + static_cast<int>(active.size());
            Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim, dim);
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
            const int n_sup = static_cast<int>(support.size());
            const int n_off = static_cast<int>(off.size());
            for (int i = 0; i < n; ++i) {  // stationarity rows
                for (int c = 0; c < n_sup; ++c) M(i, c) = p.Q(i, support[c]);
                for (int c = 0; c < n_off; ++c)
                    if (off[c] == i) M(i, n_sup + c) = 1.0;
                for (std::size_t c = 0; c < active.size(); ++c)
                    M(i, n + static_cast<int>(c)) = -p.A(active[c], i);
                rhs[i] = -p.f[i];
            }
            for (std::size_t c = 0; c < active.size(); ++c) {  // active rows
                const int row = n + static_cast<int>(c);
                for (int j = 0; j < n_sup; ++j) M(row, j) = p.A(active[c], support[j]);
                rhs[row] = p.b[active[c]];
            }

            ++systems_solved;
            Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
            if (!lu.isInvertible()) continue;
            const Eigen::ArrayXd piv = lu.matrixLU().diagonal().array().abs();
            if (piv.maxCoeff() > kCondLimit * piv.minCoeff()) continue;  // degenerate active set
            const Eigen::VectorXd sol = lu.solve(rhs);

            KktPoint pt;
            pt.x = Eigen::VectorXd::Zero(n);
            pt.lambda = Eigen::VectorXd::Zero(n);
            pt.mu = Eigen::VectorXd::Zero(kr);
            for (int c = 0; c < n_sup; ++c) pt.x[support[c]] = sol[c];
            for (int c = 0; c < n_off; ++c) pt.lambda[off[c]] = sol[n_sup + c];
            for (std::size_t c = 0; c < active.size(); ++c)
                pt.mu[active[c]] = sol[n + static_cast<int>(c)];

            if (kkt_residual(p, pt) > kResidualTol) continue;
            if (pt.x.minCoeff() < -x_feas_tol) continue;
            bool rows_ok = true;
            for (int k = 0; k < kr && rows_ok; ++k)
                if (p.A.row(k).dot(pt.x) > p.b[k] * (1.0 + 1e-9) + 1e-9 * x_feas_tol)
                    rows_ok = false;
            if (!rows_ok) continue;
            const double obj = objective(p, pt.x);
            if (!have_best || obj > best_obj + kTieTol ||
                (obj > best_obj - kTieTol && support < best_support)) {
                have_best = true;
                best_obj = obj;
                best_pt = pt;
                best_support = support;
            }
        }
    }
    if (!have_best) throw std::runtime_error("enumerate_kkt_oracle: no feasible KKT point found");

    // Vertex safety net: evaluate every vertex of {x >= 0, Ax <= b}.
    double best_vertex = 0.0;  // x = 0 is always a vertex
    for (int i = 0; i < n; ++i) {
        double ub = std::numeric_limits<double>::infinity();
        for (int k = 0; k < kr; ++k)
            if (p.A(k, i) > 0.0) ub = std::min(ub, p.b[k] / p.A(k, i));
        if (std::isfinite(ub)) {
            Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
            x[i] = ub;
            best_vertex = std::max(best_vertex, objective(p, x));
        }
    }
    if (kr == 2) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                Eigen::Matrix2d a;
                a << p.A(0, i), p.A(0, j), p.A(1, i), p.A(1, j);
                if (std::abs(a.determinant()) < 1e-14) continue;
                const Eigen::Vector2d xy = a.inverse() * Eigen::Vector2d(p.b[0], p.b[1]);
                if (xy.minCoeff() < 0.0) continue;
                Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
                x[i] = xy[0];
                x[j] = xy[1];
                best_vertex = std::max(best_vertex, objective(p, x));
            }
    }
    if (best_vertex > best_obj + kResidualTol * (1.0 + std::abs(best_obj)))
        throw std::logic_error("enumerate_kkt_oracle: vertex beats every enumerated KKT point");

    Solution s;
    s.x = best_pt.x;
    s.s = best_pt.x.cwiseMax(0.0).cwiseSqrt();
    s.mu = best_pt.mu;
    s.lambda = best_pt.lambda;
    s.objective = objective(p, best_pt.x);
    s.kkt_residual = kkt_residual(p, best_pt);
    s.stats.nodes_explored = systems_solved;
    s.stats.lps_solved = 0;
    s.stats.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    s.method = "oracle";
    return s;
}

}  // namespace wpt::qp
