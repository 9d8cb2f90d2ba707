#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wpt/lp.hpp"
#include "wpt/qp.hpp"
#include "wpt/solution.hpp"

namespace wpt::solvers {

struct SolverOptions {
    long node_limit = 100000;
    // fathoming slack; the effective margin is additionally capped at 1e-9
    // relative to the incumbent so near-ties are resolved to the same point
    // at every objective scale (the raw absolute value would dominate tiny
    // micro-watt objectives and let the two global methods drift apart)
    double objective_tol = 1e-10;
    std::string bound_strategy = "analytic";
    // optional instrumentation: (parent bound, child bound) per explored edge
    std::vector<std::pair<double, double>>* bound_trace = nullptr;
};

namespace detail {
inline double fathom_margin(const SolverOptions& opts, double incumbent) {
    return std::min(opts.objective_tol, 1e-9 * std::abs(incumbent));
}
}  // namespace detail

// Box bounds valid at every KKT point of the problem.
//
//   u_i     = min over rows k with A_ki > 0 of b_k / A_ki   (primal feasibility)
//   mu_max  : if mu_k > 0 then row k is active, so the support contains some i
//             with A_ki > 0 and stationarity gives mu_k A_ki <= (Qx + f)_i
//             <= (Qu + f)_i, hence mu_k <= max_i (Qu + f)_i / A_ki.
//   v       = A' mu_max bounds lambda = A'mu - Qx - f component-wise.
struct VariableBounds {
    Eigen::VectorXd u;
    Eigen::VectorXd v;
    Eigen::VectorXd mu_max;
};

inline VariableBounds variable_bounds(const qp::QpProblem& p) {
    const Eigen::Index n = p.n();
    const Eigen::Index kr = p.rows();
    VariableBounds B;
    B.u.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double u = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < kr; ++k)
            if (p.A(k, i) > 0.0) u = std::min(u, p.b[k] / p.A(k, i));
        if (!std::isfinite(u))
            throw std::invalid_argument("variable_bounds: unbounded coordinate");
        B.u[i] = u;
    }
    const Eigen::VectorXd g = p.Q * B.u + p.f;
    B.mu_max.resize(kr);
    for (Eigen::Index k = 0; k < kr; ++k) {
        double m = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (p.A(k, i) > 0.0) m = std::max(m, g[i] / p.A(k, i));
        B.mu_max[k] = m;
    }
    B.v = p.A.transpose() * B.mu_max;
    return B;
}

// Raised when the node budget runs out; carries the best incumbent found and
// the remaining optimality gap.
class NodeLimitError : public std::runtime_error {
public:
    NodeLimitError(std::optional<Solution> incumbent, double gap)
        : std::runtime_error("node limit exceeded, remaining gap " + std::to_string(gap)),
          incumbent_(std::move(incumbent)),
          gap_(gap) {}
    const std::optional<Solution>& incumbent() const { return incumbent_; }
    double gap() const { return gap_; }

private:
    std::optional<Solution> incumbent_;
    double gap_;
};

namespace detail {

// Complementarity fixings of a node: for each coordinate pair (x_i, lambda_i)
// and each row pair (mu_k, slack_k) either side may be pinned to zero /
// active. Leaves (everything decided) are exactly the KKT patterns.
struct Fixings {
    // 0 free, 1 first member zero (x_i = 0 / mu_k = 0), 2 second member zero
    // (lambda_i = 0 / row k active)
    std::vector<int> pair_state;
    std::vector<int> row_state;
};

struct NodePoint {
    Eigen::VectorXd x, lambda, mu;
    double bound = 0.0;
};

// Node relaxation: maximize the KKT-collapsed objective 0.5 (f'x + b'mu)
// subject to stationarity, primal feasibility, the box bounds and the node's
// fixings. The KKT points consistent with the fixings form a subset of the
// feasible set, so the LP value is a valid upper bound for the subtree.
inline lp::LpProblem node_lp(const qp::QpProblem& p, const VariableBounds& B,
                             const Fixings& fx) {
    const Eigen::Index n = p.n();
    const Eigen::Index kr = p.rows();
    Eigen::Index n_active = 0;
    for (int s : fx.row_state) n_active += (s == 2);

    // variables: x (0..n-1), lambda (n..2n-1), mu (2n..2n+kr-1)
    lp::LpProblem lpp = lp::LpProblem::sized(2 * n + kr, n + n_active, kr - n_active);
    lpp.c.head(n) = 0.5 * p.f;
    lpp.c.tail(kr) = 0.5 * p.b;
    for (Eigen::Index i = 0; i < n; ++i) {
        lpp.upper[i] = fx.pair_state[static_cast<std::size_t>(i)] == 1 ? 0.0 : B.u[i];
        lpp.upper[n + i] = fx.pair_state[static_cast<std::size_t>(i)] == 2 ? 0.0 : B.v[i];
    }
    for (Eigen::Index k = 0; k < kr; ++k)
        lpp.upper[2 * n + k] = fx.row_state[static_cast<std::size_t>(k)] == 1 ? 0.0 : B.mu_max[k];

    // stationarity: Q x + lambda - A'mu = -f
    lpp.eq_a.topLeftCorner(n, n) = p.Q;
    lpp.eq_a.block(0, n, n, n).setIdentity();
    lpp.eq_a.topRightCorner(n, kr) = -p.A.transpose();
    lpp.eq_b.head(n) = -p.f;

    // polytope rows, as equalities where the node forces activity
    Eigen::Index eq_at = n, ineq_at = 0;
    for (Eigen::Index k = 0; k < kr; ++k) {
        if (fx.row_state[static_cast<std::size_t>(k)] == 2) {
            lpp.eq_a.block(eq_at, 0, 1, n) = p.A.row(k);
            lpp.eq_b[eq_at] = p.b[k];
            ++eq_at;
        } else {
            lpp.ineq_a.block(ineq_at, 0, 1, n) = p.A.row(k);
            lpp.ineq_b[ineq_at] = p.b[k];
            ++ineq_at;
        }
    }
    return lpp;
}

inline NodePoint decode(const lp::LpSolution& s, Eigen::Index n, Eigen::Index kr) {
    NodePoint pt;
    pt.x = s.x.head(n);
    pt.lambda = s.x.segment(n, n);
    pt.mu = s.x.tail(kr);
    pt.bound = s.objective;
    return pt;
}

inline Solution make_solution(const qp::QpProblem& p, const NodePoint& pt, const char* method,
                              const SolveStats& stats) {
    Solution s;
    s.x = pt.x.cwiseMax(0.0);
    s.s = s.x.cwiseSqrt();
    s.mu = pt.mu;
    s.lambda = pt.lambda;
    s.objective = qp::objective(p, s.x);
    s.kkt_residual = qp::kkt_residual(p, {s.x, s.mu, s.lambda});
    s.stats = stats;
    s.method = method;
    if (s.kkt_residual > 1e-8)
        throw std::logic_error(std::string(method) + ": returned point fails the KKT certificate");
    return s;
}

// Incumbent gate: only points that certify against the true KKT system are
// kept, so a numerically marginal node can close on its bound without ever
// polluting the reported solution.
inline bool certifies(const qp::QpProblem& p, const NodePoint& pt) {
    return qp::kkt_residual(p, {pt.x.cwiseMax(0.0), pt.mu, pt.lambda}) <= 1e-8;
}

// A row whose activity cannot reach its right-hand side anywhere in the
// variable box never binds, carries mu_k = 0 at every KKT point, and is
// implied by the box. Such rows are removed before solving: a wildly slack
// cap (say a huge P_sat) would otherwise dominate the LP scaling and its
// complementarity dimension would double the tree for nothing.
struct Reduction {
    qp::QpProblem prob;                // the problem the tree machinery sees
    std::vector<Eigen::Index> kept;    // reduced row -> original row
    Eigen::Index full_rows = 0;
};

inline Reduction reduce_inert_rows(const qp::QpProblem& p) {
    const Eigen::VectorXd u = variable_bounds(p).u;
    Reduction red;
    red.full_rows = p.rows();
    for (Eigen::Index k = 0; k < p.rows(); ++k)
        if (p.A.row(k).dot(u) > p.b[k] * (1.0 - 1e-9)) red.kept.push_back(k);
    if (static_cast<Eigen::Index>(red.kept.size()) == p.rows()) {
        red.prob = p;
        return red;
    }
    red.prob = p;
    red.prob.A.resize(static_cast<Eigen::Index>(red.kept.size()), p.n());
    red.prob.b.resize(static_cast<Eigen::Index>(red.kept.size()));
    for (std::size_t i = 0; i < red.kept.size(); ++i) {
        red.prob.A.row(static_cast<Eigen::Index>(i)) = p.A.row(red.kept[i]);
        red.prob.b[static_cast<Eigen::Index>(i)] = p.b[red.kept[i]];
    }
    return red;
}

// Maps a point of the reduced problem back to the original row space.
inline NodePoint scatter_rows(const NodePoint& pt, const Reduction& red) {
    NodePoint out = pt;
    out.mu = Eigen::VectorXd::Zero(red.full_rows);
    for (std::size_t i = 0; i < red.kept.size(); ++i)
        out.mu[red.kept[i]] = pt.mu[static_cast<Eigen::Index>(i)];
    return out;
}

constexpr double kComplementarityTol = 1e-9;

}  // namespace detail

// Finite branch-and-bound on the complementarity structure. Each node solves
// the LP relaxation above; branching picks the most violated complementarity
// product and pins one side per child. A node whose relaxation is already
// complementary is a KKT point and becomes an incumbent (its bound equals its
// true objective, so the subtree is closed). Depth-first; at each branch the
// child agreeing with the node solution is explored first.
inline Solution solve_bb(const qp::QpProblem& p_in, const SolverOptions& opts = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    if (p_in.n() > 32) throw std::invalid_argument("solve_bb: N must be <= 32");
    const detail::Reduction red = detail::reduce_inert_rows(p_in);
    const qp::QpProblem& p = red.prob;
    const Eigen::Index n = p.n();
    const Eigen::Index kr = p.rows();
    const VariableBounds B = variable_bounds(p);

    struct Node {
        detail::Fixings fx;
        double parent_bound;
    };
    std::vector<Node> stack;
    stack.push_back({detail::Fixings{std::vector<int>(static_cast<std::size_t>(n), 0),
                                     std::vector<int>(static_cast<std::size_t>(kr), 0)},
                     std::numeric_limits<double>::infinity()});

    SolveStats stats;
    bool have_inc = false;
    double inc_obj = -std::numeric_limits<double>::infinity();
    detail::NodePoint inc_pt;

    while (!stack.empty()) {
        const Node node = std::move(stack.back());
        stack.pop_back();
        if (++stats.nodes_explored > opts.node_limit) {
            stats.wall_time_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            double open = node.parent_bound;
            for (const Node& other : stack) open = std::max(open, other.parent_bound);
            std::optional<Solution> inc;
            if (have_inc)
                inc = detail::make_solution(p_in, detail::scatter_rows(inc_pt, red), "bb", stats);
            throw NodeLimitError(std::move(inc), open - (have_inc ? inc_obj : 0.0));
        }
        if (have_inc && node.parent_bound <= inc_obj + detail::fathom_margin(opts, inc_obj))
            continue;

        const lp::LpSolution rel = lp::solve_lp(detail::node_lp(p, B, node.fx));
        ++stats.lps_solved;
        if (rel.status != lp::LpStatus::optimal) continue;  // infeasible fixings
        if (opts.bound_trace) opts.bound_trace->emplace_back(node.parent_bound, rel.objective);
        if (have_inc && rel.objective <= inc_obj + detail::fathom_margin(opts, inc_obj))
            continue;

        const detail::NodePoint pt = detail::decode(rel, n, kr);

        // most violated complementarity product
        double worst = 0.0;
        int branch_pair = -1, branch_row = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (node.fx.pair_state[static_cast<std::size_t>(i)] != 0) continue;
            const double viol = std::abs(pt.x[i] * pt.lambda[i]);
            if (viol > worst) {
                worst = viol;
                branch_pair = static_cast<int>(i);
                branch_row = -1;
            }
        }
        for (Eigen::Index k = 0; k < kr; ++k) {
            if (node.fx.row_state[static_cast<std::size_t>(k)] != 0) continue;
            const double viol = std::abs(pt.mu[k] * (p.b[k] - p.A.row(k).dot(pt.x)));
            if (viol > worst) {
                worst = viol;
                branch_row = static_cast<int>(k);
                branch_pair = -1;
            }
        }

        if (worst <= detail::kComplementarityTol) {
            // complementary relaxation: a KKT point up to tolerance. Its true
            // objective sits below the node bound by half the sum of the
            // residual complementarity products, so the subtree may only be
            // closed once that gap is inside the fathoming margin; otherwise
            // a strictly better KKT point could hide behind the slack.
            const double obj = qp::objective(p, pt.x.cwiseMax(0.0));
            if ((!have_inc || obj > inc_obj) && detail::certifies(p, pt)) {
                have_inc = true;
                inc_obj = obj;
                inc_pt = pt;
            }
            if (rel.objective <= obj + detail::fathom_margin(opts, obj)) continue;
            if (branch_pair < 0 && branch_row < 0) continue;  // nothing left to branch
        }

        if (branch_pair >= 0) {
            Node first{node.fx, rel.objective}, second{node.fx, rel.objective};
            first.fx.pair_state[static_cast<std::size_t>(branch_pair)] = 2;   // lambda_i = 0
            second.fx.pair_state[static_cast<std::size_t>(branch_pair)] = 1;  // x_i = 0
            const bool prefer_x = pt.x[branch_pair] >= pt.lambda[branch_pair];
            stack.push_back(prefer_x ? second : first);  // explored last
            stack.push_back(prefer_x ? first : second);  // explored first
        } else {
            Node first{node.fx, rel.objective}, second{node.fx, rel.objective};
            first.fx.row_state[static_cast<std::size_t>(branch_row)] = 2;   // row active
            second.fx.row_state[static_cast<std::size_t>(branch_row)] = 1;  // mu_k = 0
            const double slack = p.b[branch_row] - p.A.row(branch_row).dot(pt.x);
            const bool prefer_active = pt.mu[branch_row] >= slack;
            stack.push_back(prefer_active ? second : first);
            stack.push_back(prefer_active ? first : second);
        }
    }
    if (!have_inc) throw std::runtime_error("solve_bb: no KKT point found");
    stats.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return detail::make_solution(p_in, detail::scatter_rows(inc_pt, red), "bb", stats);
}

// Implicit enumeration of the mixed-binary reformulation: one binary z_i per
// complementarity pair (x_i <= z_i u_i, lambda_i <= (1 - z_i) v_i) and one
// binary zeta_k per row (mu_k <= zeta_k mu_max_k, b_k - A_k x <= (1 - zeta_k) b_k).
// Binaries are branched in index order, the value agreeing with the node
// relaxation first; undecided binaries contribute their free relaxation
// x_i <= u_i, lambda_i <= v_i. Leaves are complete patterns, i.e. KKT points;
// the incumbent keeps the best true quadratic objective.
//
// stats.nodes_explored counts evaluated leaves, stats.lps_solved all node LPs.
inline Solution solve_milp_kkt(const qp::QpProblem& p_in, const SolverOptions& opts = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    if (p_in.n() > 16) throw std::invalid_argument("solve_milp_kkt: N must be <= 16");
    const detail::Reduction red = detail::reduce_inert_rows(p_in);
    const qp::QpProblem& p = red.prob;
    const Eigen::Index n = p.n();
    const Eigen::Index kr = p.rows();
    const VariableBounds B = variable_bounds(p);

    SolveStats stats;
    bool have_inc = false;
    double inc_obj = -std::numeric_limits<double>::infinity();
    detail::NodePoint inc_pt;
    const long total_binaries = static_cast<long>(n + kr);

    struct Frame {
        detail::Fixings fx;
        long decided;
        double parent_bound;
    };
    std::vector<Frame> stack;
    stack.push_back({detail::Fixings{std::vector<int>(static_cast<std::size_t>(n), 0),
                                     std::vector<int>(static_cast<std::size_t>(kr), 0)},
                     0, std::numeric_limits<double>::infinity()});
    long visited = 0;

    while (!stack.empty()) {
        const Frame fr = std::move(stack.back());
        stack.pop_back();
        if (++visited > opts.node_limit) {
            stats.wall_time_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            double open = fr.parent_bound;
            for (const Frame& other : stack) open = std::max(open, other.parent_bound);
            std::optional<Solution> inc;
            if (have_inc)
                inc = detail::make_solution(p_in, detail::scatter_rows(inc_pt, red), "milp", stats);
            throw NodeLimitError(std::move(inc), open - (have_inc ? inc_obj : 0.0));
        }
        if (have_inc && fr.parent_bound <= inc_obj + detail::fathom_margin(opts, inc_obj))
            continue;

        const lp::LpSolution rel = lp::solve_lp(detail::node_lp(p, B, fr.fx));
        ++stats.lps_solved;
        if (rel.status != lp::LpStatus::optimal) continue;
        if (have_inc && rel.objective <= inc_obj + detail::fathom_margin(opts, inc_obj))
            continue;
        const detail::NodePoint pt = detail::decode(rel, n, kr);

        // a relaxation that is already complementary settles its subtree
        double worst = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            worst = std::max(worst, std::abs(pt.x[i] * pt.lambda[i]));
        for (Eigen::Index k = 0; k < kr; ++k)
            worst = std::max(worst, std::abs(pt.mu[k] * (p.b[k] - p.A.row(k).dot(pt.x))));
        if (fr.decided == total_binaries || worst <= detail::kComplementarityTol) {
            const double obj = qp::objective(p, pt.x.cwiseMax(0.0));
            if ((!have_inc || obj > inc_obj) && detail::certifies(p, pt)) {
                have_inc = true;
                inc_obj = obj;
                inc_pt = pt;
            }
            // a complete pattern always closes; a tolerance-complementary
            // interior node only once its bound-to-objective gap (half the
            // residual complementarity products) is inside the margin
            if (fr.decided == total_binaries ||
                rel.objective <= obj + detail::fathom_margin(opts, obj)) {
                ++stats.nodes_explored;
                continue;
            }
        }

        const long d = fr.decided;
        Frame one{fr.fx, fr.decided + 1, rel.objective},
            zero{fr.fx, fr.decided + 1, rel.objective};
        bool one_first;
        if (d < static_cast<long>(n)) {
            const auto i = static_cast<std::size_t>(d);
            one.fx.pair_state[i] = 2;   // z_i = 1: x free, lambda_i = 0
            zero.fx.pair_state[i] = 1;  // z_i = 0: x_i = 0
            one_first = pt.x[d] >= pt.lambda[d];
        } else {
            const auto k = static_cast<std::size_t>(d - n);
            one.fx.row_state[k] = 2;   // zeta_k = 1: row active
            zero.fx.row_state[k] = 1;  // zeta_k = 0: mu_k = 0
            const double slack = p.b[static_cast<Eigen::Index>(k)] -
                                 p.A.row(static_cast<Eigen::Index>(k)).dot(pt.x);
            one_first = pt.mu[static_cast<Eigen::Index>(k)] >= slack;
        }
        stack.push_back(one_first ? zero : one);
        stack.push_back(one_first ? one : zero);
    }
    if (!have_inc) throw std::runtime_error("solve_milp_kkt: no KKT point found");
    stats.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return detail::make_solution(p_in, detail::scatter_rows(inc_pt, red), "milp", stats);
}

enum class Baseline { equal, mrt, single };

// Reference allocation strategies; each spends the budget exactly,
// 0.5 ||s||^2 = P.
inline Eigen::VectorXd baseline_alloc(Baseline kind, const Eigen::VectorXd& h_eff, double P) {
    const Eigen::Index n = h_eff.size();
    if (n < 1) throw std::invalid_argument("baseline_alloc: empty channel");
    if (!(P > 0.0)) throw std::invalid_argument("baseline_alloc: P must be > 0");
    if (!(h_eff.minCoeff() > 0.0))
        throw std::invalid_argument("baseline_alloc: h_eff must be > 0");
    Eigen::VectorXd s(n);
    switch (kind) {
        case Baseline::equal:
            s.setConstant(std::sqrt(2.0 * P / static_cast<double>(n)));
            break;
        case Baseline::mrt:
            s = h_eff * std::sqrt(2.0 * P / h_eff.squaredNorm());
            break;
        case Baseline::single: {
            Eigen::Index best = 0;
            for (Eigen::Index i = 1; i < n; ++i)
                if (h_eff[i] > h_eff[best]) best = i;  // ties go to the lowest index
            s.setZero();
            s[best] = std::sqrt(2.0 * P);
            break;
        }
    }
    return s;
}

struct AllocationEval {
    double objective = 0.0;
    bool feasible = true;
    int violated_row = -1;
};

// Objective of an amplitude allocation under a problem's constraints.
// Infeasible allocations are flagged with the violated row, never rescaled.
inline AllocationEval evaluate_allocation(const Eigen::VectorXd& s, const qp::QpProblem& p) {
    if (s.size() != p.n()) throw std::invalid_argument("evaluate_allocation: length mismatch");
    const Eigen::VectorXd x = s.array().square().matrix();
    AllocationEval ev;
    ev.objective = qp::objective(p, x);
    const Eigen::VectorXd ax = p.A * x;
    for (Eigen::Index k = 0; k < p.rows(); ++k)
        if (ax[k] > p.b[k] + 1e-9 * (1.0 + std::abs(p.b[k]))) {
            ev.feasible = false;
            ev.violated_row = static_cast<int>(k);
            break;
        }
    return ev;
}

}  // namespace wpt::solvers
