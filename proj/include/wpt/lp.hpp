#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <vector>

namespace wpt::lp {

enum class LpStatus { optimal, infeasible, unbounded };

// Dense LP in the form
//
//     maximize   c'x
//     subject to eq_a   x  = eq_b
//                ineq_a x <= ineq_b
//                lower <= x <= upper
//
// Lower bounds must be finite; upper bounds may be +inf. Intended for the
// small, heavily degenerate node problems of the global solvers (<= 200
// variables).
struct LpProblem {
    Eigen::VectorXd c;
    Eigen::MatrixXd eq_a;
    Eigen::VectorXd eq_b;
    Eigen::MatrixXd ineq_a;
    Eigen::VectorXd ineq_b;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    static LpProblem sized(Eigen::Index n, Eigen::Index me, Eigen::Index mi) {
        LpProblem p;
        p.c = Eigen::VectorXd::Zero(n);
        p.eq_a = Eigen::MatrixXd::Zero(me, n);
        p.eq_b = Eigen::VectorXd::Zero(me);
        p.ineq_a = Eigen::MatrixXd::Zero(mi, n);
        p.ineq_b = Eigen::VectorXd::Zero(mi);
        p.lower = Eigen::VectorXd::Zero(n);
        p.upper = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
        return p;
    }
};

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    Eigen::VectorXd x;
    double objective = 0.0;
    Eigen::VectorXd duals;  // one per row, equality rows first
};

namespace detail {

// Bounded-variable primal simplex, two phases, dense basis refactorization.
// Dantzig pricing with smallest-index tie-breaks; Bland's rule engages after
// a run of 3 * n_vars degenerate pivots and disengages on the next real step.
class Simplex {
public:
    explicit Simplex(const LpProblem& p) : prob_(p) {
        n_ = p.c.size();
        me_ = p.eq_b.size();
        mi_ = p.ineq_b.size();
        m_ = me_ + mi_;
        if (n_ > 200) throw std::invalid_argument("solve_lp: more than 200 variables");
        if (p.eq_a.rows() != me_ || (me_ > 0 && p.eq_a.cols() != n_))
            throw std::invalid_argument("solve_lp: equality block dimensions");
        if (p.ineq_a.rows() != mi_ || (mi_ > 0 && p.ineq_a.cols() != n_))
            throw std::invalid_argument("solve_lp: inequality block dimensions");
        if (p.lower.size() != n_ || p.upper.size() != n_)
            throw std::invalid_argument("solve_lp: bound dimensions");
        for (Eigen::Index j = 0; j < n_; ++j) {
            if (!std::isfinite(p.lower[j]))
                throw std::invalid_argument("solve_lp: lower bounds must be finite");
            if (p.lower[j] > p.upper[j])
                throw std::invalid_argument("solve_lp: lower bound above upper bound");
        }
        if (!p.c.allFinite() || (me_ > 0 && !p.eq_a.allFinite()) ||
            (mi_ > 0 && !p.ineq_a.allFinite()) || !p.eq_b.allFinite() || !p.ineq_b.allFinite())
            throw std::invalid_argument("solve_lp: non-finite problem data");

        nt_ = n_ + mi_ + m_;  // structural + slacks + artificials
        cols_ = Eigen::MatrixXd::Zero(m_, nt_);
        if (me_ > 0) cols_.topLeftCorner(me_, n_) = p.eq_a;
        if (mi_ > 0) cols_.bottomLeftCorner(mi_, n_) = p.ineq_a;
        for (Eigen::Index r = 0; r < mi_; ++r) cols_(me_ + r, n_ + r) = 1.0;  // slacks
        rhs_.resize(m_);
        rhs_ << p.eq_b, p.ineq_b;

        lo_ = Eigen::VectorXd::Zero(nt_);
        hi_ = Eigen::VectorXd::Constant(nt_, std::numeric_limits<double>::infinity());
        lo_.head(n_) = p.lower;
        hi_.head(n_) = p.upper;

        state_.assign(static_cast<std::size_t>(nt_), AtLower);
        val_ = lo_;

        // artificial columns start as the basis, signed to absorb the residual
        Eigen::VectorXd resid = rhs_;
        for (Eigen::Index j = 0; j < n_ + mi_; ++j)
            if (val_[j] != 0.0) resid -= cols_.col(j) * val_[j];
        basis_.resize(static_cast<std::size_t>(m_));
        for (Eigen::Index r = 0; r < m_; ++r) {
            const Eigen::Index a = n_ + mi_ + r;
            cols_(r, a) = resid[r] < 0.0 ? -1.0 : 1.0;
            basis_[static_cast<std::size_t>(r)] = a;
            state_[static_cast<std::size_t>(a)] = Basic;
            val_[a] = std::abs(resid[r]);
        }
        col_scale_ = m_ > 0 && nt_ > 0 ? std::max(1.0, cols_.cwiseAbs().maxCoeff()) : 1.0;
    }

    LpSolution run() {
        // phase 1: drive the artificials to zero
        Eigen::VectorXd cost = Eigen::VectorXd::Zero(nt_);
        cost.tail(m_).setConstant(-1.0);
        const Iterate ph1 = iterate(cost);
        if (ph1.status == LpStatus::unbounded)
            throw std::logic_error("solve_lp: phase 1 unbounded");
        if (ph1.objective < -0.5 * feas_tol_ * (1.0 + rhs_scale()))
            return LpSolution{LpStatus::infeasible, Eigen::VectorXd(), 0.0, Eigen::VectorXd()};
        for (Eigen::Index a = n_ + mi_; a < nt_; ++a) hi_[a] = 0.0;  // lock artificials

        // phase 2: the real objective
        cost.setZero();
        cost.head(n_) = prob_.c;
        const Iterate ph2 = iterate(cost);
        if (ph2.status == LpStatus::unbounded)
            return LpSolution{LpStatus::unbounded, Eigen::VectorXd(), 0.0, Eigen::VectorXd()};

        // settle residual numerical dust onto the bounds before reporting
        const double pad = feas_tol_ * (1.0 + rhs_scale());
        for (Eigen::Index j = 0; j < n_; ++j) {
            if (val_[j] < lo_[j] && val_[j] > lo_[j] - pad) val_[j] = lo_[j];
            if (val_[j] > hi_[j] && val_[j] < hi_[j] + pad) val_[j] = hi_[j];
        }

        LpSolution sol;
        sol.status = LpStatus::optimal;
        sol.x = val_.head(n_);
        sol.objective = prob_.c.dot(sol.x);
        sol.duals = ph2.duals;
        verify(sol);
        return sol;
    }

private:
    enum VarState { Basic, AtLower, AtUpper };

    struct Iterate {
        LpStatus status;
        double objective;
        Eigen::VectorXd duals;
    };

    // One simplex phase. Returns optimal (with duals) or unbounded.
    //
    // Basic values are maintained incrementally across pivots rather than
    // recomputed from the factorization: a fresh solve enforces exact row
    // consistency and dumps any residual row infeasibility (phase-1 dust at
    // the edge of double precision) onto whichever basic variable has the
    // smallest pivot, which can turn an acceptable 1e-8 row residual into a
    // large bound violation. Incremental updates keep bounds respected by
    // the ratio test itself and leave row residuals where they are small.
    Iterate iterate(const Eigen::VectorXd& cost) {
        const long max_iter = 2000 + 200 * static_cast<long>(m_ + nt_);
        long degenerate_run = 0;
        bool bland = false;
        Eigen::VectorXd y(m_), w(m_);
        Eigen::MatrixXd Binv(m_, m_);

        for (long iter = 0; iter < max_iter; ++iter) {
            factorize(Binv);
            y.noalias() = Binv.transpose() * gather_basic(cost);

            // pricing
            Eigen::Index enter = -1;
            double best_rc = 0.0;
            for (Eigen::Index j = 0; j < nt_; ++j) {
                const auto js = static_cast<std::size_t>(j);
                if (state_[js] == Basic || lo_[j] == hi_[j]) continue;
                const double rc = cost[j] - y.dot(cols_.col(j));
                const bool eligible = (state_[js] == AtLower && rc > pivot_tol_) ||
                                      (state_[js] == AtUpper && rc < -pivot_tol_);
                if (!eligible) continue;
                if (bland) {
                    enter = j;
                    break;
                }
                if (std::abs(rc) > best_rc) {
                    best_rc = std::abs(rc);
                    enter = j;
                }
            }
            if (enter < 0) return {LpStatus::optimal, cost.dot(val_), y};

            const auto es = static_cast<std::size_t>(enter);
            const double sigma = state_[es] == AtLower ? 1.0 : -1.0;
            w.noalias() = Binv * cols_.col(enter);

            // Harris two-pass ratio test. Pass 1 finds the largest step that
            // keeps every basic within its bound plus a small allowance;
            // pass 2 pivots on the numerically strongest entry among the rows
            // whose exact ratio fits under that step, and the applied step is
            // that row's exact ratio. A parked variable is later snapped to
            // its bound when it leaves the basis, which perturbs the rows by
            // the allowance times its column norm, so the allowance is kept
            // in row-residual units: divided by the largest column entry.
            // Tiny pivots (which breed near-singular bases) are avoided
            // whenever a stronger one blocks at a comparable step.
            const double allow = 0.1 * feas_tol_ * (1.0 + rhs_scale()) / col_scale_;
            auto strict_ratio = [&](Eigen::Index r, double& t, bool& to_upper) {
                const Eigen::Index q = basis_[static_cast<std::size_t>(r)];
                const double d = sigma * w[r];
                if (d > ratio_tol_) {
                    t = std::max(0.0, (val_[q] - lo_[q]) / d);
                    to_upper = false;
                    return true;
                }
                if (d < -ratio_tol_ && std::isfinite(hi_[q])) {
                    t = std::max(0.0, (hi_[q] - val_[q]) / (-d));
                    to_upper = true;
                    return true;
                }
                return false;
            };
            double t_allow = hi_[enter] - lo_[enter];  // may be inf
            for (Eigen::Index r = 0; r < m_; ++r) {
                const Eigen::Index q = basis_[static_cast<std::size_t>(r)];
                const double d = sigma * w[r];
                double t_relaxed;
                if (d > ratio_tol_)
                    t_relaxed = (val_[q] - lo_[q] + allow) / d;
                else if (d < -ratio_tol_ && std::isfinite(hi_[q]))
                    t_relaxed = (hi_[q] - val_[q] + allow) / (-d);
                else
                    continue;
                t_allow = std::min(t_allow, std::max(0.0, t_relaxed));
            }
            if (!std::isfinite(t_allow))
                return {LpStatus::unbounded, 0.0, Eigen::VectorXd()};
            Eigen::Index leave_pos = -1;  // -1: entering flips to its far bound
            bool leave_to_upper = false;
            double best_pivot = 0.0, t_best = hi_[enter] - lo_[enter];
            for (Eigen::Index r = 0; r < m_; ++r) {
                double t;
                bool up;
                if (!strict_ratio(r, t, up) || t > t_allow) continue;
                const double mag = std::abs(w[r]);
                const Eigen::Index q = basis_[static_cast<std::size_t>(r)];
                if (mag > best_pivot ||
                    (mag == best_pivot && leave_pos >= 0 &&
                     q < basis_[static_cast<std::size_t>(leave_pos)])) {
                    best_pivot = mag;
                    leave_pos = r;
                    leave_to_upper = up;
                    t_best = t;
                }
            }
            const double t_own = hi_[enter] - lo_[enter];
            if (leave_pos >= 0 && t_own < t_best) leave_pos = -1;  // own bound blocks first
            if (leave_pos < 0) t_best = t_own;
            if (t_best > t_allow) t_best = t_allow;

            // apply the step incrementally to every basic variable
            if (t_best != 0.0)
                for (Eigen::Index r = 0; r < m_; ++r)
                    val_[basis_[static_cast<std::size_t>(r)]] -= t_best * sigma * w[r];
            if (leave_pos < 0) {
                state_[es] = state_[es] == AtLower ? AtUpper : AtLower;
                val_[enter] = state_[es] == AtLower ? lo_[enter] : hi_[enter];
            } else {
                const Eigen::Index q = basis_[static_cast<std::size_t>(leave_pos)];
                val_[enter] = (state_[es] == AtLower ? lo_[enter] : hi_[enter]) + sigma * t_best;
                state_[es] = Basic;
                basis_[static_cast<std::size_t>(leave_pos)] = enter;
                state_[static_cast<std::size_t>(q)] = leave_to_upper ? AtUpper : AtLower;
                val_[q] = leave_to_upper ? hi_[q] : lo_[q];  // snap off ratio-test dust
            }

            if (t_best <= degen_tol_) {
                if (++degenerate_run > 3 * static_cast<long>(nt_)) bland = true;
            } else {
                degenerate_run = 0;
                bland = false;
            }
        }
        throw std::runtime_error("solve_lp: iteration limit (cycling?)");
    }

    double rhs_scale() const { return m_ > 0 ? rhs_.cwiseAbs().maxCoeff() : 0.0; }

    void factorize(Eigen::MatrixXd& Binv) const {
        if (m_ == 0) return;
        Eigen::MatrixXd B(m_, m_);
        for (Eigen::Index r = 0; r < m_; ++r) B.col(r) = cols_.col(basis_[static_cast<std::size_t>(r)]);
        Binv = Eigen::PartialPivLU<Eigen::MatrixXd>(B).inverse();
    }

    Eigen::VectorXd gather_basic(const Eigen::VectorXd& cost) const {
        Eigen::VectorXd cb(m_);
        for (Eigen::Index r = 0; r < m_; ++r) cb[r] = cost[basis_[static_cast<std::size_t>(r)]];
        return cb;
    }

    // Post-solve contract checks: primal feasibility, bound respect,
    // complementary slackness and strong duality against the returned duals.
    void verify(const LpSolution& sol) const {
        const double scale = 1.0 + rhs_scale();
        for (Eigen::Index j = 0; j < n_; ++j) {
            const double pad = feas_tol_ * (scale + std::abs(val_[j]));
            if (val_[j] < lo_[j] - pad || val_[j] > hi_[j] + pad) {
                char msg[160];
                std::snprintf(msg, sizeof msg,
                              "solve_lp: bound violated at optimum (var %ld value %g bounds [%g, %g])",
                              static_cast<long>(j), val_[j], lo_[j], hi_[j]);
                throw std::logic_error(msg);
            }
        }
        Eigen::VectorXd row_val = Eigen::VectorXd::Zero(m_);
        for (Eigen::Index j = 0; j < n_; ++j)
            if (val_[j] != 0.0) row_val += cols_.col(j).head(m_) * val_[j];
        for (Eigen::Index r = 0; r < me_; ++r)
            if (std::abs(row_val[r] - rhs_[r]) > feas_tol_ * scale) {
                char msg[160];
                std::snprintf(msg, sizeof msg,
                              "solve_lp: equality row violated at optimum (row %ld residual %g)",
                              static_cast<long>(r), row_val[r] - rhs_[r]);
                throw std::logic_error(msg);
            }
        double dual_obj = sol.duals.dot(rhs_);
        for (Eigen::Index r = 0; r < mi_; ++r) {
            const double slack = rhs_[me_ + r] - row_val[me_ + r];
            if (slack < -feas_tol_ * scale)
                throw std::logic_error("solve_lp: inequality row violated at optimum");
            if (std::abs(sol.duals[me_ + r] * slack) >
                feas_tol_ * scale * (1.0 + std::abs(sol.duals[me_ + r])))
                throw std::logic_error("solve_lp: complementary slackness violated");
        }
        for (Eigen::Index j = 0; j < n_ + mi_; ++j) {
            if (state_[static_cast<std::size_t>(j)] == Basic) continue;
            const double c_j = j < n_ ? prob_.c[j] : 0.0;
            dual_obj += (c_j - sol.duals.dot(cols_.col(j))) * val_[j];
        }
        // tolerance anchored to the magnitude of the dual products being
        // cancelled; rows with small coefficients carry large duals and the
        // difference of O(|y||b|) terms cannot resolve below that scale
        const double dual_scale =
            1.0 + std::abs(sol.objective) +
            (m_ > 0 ? sol.duals.cwiseAbs().maxCoeff() * (1.0 + rhs_scale()) : 0.0);
        if (std::abs(dual_obj - sol.objective) > 1e-8 * dual_scale)
            throw std::logic_error("solve_lp: strong duality check failed");
    }

    const LpProblem& prob_;
    Eigen::Index n_ = 0, me_ = 0, mi_ = 0, m_ = 0, nt_ = 0;
    double col_scale_ = 1.0;
    Eigen::MatrixXd cols_;
    Eigen::VectorXd rhs_, lo_, hi_, val_;
    std::vector<Eigen::Index> basis_;
    std::vector<VarState> state_;

    static constexpr double feas_tol_ = 1e-9;
    static constexpr double pivot_tol_ = 1e-10;
    static constexpr double ratio_tol_ = 1e-10;
    static constexpr double degen_tol_ = 1e-12;
};

}  // namespace detail

inline LpSolution solve_lp(const LpProblem& p) {
    detail::Simplex s(p);
    return s.run();
}

}  // namespace wpt::lp
