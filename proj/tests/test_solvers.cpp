#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "wpt/oracle.hpp"
#include "wpt/rng.hpp"
#include "wpt/solvers.hpp"

using namespace wpt;
using Catch::Approx;

namespace {

qp::QpProblem random_instance(Rng& rng, int n, bool swipt = false) {
    Eigen::VectorXd h(n), g(n);
    for (int i = 0; i < n; ++i) h[i] = 0.2 + 1.5 * rng.uniform();
    for (int i = 0; i < n; ++i) g[i] = 0.2 + 1.5 * rng.uniform();
    const harvester::ObjectiveCoeffs coeffs{0.5 + rng.uniform(), 0.5 + rng.uniform(), 0.0};
    const double P = 0.5 + rng.uniform();
    if (!swipt) return qp::build_qp(h, coeffs, P);
    const double p_sat = 0.2 + 0.4 * rng.uniform();
    return qp::build_qp(h, coeffs, P, std::make_pair(g, p_sat));
}

}  // namespace

TEST_CASE("variable bounds: budget row and single-tone multiplier", "[solvers]") {
    Eigen::VectorXd h = Eigen::VectorXd::Ones(3);
    const auto p = qp::build_qp(h, {1.0, 1.0, 0.0}, 1.0);
    const auto B = solvers::variable_bounds(p);
    REQUIRE(B.u.isApproxToConstant(2.0, 1e-15));

    Eigen::VectorXd h1 = Eigen::VectorXd::Ones(1);
    const double c2 = 0.9, c4 = 1.1, P = 0.7;
    const auto p1 = qp::build_qp(h1, {c2, c4, 0.0}, P);
    const auto B1 = solvers::variable_bounds(p1);
    const double q = 0.75 * c4, f = 0.5 * c2;
    REQUIRE(B1.mu_max[0] == Approx(q * 2.0 * P + f));
    const Solution sol = qp::enumerate_kkt_oracle(p1);
    REQUIRE(sol.mu[0] <= B1.mu_max[0] + 1e-12);
}

TEST_CASE("variable bounds dominate the oracle multipliers", "[solvers]") {
    Rng rng(90210);
    for (int trial = 0; trial < 100; ++trial) {
        const bool swipt = trial % 2 == 1;
        const auto p = random_instance(rng, 4, swipt);
        const auto B = solvers::variable_bounds(p);
        const Solution sol = qp::enumerate_kkt_oracle(p);
        for (int i = 0; i < 4; ++i) {
            REQUIRE(sol.x[i] <= B.u[i] + 1e-9);
            REQUIRE(sol.lambda[i] <= B.v[i] + 1e-9);
        }
        for (Eigen::Index k = 0; k < p.rows(); ++k)
            REQUIRE(sol.mu[k] <= B.mu_max[k] + 1e-9);
    }
}

TEST_CASE("branch and bound: closed forms at N = 1 and flat N = 2", "[solvers]") {
    Eigen::VectorXd h1(1);
    h1 << 0.9;
    const auto p1 = qp::build_qp(h1, {1.0, 2.0, 0.0}, 0.6);
    const Solution s1 = solvers::solve_bb(p1);
    REQUIRE(s1.x[0] == Approx(1.2).margin(1e-10));
    REQUIRE(s1.method == "bb");

    Eigen::VectorXd h2 = Eigen::VectorXd::Ones(2);
    const auto p2 = qp::build_qp(h2, {1.0, 1.0, 0.0}, 1.0);
    const Solution s2 = solvers::solve_bb(p2);
    REQUIRE(s2.x[0] == Approx(1.0).margin(1e-9));
    REQUIRE(s2.x[1] == Approx(1.0).margin(1e-9));
}

TEST_CASE("implicit enumeration: tiny pattern count at N = 1", "[solvers]") {
    Eigen::VectorXd h(1);
    h << 1.0;
    const auto p = qp::build_qp(h, {1.0, 1.0, 0.0}, 0.5);
    const Solution s = solvers::solve_milp_kkt(p);
    REQUIRE(s.x[0] == Approx(1.0).margin(1e-10));
    REQUIRE(s.stats.nodes_explored <= 4);  // complete (z, zeta) patterns
    REQUIRE(s.stats.lps_solved <= 7);
    REQUIRE(s.method == "milp");
}

TEST_CASE("both solvers match the oracle on random instances", "[solvers]") {
    Rng rng(55501);
    for (int trial = 0; trial < 40; ++trial) {
        const bool swipt = trial % 2 == 1;
        const auto p = random_instance(rng, 6, swipt);
        const Solution oracle = qp::enumerate_kkt_oracle(p);
        const Solution bb = solvers::solve_bb(p);
        const Solution milp = solvers::solve_milp_kkt(p);
        REQUIRE(bb.objective == Approx(oracle.objective).epsilon(1e-8));
        REQUIRE(milp.objective == Approx(oracle.objective).epsilon(1e-8));
        REQUIRE(bb.kkt_residual <= 1e-8);
        REQUIRE(milp.kkt_residual <= 1e-8);
    }
}

TEST_CASE("linearized and quadratic objectives agree at returned points", "[solvers]") {
    Rng rng(8128);
    for (int trial = 0; trial < 25; ++trial) {
        const auto p = random_instance(rng, 5, trial % 2 == 1);
        const Solution s = solvers::solve_milp_kkt(p);
        const double linearized = 0.5 * (p.f.dot(s.x) + p.b.dot(s.mu));
        REQUIRE(linearized == Approx(s.objective).epsilon(1e-9));
    }
}

TEST_CASE("node bounds never increase from parent to child", "[solvers]") {
    Rng rng(424242);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = random_instance(rng, 6, trial % 2 == 1);
        std::vector<std::pair<double, double>> trace;
        solvers::SolverOptions opts;
        opts.bound_trace = &trace;
        solvers::solve_bb(p, opts);
        for (const auto& [parent, child] : trace)
            REQUIRE(child <= parent + 1e-9 * (1.0 + std::abs(parent)));
    }
}

TEST_CASE("node limit raises an error carrying the incumbent", "[solvers]") {
    Rng rng(1007);
    const auto p = random_instance(rng, 8);
    solvers::SolverOptions opts;
    opts.node_limit = 2;
    REQUIRE_THROWS_AS(solvers::solve_bb(p, opts), solvers::NodeLimitError);
    try {
        solvers::solve_bb(p, opts);
    } catch (const solvers::NodeLimitError& e) {
        REQUIRE(e.gap() >= 0.0);
    }
}

TEST_CASE("baseline allocations spend the budget exactly", "[solvers]") {
    Eigen::VectorXd h(2);
    h << 1.0, 1.0;
    const Eigen::VectorXd equal = solvers::baseline_alloc(solvers::Baseline::equal, h, 1.0);
    REQUIRE(equal[0] == Approx(1.0));
    REQUIRE(equal[1] == Approx(1.0));

    const Eigen::VectorXd mrt = solvers::baseline_alloc(solvers::Baseline::mrt, h, 1.0);
    REQUIRE(mrt.isApprox(equal, 1e-15));

    Eigen::VectorXd hs(2);
    hs << 0.5, 1.0;
    const Eigen::VectorXd single = solvers::baseline_alloc(solvers::Baseline::single, hs, 1.0);
    REQUIRE(single[0] == 0.0);
    REQUIRE(single[1] == Approx(std::sqrt(2.0)));

    Rng rng(33);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform() * 8);
        Eigen::VectorXd hr(n);
        for (int i = 0; i < n; ++i) hr[i] = 0.1 + rng.uniform();
        const double P = 0.2 + rng.uniform();
        for (auto kind :
             {solvers::Baseline::equal, solvers::Baseline::mrt, solvers::Baseline::single}) {
            const Eigen::VectorXd s = solvers::baseline_alloc(kind, hr, P);
            REQUIRE(0.5 * s.squaredNorm() == Approx(P).epsilon(1e-12));
        }
    }
}

TEST_CASE("evaluate_allocation flags infeasible points instead of scaling", "[solvers]") {
    Eigen::VectorXd h = Eigen::VectorXd::Ones(2), g(2);
    g << 1.0, 0.1;
    const auto p = qp::build_qp(h, {1.0, 1.0, 0.0}, 1.0, std::make_pair(g, 0.05));
    const Eigen::VectorXd equal = solvers::baseline_alloc(solvers::Baseline::equal, h, 1.0);
    const auto ev = solvers::evaluate_allocation(equal, p);
    REQUIRE_FALSE(ev.feasible);
    REQUIRE(ev.violated_row == 1);

    const auto p_free = qp::build_qp(h, {1.0, 1.0, 0.0}, 1.0);
    const auto ok = solvers::evaluate_allocation(equal, p_free);
    REQUIRE(ok.feasible);
    REQUIRE(ok.violated_row == -1);
}

TEST_CASE("global optimum dominates every feasible baseline", "[solvers]") {
    Rng rng(606);
    for (int trial = 0; trial < 30; ++trial) {
        const auto p = random_instance(rng, 7);
        const Solution best = solvers::solve_bb(p);
        for (auto kind :
             {solvers::Baseline::equal, solvers::Baseline::mrt, solvers::Baseline::single}) {
            const Eigen::VectorXd s = solvers::baseline_alloc(kind, p.h_eff, p.P);
            const auto ev = solvers::evaluate_allocation(s, p);
            REQUIRE(ev.feasible);
            REQUIRE(ev.objective <= best.objective + 1e-9 * (1.0 + std::abs(best.objective)));
        }
        const Solution oracle = qp::enumerate_kkt_oracle(p);
        REQUIRE(oracle.objective >= best.objective - 1e-9 * (1.0 + std::abs(best.objective)));
    }
}

TEST_CASE("equal split is optimal on a flat channel and matches the solver", "[solvers]") {
    Eigen::VectorXd h = Eigen::VectorXd::Ones(4);
    const auto p = qp::build_qp(h, {0.6, 1.4, 0.0}, 2.0);
    const Solution bb = solvers::solve_bb(p);
    const Eigen::VectorXd equal = solvers::baseline_alloc(solvers::Baseline::equal, h, 2.0);
    const auto ev = solvers::evaluate_allocation(equal, p);
    REQUIRE(ev.objective == Approx(bb.objective).epsilon(1e-12));
}

TEST_CASE("sorted channel gains give sorted allocations", "[solvers]") {
    Rng rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        const auto p = random_instance(rng, 6);
        const Solution s = solvers::solve_bb(p);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                if (p.h_eff[i] > p.h_eff[j]) REQUIRE(s.x[i] >= s.x[j] - 1e-9);
    }
}

TEST_CASE("a slack received-power row reproduces the unconstrained optimum", "[solvers]") {
    Rng rng(777);
    for (int trial = 0; trial < 20; ++trial) {
        const auto base = random_instance(rng, 5);
        Eigen::VectorXd g(5);
        for (int i = 0; i < 5; ++i) g[i] = 0.2 + rng.uniform();
        // 2 P_sat >= max_i g_i^2 * 2P makes the row slack for every feasible x
        const double p_sat = 1.01 * g.array().square().maxCoeff() * base.P;
        const auto capped =
            qp::build_qp(base.h_eff, base.coeffs, base.P, std::make_pair(g, p_sat));
        const Solution a = solvers::solve_bb(base);
        const Solution b = solvers::solve_bb(capped);
        REQUIRE(b.objective == Approx(a.objective).epsilon(1e-10));
    }
}
