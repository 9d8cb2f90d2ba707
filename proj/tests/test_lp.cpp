#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "wpt/lp.hpp"
#include "wpt/rng.hpp"

using namespace wpt;
using Catch::Approx;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("lp: single bounded variable", "[lp]") {
    auto p = lp::LpProblem::sized(1, 0, 1);
    p.c[0] = 1.0;
    p.ineq_a(0, 0) = 1.0;
    p.ineq_b[0] = 3.0;
    const auto s = lp::solve_lp(p);
    REQUIRE(s.status == lp::LpStatus::optimal);
    REQUIRE(s.x[0] == Approx(3.0));
    REQUIRE(s.objective == Approx(3.0));
    REQUIRE(s.duals[0] == Approx(1.0));  // shadow price of the row
}

TEST_CASE("lp: degenerate tie resolved deterministically", "[lp]") {
    auto p = lp::LpProblem::sized(2, 0, 1);
    p.c << 1.0, 1.0;
    p.ineq_a << 1.0, 1.0;
    p.ineq_b[0] = 1.0;
    const auto s = lp::solve_lp(p);
    REQUIRE(s.status == lp::LpStatus::optimal);
    REQUIRE(s.objective == Approx(1.0));
    REQUIRE(s.x[0] == Approx(1.0));  // lowest-index entering rule
    REQUIRE(s.x[1] == Approx(0.0));
}

TEST_CASE("lp: infeasible and unbounded detection", "[lp]") {
    auto inf = lp::LpProblem::sized(1, 0, 1);
    inf.c[0] = 1.0;
    inf.ineq_a(0, 0) = 1.0;
    inf.ineq_b[0] = -1.0;  // x <= -1 with x >= 0
    REQUIRE(lp::solve_lp(inf).status == lp::LpStatus::infeasible);

    auto unb = lp::LpProblem::sized(1, 0, 0);
    unb.c[0] = 1.0;  // max x, x in [0, inf)
    REQUIRE(lp::solve_lp(unb).status == lp::LpStatus::unbounded);
}

TEST_CASE("lp: equality rows and upper bounds", "[lp]") {
    // max x1 + 2 x2, x1 + x2 = 1, x2 <= 0.4
    auto p = lp::LpProblem::sized(2, 1, 0);
    p.c << 1.0, 2.0;
    p.eq_a << 1.0, 1.0;
    p.eq_b[0] = 1.0;
    p.upper[1] = 0.4;
    const auto s = lp::solve_lp(p);
    REQUIRE(s.status == lp::LpStatus::optimal);
    REQUIRE(s.x[0] == Approx(0.6));
    REQUIRE(s.x[1] == Approx(0.4));
    REQUIRE(s.objective == Approx(1.4));
}

TEST_CASE("lp: negative lower bounds", "[lp]") {
    // max -x subject to x >= -2  ->  x = -2
    auto p = lp::LpProblem::sized(1, 0, 0);
    p.c[0] = -1.0;
    p.lower[0] = -2.0;
    p.upper[0] = 5.0;
    const auto s = lp::solve_lp(p);
    REQUIRE(s.status == lp::LpStatus::optimal);
    REQUIRE(s.x[0] == Approx(-2.0));
}

TEST_CASE("lp: determinism on repeated solves", "[lp]") {
    Rng rng(4711);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform() * 6);
        const int mi = 1 + static_cast<int>(rng.uniform() * 3);
        auto p = lp::LpProblem::sized(n, 0, mi);
        for (int j = 0; j < n; ++j) p.c[j] = rng.uniform() - 0.25;
        for (int r = 0; r < mi; ++r) {
            for (int j = 0; j < n; ++j) p.ineq_a(r, j) = rng.uniform();
            p.ineq_b[r] = 1.0 + rng.uniform();
        }
        for (int j = 0; j < n; ++j) p.upper[j] = 0.5 + 2.0 * rng.uniform();
        const auto a = lp::solve_lp(p);
        const auto b = lp::solve_lp(p);
        REQUIRE(a.status == lp::LpStatus::optimal);
        REQUIRE(b.status == lp::LpStatus::optimal);
        REQUIRE(a.x == b.x);  // identical bases, bit-identical result
        REQUIRE(a.objective == b.objective);
    }
}

TEST_CASE("lp: random feasible instances satisfy the optimality contract", "[lp]") {
    // feasibility, complementary slackness and strong duality are asserted
    // inside solve_lp; this exercises them across shapes, including mixed
    // equality/inequality systems scaled like the solver node problems
    Rng rng(271828);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 3 + static_cast<int>(rng.uniform() * 5);
        const int me = static_cast<int>(rng.uniform() * 2);
        const int mi = 1 + static_cast<int>(rng.uniform() * 3);
        auto p = lp::LpProblem::sized(n, me, mi);
        const double scale = trial % 2 == 0 ? 1.0 : 1e-5;
        Eigen::VectorXd x0(n);
        for (int j = 0; j < n; ++j) x0[j] = rng.uniform();
        for (int j = 0; j < n; ++j) p.c[j] = scale * (rng.uniform() - 0.5);
        for (int r = 0; r < me; ++r) {
            for (int j = 0; j < n; ++j) p.eq_a(r, j) = scale * (rng.uniform() - 0.3);
            p.eq_b[r] = p.eq_a.row(r).dot(x0);  // feasible by construction
        }
        for (int r = 0; r < mi; ++r) {
            for (int j = 0; j < n; ++j) p.ineq_a(r, j) = scale * rng.uniform();
            p.ineq_b[r] = p.ineq_a.row(r).dot(x0) + 0.1 * scale;
        }
        for (int j = 0; j < n; ++j) p.upper[j] = 1.0 + rng.uniform();
        const auto s = lp::solve_lp(p);
        REQUIRE(s.status == lp::LpStatus::optimal);
        REQUIRE(s.objective >= p.c.dot(x0) - 1e-9 * (1.0 + std::abs(s.objective)));
    }
}
