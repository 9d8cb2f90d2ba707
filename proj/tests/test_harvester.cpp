#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "wpt/harvester.hpp"
#include "wpt/rng.hpp"

using namespace wpt;
using Catch::Approx;

TEST_CASE("diode Taylor coefficients", "[harvester]") {
    const harvester::DiodeParams p{5e-6, 25.86e-3, 1.05, 50.0};
    const auto k = harvester::taylor_coeffs(p);
    REQUIRE(k.k2 == Approx(3.391e-3).epsilon(1e-3));
    REQUIRE(k.k4 == Approx(0.3833).epsilon(1e-3));

    const harvester::DiodeParams unit{2.0, 1.0, 1.0, 1.0};
    const auto ku = harvester::taylor_coeffs(unit);
    REQUIRE(ku.k2 == Approx(1.0));
    REQUIRE(ku.k4 == Approx(1.0 / 12.0));

    // ratio identity k4/k2 = 1/(12 (gamma v_t)^2)
    const double gv = p.gamma * p.v_t;
    REQUIRE(k.k4 / k.k2 == Approx(1.0 / (12.0 * gv * gv)).epsilon(1e-12));

    REQUIRE_THROWS_AS(harvester::taylor_coeffs({0.0, 1.0, 1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("taylor coefficients decrease in gamma*v_t", "[harvester]") {
    double prev_k2 = 1e300, prev_k4 = 1e300;
    for (double gv = 0.01; gv < 0.2; gv += 0.01) {
        const auto k = harvester::taylor_coeffs({5e-6, gv, 1.0, 50.0});
        REQUIRE(k.k2 > 0.0);
        REQUIRE(k.k4 > 0.0);
        REQUIRE(k.k2 < prev_k2);
        REQUIRE(k.k4 < prev_k4);
        prev_k2 = k.k2;
        prev_k4 = k.k4;
    }
}

TEST_CASE("model_coeffs maps the optimizable models and rejects the rest", "[harvester]") {
    const auto diode = harvester::model_coeffs(harvester::DiodeTaylor{1.0, 1.0, 2.0});
    REQUIRE(diode.c2 == Approx(2.0));
    REQUIRE(diode.c4 == Approx(4.0));
    REQUIRE(diode.offset == 0.0);

    const auto poly = harvester::model_coeffs(harvester::Poly2{0.5, 2.0, -0.1});
    REQUIRE(poly.c2 == Approx(2.0));
    REQUIRE(poly.c4 == Approx(0.5));
    REQUIRE(poly.offset == Approx(-0.1));

    REQUIRE_THROWS_WITH(harvester::model_coeffs(harvester::Sigmoid{1.0, 1.0, 1.0}),
                        Catch::Matchers::ContainsSubstring("not reducible"));
    REQUIRE_THROWS_AS(harvester::model_coeffs(harvester::RationalSimplified{1.0, 1.0, 1.0}),
                      std::invalid_argument);
}

TEST_CASE("fit_poly2 interpolates exact quadratics and lines", "[harvester]") {
    std::vector<std::pair<double, double>> quad;
    for (double x : {0.0, 0.5, 1.0, 2.0, 3.0}) quad.emplace_back(x, 2.0 * x * x + 3.0 * x - 1.0);
    const auto q = harvester::fit_poly2(quad);
    REQUIRE(q.beta1 == Approx(2.0).margin(1e-10));
    REQUIRE(q.beta2 == Approx(3.0).margin(1e-10));
    REQUIRE(q.beta3 == Approx(-1.0).margin(1e-10));

    std::vector<std::pair<double, double>> line;
    for (double x : {1.0, 2.0, 4.0, 8.0}) line.emplace_back(x, 3.0 * x);
    const auto l = harvester::fit_poly2(line);
    REQUIRE(l.beta1 == Approx(0.0).margin(1e-10));
    REQUIRE(l.beta2 == Approx(3.0).margin(1e-10));
    REQUIRE(l.beta3 == Approx(0.0).margin(1e-10));
}

TEST_CASE("fit_poly2 rejects deficient designs", "[harvester]") {
    REQUIRE_THROWS(harvester::fit_poly2({{1.0, 1.0}, {2.0, 2.0}}));
    REQUIRE_THROWS_WITH(harvester::fit_poly2({{1.0, 1.0}, {1.0, 2.0}, {2.0, 2.0}, {2.0, 1.0}}),
                        Catch::Matchers::ContainsSubstring("distinct"));
}

TEST_CASE("fit_poly2 recovers a noisy quadratic within three standard errors", "[harvester]") {
    Rng rng(77);
    const double b1 = 2.0, b2 = 3.0, b3 = -1.0, sigma = 1e-3;
    std::vector<std::pair<double, double>> pts;
    const int n = 100;
    for (int i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / (n - 1);
        pts.emplace_back(x, b1 * x * x + b2 * x + b3 + sigma * rng.normal());
    }
    const auto fit = harvester::fit_poly2(pts);

    // standard errors from sigma^2 (X'X)^-1 of the unscaled design
    Eigen::Matrix3d xtx = Eigen::Matrix3d::Zero();
    for (const auto& [x, y] : pts) {
        Eigen::Vector3d row(x * x, x, 1.0);
        xtx += row * row.transpose();
    }
    const Eigen::Matrix3d cov = sigma * sigma * xtx.inverse();
    REQUIRE(std::abs(fit.beta1 - b1) <= 3.0 * std::sqrt(cov(0, 0)));
    REQUIRE(std::abs(fit.beta2 - b2) <= 3.0 * std::sqrt(cov(1, 1)));
    REQUIRE(std::abs(fit.beta3 - b3) <= 3.0 * std::sqrt(cov(2, 2)));
}

TEST_CASE("fit_poly2 residual is locally optimal", "[harvester]") {
    Rng rng(123);
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 25; ++i) {
        const double x = 0.1 * i;
        pts.emplace_back(x, 0.7 * x * x - 0.2 * x + 0.05 + 0.01 * rng.normal());
    }
    const auto fit = harvester::fit_poly2(pts);
    auto rss = [&](double a, double b, double c) {
        double s = 0.0;
        for (const auto& [x, y] : pts) {
            const double r = y - (a * x * x + b * x + c);
            s += r * r;
        }
        return s;
    };
    const double best = rss(fit.beta1, fit.beta2, fit.beta3);
    for (int trial = 0; trial < 1000; ++trial) {
        const double da = 1e-3 * rng.normal(), db = 1e-3 * rng.normal(), dc = 1e-3 * rng.normal();
        REQUIRE(best <= rss(fit.beta1 + da, fit.beta2 + db, fit.beta3 + dc) + 1e-15);
    }
}

TEST_CASE("eval_model zeros at zero input and exact quadratic evaluation", "[harvester]") {
    const harvester::HarvesterModel sig = harvester::Sigmoid{1500.0, 0.0022, 0.024};
    REQUIRE(harvester::eval_model(sig, 0.0) == Approx(0.0).margin(1e-15));

    const harvester::HarvesterModel rs = harvester::RationalSimplified{0.5, 0.3, 1.2};
    REQUIRE(harvester::eval_model(rs, 0.0) == Approx(0.0).margin(1e-15));

    const harvester::HarvesterModel poly = harvester::Poly2{1.5, -0.2, -0.3};
    REQUIRE(harvester::eval_model_raw(poly, 2.0) == Approx(1.5 * 4.0 - 0.4 - 0.3));
    REQUIRE(harvester::eval_model(poly, 0.0) == 0.0);  // clamped from -0.3

    const harvester::HarvesterModel rat = harvester::Rational{1.0, 2.0, 3.0, 1.0, 1.0, 1.0, 1.0};
    REQUIRE(harvester::eval_model(rat, 0.0) == 0.0);
}

TEST_CASE("sigmoid saturates at pi3 and is monotone", "[harvester]") {
    const double pi1 = 1500.0, pi2 = 0.0022, pi3 = 0.024;
    const harvester::HarvesterModel sig = harvester::Sigmoid{pi1, pi2, pi3};
    REQUIRE(harvester::eval_model(sig, 1e6 * pi2) == Approx(pi3).epsilon(1e-9));
    double prev = -1.0;
    for (int i = 0; i <= 100; ++i) {
        const double v = harvester::eval_model(sig, 0.01 * pi2 * i * 10.0);
        REQUIRE(v >= prev - 1e-15);
        prev = v;
    }
}

TEST_CASE("rational simplified pole detection", "[harvester]") {
    const harvester::HarvesterModel rs = harvester::RationalSimplified{-1.0, 0.3, 1.2};
    REQUIRE_THROWS_WITH(harvester::eval_model(rs, 1.0), Catch::Matchers::ContainsSubstring("pole"));
    const harvester::HarvesterModel rs0 = harvester::RationalSimplified{0.0, 0.3, 1.2};
    REQUIRE_THROWS_AS(harvester::eval_model(rs0, 1.0), std::invalid_argument);
}

TEST_CASE("harvester sample csv ingestion", "[harvester]") {
    std::stringstream ss("p_in_w,p_out_w\n1e-6,2e-7\n2e-6,5e-7\n");
    const auto samples = harvester::read_samples_csv(ss);
    REQUIRE(samples.size() == 2);
    REQUIRE(samples[0].first == Approx(1e-6));
    REQUIRE(samples[1].second == Approx(5e-7));

    std::stringstream bad("pin,pout\n1,2\n");
    REQUIRE_THROWS_WITH(harvester::read_samples_csv(bad),
                        Catch::Matchers::ContainsSubstring("header"));
}
