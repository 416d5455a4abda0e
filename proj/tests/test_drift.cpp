#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "rsde/catalog.hpp"
#include "rsde/drift.hpp"

using namespace rsde;

namespace {

// Independent reference for the bump convolution: double-exponential quadrature
// of b(x - eps y) rho(y) with rho normalized by the same rule.
double reference_mollified(const DeterministicDrift& b, double x, int n) {
    boost::math::quadrature::tanh_sinh<double> ts;
    const double eps = 1.0 / n;
    auto rho = [](double y) { return std::exp(-1.0 / (1.0 - y * y)); };
    const double z = ts.integrate(rho, -1.0, 1.0);
    auto g = [&](double y) { return b.eval(0.0, x - eps * y) * rho(y) / z; };
    // split at breakpoints so the discontinuity sits on a panel edge
    std::vector<double> cuts{-1.0};
    for (double bp : b.breakpoints) {
        const double y = (x - bp) / eps;
        if (y > -1 && y < 1) cuts.push_back(y);
    }
    cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());
    double total = 0;
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) total += ts.integrate(g, cuts[j], cuts[j + 1]);
    return total;
}

}  // namespace

TEST_CASE("mollifying zero gives zero at every level") {
    for (int n : {1, 10, 100, 1000}) {
        const auto m = mollify(zero_drift(), n);
        for (double x : {-3.0, 0.0, 0.7, 50.0}) {
            CHECK(m.eval(0, x) == 0.0);
            CHECK(m.eval_dx(0, x) == 0.0);
        }
    }
}

TEST_CASE("mollified linear and sign drifts") {
    const auto lin = mollify(ou_drift(1.0), 100);
    CHECK(std::abs(lin.eval(0, 0.5) - 0.5) < 1e-2);
    CHECK(std::abs(lin.eval(0, 0.5) - reference_mollified(ou_drift(1.0), 0.5, 100)) < 1e-10);
    CHECK(lin.eval_dx(0, 0.5) == doctest::Approx(1.0).epsilon(1e-8));

    const auto sgn = mollify(sign_drift(-1.0), 1000);  // b1 = sign(x)
    CHECK(std::abs(sgn.eval(0, 1.0) - 1.0) < 1e-2);
    for (double x : {-4e-4, 0.0, 3e-4, 9e-4})
        CHECK(sgn.eval(0, x) == doctest::Approx(reference_mollified(sign_drift(-1.0), x, 1000)).epsilon(1e-9));
}

TEST_CASE("mollified derivative matches a difference quotient") {
    const auto m = mollify(sign_drift(), 10);
    for (double x : {-0.07, -0.01, 0.0, 0.03, 0.09, 10.5}) {
        const double h = 1e-6;
        const double fd = (m.eval(0, x + h) - m.eval(0, x - h)) / (2 * h);
        CHECK(m.eval_dx(0, x) == doctest::Approx(fd).epsilon(1e-5).scale(1));
    }
    double slope;
    const double v = m.value_and_slope(0, 0.02, &slope);
    CHECK(v == m.eval(0, 0.02));
    CHECK(slope == m.eval_dx(0, 0.02));
}

TEST_CASE("cutoff switches off outside the radius") {
    const auto m = mollify(constant_drift(2.0), 3);
    CHECK(m.eval(0, 2.9) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(m.eval(0, 4.0) == 0.0);
    CHECK(m.eval(0, -4.5) == 0.0);
    const double mid = m.eval(0, 3.5);
    CHECK(mid > 0);
    CHECK(mid < 2.0);
}

TEST_CASE("mollification preserves linear growth up to one") {
    const SampleBox box{0, 1, -10, 10, 3, 401};
    for (const auto& b : {sign_drift(), step_drift(1.5, -0.5, 0.3), ou_drift(-2.0), sine_drift(), constant_drift(1.0)}) {
        const double norm = linear_growth_norm(b, box);
        for (int n : {1, 10, 100}) {
            const auto m = mollify(b, n);
            for (std::size_t j = 0; j < 401; ++j) {
                const double x = -10 + 0.05 * j;
                CHECK(std::abs(m.eval(0, x)) <= norm * (1 + std::abs(x)) + 1.0);
            }
        }
    }
}

TEST_CASE("mollified sign converges away from the jump") {
    double prev = INFINITY;
    for (int n : {10, 100, 1000}) {
        const auto m = mollify(sign_drift(), n);
        double worst = 0;
        for (std::size_t j = 0; j <= 2000; ++j) {
            const double x = 2.0 / n + (5.0 - 2.0 / n) * j / 2000.0;
            worst = std::max({worst, std::abs(m.eval(0, x) + 1.0), std::abs(m.eval(0, -x) - 1.0)});
        }
        CHECK(worst <= prev);
        prev = worst;
    }
    CHECK(prev < 1e-12);
}

TEST_CASE("linear growth norm") {
    const SampleBox box{0, 1, -10, 10, 2, 1001};
    CHECK(linear_growth_norm(zero_drift(), box) == 0.0);
    CHECK(linear_growth_norm(growth_drift(1.7), box) == doctest::Approx(1.7));
    CHECK(linear_growth_norm(sine_drift(), box) <= 1.0);
    CHECK_THROWS(linear_growth_norm(zero_drift(), SampleBox{0, 1, 1, 1, 2, 10}));
}

TEST_CASE("catalog lookups") {
    const auto& cat = builtin_drifts();
    for (const char* key : {"zero", "constant", "ou", "sign", "step"}) CHECK(cat.has_b1(key));
    for (const char* key : {"zero", "tanh-b2", "wiener-integral-b2"}) CHECK(cat.has_b2(key));
    CHECK(cat.make_b1("zero").eval(0.3, 5.0) == 0.0);
    CHECK(cat.make_b1("ou", {{"a", 2.0}}).eval(0, 1.5) == 3.0);
    CHECK(cat.make_b1("ou", {{"a", 2.0}, {"cap", 1.0}}).eval(0, 1.5) == 2.0);
    CHECK_THROWS_AS(cat.make_b1("nope"), std::invalid_argument);
    CHECK_THROWS_AS(cat.make_b1("sign", {{"bogus", 1.0}}), std::invalid_argument);
}

TEST_CASE("random drifts") {
    const TimeGrid g(0.0, 1.0, 100);
    const auto path = sample_brownian(g, 1, {9, 0});

    SUBCASE("Wiener integral with alpha 1 is B_t with derivative 1_{s<=t}") {
        const auto b2 = wiener_integral_b2(1.0);
        for (std::size_t k : {0u, 17u, 100u}) CHECK(b2.eval(g.time(k), 3.0, path) == doctest::Approx(path.value(k, 0)).epsilon(1e-14));
        CHECK(b2.malliavin_eval(0.2, 0.5, 0.0, path, 0) == 1.0);
        CHECK(b2.malliavin_eval(0.5, 0.5, 0.0, path, 0) == 1.0);
        CHECK(b2.malliavin_eval(0.6, 0.5, 0.0, path, 0) == 0.0);
        CHECK(b2.x_independent());
    }
    SUBCASE("tanh bound is value plus derivative bound") {
        const auto b2 = tanh_b2();
        CHECK(b2.m2_bound(path) == 2.0);
        CHECK(b2.m2_tilde_bound(0.0, 1.0, path) == 1.0);
        const double v = b2.eval(0.5, 0.0, path);
        CHECK(v == doctest::Approx(std::tanh(path.value(50, 0))));
        CHECK(b2.malliavin_eval(0.3, 0.5, 0.0, path, 0) == doctest::Approx(1.0 / std::pow(std::cosh(path.value(50, 0)), 2)));
    }
    SUBCASE("bounds hold on the sampled box") {
        for (const auto& b2 : {tanh_b2(), sinx_tanh_b2(0.8)}) {
            auto bound = b2.bind(path);
            const double m2 = bound->m2_bound();
            for (std::size_t k = 0; k <= 100; k += 5)
                for (double x = -10; x <= 10; x += 0.5) {
                    CHECK(std::abs(bound->eval(k, x)) + std::abs(bound->eval_dx(k, x)) <= m2 + 1e-15);
                    CHECK(std::abs(bound->malliavin(k / 2, k, x, 0)) <= bound->m2_tilde_bound(0, 100) + 1e-15);
                }
        }
    }
    SUBCASE("adaptedness: the future of the path is never read") {
        for (const auto& b2 : {tanh_b2(), wiener_integral_b2(0.7), sinx_tanh_b2()}) {
            for (std::size_t k : {0u, 30u, 99u}) {
                std::vector<double> inc(path.increments().begin(), path.increments().end());
                for (std::size_t j = k; j < inc.size(); ++j) inc[j] = 0.0;
                const BrownianPath cut(g, 1, inc);
                CHECK(b2.eval(g.time(k), 0.4, cut) == b2.eval(g.time(k), 0.4, path));
                CHECK(b2.malliavin_eval(g.time(k / 2), g.time(k), 0.4, cut, 0) ==
                      b2.malliavin_eval(g.time(k / 2), g.time(k), 0.4, path, 0));
            }
        }
    }
}
