#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "rsde/catalog.hpp"
#include "rsde/localtime.hpp"
#include "rsde/malliavin.hpp"

using namespace rsde;

namespace {

SpaceTimeIntegrand sine_integrand() {
    return {"sin", [](double, double z) { return std::sin(z); }, [](double, double z) { return std::cos(z); },
            GrowthClass::bounded};
}

}  // namespace

TEST_CASE("Hx norm of a constant") {
    const SpaceTimeIntegrand one{"one", [](double, double) { return 1.0; }, {}, GrowthClass::bounded};
    const auto h = hx_norm(one, 0.7, 2.0);
    CHECK(h.l2_term == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-10));
    CHECK(h.moment_term == doctest::Approx(std::sqrt(2 / std::numbers::pi) * 2.0).epsilon(1e-10));
    CHECK(h.finite);
    const auto lin = hx_norm(integrand_from_drift(ou_drift(-1.0)), 1.0);
    CHECK(lin.finite);
    CHECK(lin.value > 0);
}

TEST_CASE("derivative route of a linear integrand") {
    const TimeGrid g(0.0, 1.0, 100);
    std::vector<double> y(101, 0.3);
    const auto r = lt_via_derivative(integrand_from_drift(ou_drift(2.0)), y, g, 0.8, 0.2);
    CHECK(r.value == doctest::Approx(-2.0 * 0.6).epsilon(1e-12));
    CHECK(r.route == LocalTimeRoute::derivative_identity);
    CHECK(route_name(r.route) == "derivative-identity");
}

TEST_CASE("decomposition mean matches the Gaussian closed form") {
    // E[-int cos(x + B_s) ds] over [a, T] = -cos(x) 2 (e^{-a/2} - e^{-T/2}).
    const double x = 0.4, T = 0.5;
    const TimeGrid g(0.0, T, 5000);
    const BrownianEnsemble noise{g, 1, 21, 4000};
    const auto f = sine_integrand();
    std::vector<double> dec(noise.n_paths);
    for (std::size_t p = 0; p < noise.n_paths; ++p) dec[p] = lt_brownian(f, noise.path(p), x, T).value;
    const double a = kBoundaryBand * g.dt();
    const double exact = -std::cos(x) * 2 * (std::exp(-a / 2) - std::exp(-T / 2));
    const auto e = mc_estimate(dec);
    CHECK(std::abs(e.mean - exact) <= 3 * e.se);
}

TEST_CASE("decomposition agrees pathwise with the derivative route") {
    const double x = 2.0, T = 0.2;
    const TimeGrid g(0.0, T, 200000);
    const auto f = sine_integrand();
    for (std::size_t p = 0; p < 3; ++p) {
        const auto path = sample_brownian(g, 1, {22, p});
        std::vector<double> y(g.n_points());
        for (std::size_t k = 0; k < y.size(); ++k) y[k] = x + path.value(k, 0);
        const double band_t = kBoundaryBand * g.dt();
        const double dref = lt_via_derivative(f, y, g, T, band_t).value;
        const double dec = lt_brownian(f, path, x, T).value;
        CHECK(std::abs(dec - dref) <= 0.03 * std::abs(dref));
    }
}

TEST_CASE("solution driver recovers the noise direction") {
    const TimeGrid g(0.0, 1.0, 50);
    const auto path = sample_brownian(g, 2, {23, 0});
    const std::vector<double> sigma{3.0, 4.0};
    const auto p = make_problem(zero_drift(), zero_random_drift(), sigma, 1.0, g);
    const auto w = solution_driver(solve_path(p, path), g, 5.0);
    CHECK(w.dim() == 1);
    for (std::size_t k = 0; k <= 50; ++k)
        CHECK(w.value(k, 0) == doctest::Approx((3.0 * path.value(k, 0) + 4.0 * path.value(k, 1)) / 5.0));
}

TEST_CASE("sign calibration selects the minus sign") {
    const auto& c = localtime_sign_calibration();
    CHECK(c.sign == -1);
    CHECK(c.error_minus < 0.05);
    CHECK(c.error_plus > 10 * c.error_minus);
    CHECK(&c == &localtime_sign_calibration());
}

TEST_CASE("local-time Malliavin route matches the explicit one") {
    const double a = -0.7, T = 0.2;
    const TimeGrid g(0.0, T, 40000);
    const auto p = make_problem(ou_drift(a), tanh_b2(), {1.0}, 1.0, g);
    for (std::size_t q = 0; q < 3; ++q) {
        const auto path = sample_brownian(g, 1, {24, q});
        const auto x = solve_path(p, path);
        const double e = malliavin_explicit(p, path, x, 0.05, 0.2, 0);
        const double l = malliavin_localtime(p, path, x, 0.05, 0.2, 0);
        CHECK(std::abs(l - e) <= 0.03 * std::abs(e));
    }
    CHECK(malliavin_localtime(p, sample_brownian(g, 1, {24, 0}), solve_path(p, sample_brownian(g, 1, {24, 0})),
                              0.15, 0.1, 0) == 0.0);
}

TEST_CASE("local-time route rejects x-dependent random drift") {
    const TimeGrid g(0.0, 0.1, 100);
    const auto p = make_problem(ou_drift(-1.0), sinx_tanh_b2(), {1.0}, 0.0, g);
    const auto path = sample_brownian(g, 1, {25, 0});
    CHECK_THROWS_AS(malliavin_localtime(p, path, solve_path(p, path), 0.02, 0.08, 0), std::invalid_argument);
}

TEST_CASE("exponential local-time moment") {
    const auto c = analysis_constants(1.0, 1, {1.0}, 0.1);
    const auto f = sine_integrand();
    SUBCASE("small horizon is stable") {
        const TimeGrid g(0.0, c.small_horizon, 1000);
        const auto r = localtime_exp_moment(f, 1.0, 0.5, {g, 1, 26, 4000}, c);
        CHECK_FALSE(r.unstable);
        CHECK(r.full.mean > 0);
    }
    SUBCASE("long horizon is refused") {
        const TimeGrid g(0.0, 1.0, 100);
        CHECK_THROWS_AS(localtime_exp_moment(f, 1.0, 0.5, {g, 1, 26, 10}, c), std::invalid_argument);
    }
}

TEST_CASE("route CSV") {
    std::ostringstream os;
    write_route_csv(os, {{1.0}, {1.5}, {0.5}});
    CHECK(os.str() == "path_id,route_a,route_b,rel_err\n0,1,1.5,0.5\n");
}
