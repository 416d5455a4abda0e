#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rsde/catalog.hpp"
#include "rsde/girsanov.hpp"

using namespace rsde;

namespace {

bool within(const Estimate& e, double target, double k = 3.0) { return std::abs(e.mean - target) <= k * e.se; }

}  // namespace

TEST_CASE("kernel reproduces the drift through sigma") {
    const GirsanovKernel k(zero_drift(), zero_random_drift(), {0.5, -1.0, 2.0});
    std::vector<double> u(3);
    k.components(1.7, u);
    CHECK(0.5 * u[0] - 1.0 * u[1] + 2.0 * u[2] == doctest::Approx(1.7).epsilon(1e-14));
    CHECK_THROWS_AS(GirsanovKernel(zero_drift(), zero_random_drift(), {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("constant drift weight has closed form") {
    const TimeGrid g(0.0, 1.0, 200);
    const auto path = sample_brownian(g, 1, {2, 5});
    const double c = 0.8, s = 1.3;
    const auto p = make_problem(constant_drift(c), zero_random_drift(), {s}, 0.0, g);
    const auto ws = weak_sample(p, path);
    for (std::size_t k = 0; k <= 200; ++k) {
        const double expect = (c / s) * path.value(k, 0) - 0.5 * (c * c / (s * s)) * g.time(k);
        CHECK(ws.weight.log_z[k] == doctest::Approx(expect).epsilon(1e-12));
        CHECK(ws.x[k] == doctest::Approx(s * path.value(k, 0)).epsilon(1e-14));
    }
    const auto d = doleans_exponential(girsanov_kernel(p), path, ws.x);
    CHECK(d.log_z == ws.weight.log_z);
    CHECK(ws.weight.path_id == 5);
}

TEST_CASE("weights are martingales") {
    const TimeGrid g(0.0, 0.5, 100);
    const BrownianEnsemble noise{g, 2, 9, 40000};
    const std::vector<double> sigma{1.0, 0.5};
    for (const auto& p : {make_problem(ou_drift(-1.0, 10.0), tanh_b2(), sigma, 1.0, g),
                          make_problem(mollify(sign_drift(), 100), zero_random_drift(), sigma, 0.0, g),
                          make_problem(zero_drift(), wiener_integral_b2(0.7), sigma, 0.2, g)}) {
        for (const auto& e : weight_means(p, noise, {25, 50, 100}))
            CHECK(within(e, 1.0));
    }
}

TEST_CASE("weak sampler matches closed-form OU moments") {
    const double a = -1.0, x0 = 1.0, T = 0.5;
    const TimeGrid g(0.0, T, 500);
    const BrownianEnsemble noise{g, 1, 10, 40000};
    const auto p = make_problem(ou_drift(a), zero_random_drift(), {1.0}, x0, g);
    const auto m1 = weak_solution_sampler(p, noise, [](std::span<const double> x) { return x.back(); });
    const auto m2 = weak_solution_sampler(p, noise, [](std::span<const double> x) { return x.back() * x.back(); });
    const double e1 = x0 * std::exp(a * T);
    const double e2 = e1 * e1 + (std::exp(2 * a * T) - 1) / (2 * a);
    // Euler bias at dt = 1e-3 is far below the Monte Carlo error.
    CHECK(std::abs(m1.estimate - e1) <= 3 * m1.se);
    CHECK(std::abs(m2.estimate - e2) <= 3 * m2.se);
    CHECK_FALSE(m1.degenerate);
    CHECK(m1.n_eff > 0.3 * noise.n_paths);
}

TEST_CASE("weak sampler agrees with strong Euler with random drift") {
    const TimeGrid g(0.0, 0.5, 250);
    const BrownianEnsemble noise{g, 1, 12, 30000};
    const BrownianEnsemble strong_noise{g, 1, 13, 30000};
    const auto p = make_problem(sine_drift(), tanh_b2(), {1.0}, 0.4, g);
    const auto w = weak_solution_sampler(p, noise, [](std::span<const double> x) { return x.back(); });
    const auto sol = euler_maruyama(p, strong_noise);
    std::vector<double> xt(noise.n_paths);
    for (std::size_t q = 0; q < xt.size(); ++q) xt[q] = sol.value(q, g.n_steps());
    const auto s = mc_estimate(xt);
    CHECK(std::abs(w.estimate - s.mean) <= 3 * std::hypot(w.se, s.se));
}

TEST_CASE("reweighted path is Brownian under the new measure") {
    // With b2 = 0 the kernel is a function of X alone, so B^Q can be rebuilt here.
    const double a = -2.0;
    const TimeGrid g(0.0, 1.0, 200);
    const BrownianEnsemble noise{g, 1, 14, 40000};
    const auto p = make_problem(ou_drift(a), zero_random_drift(), {1.0}, 0.5, g);
    std::vector<double> zq(noise.n_paths), zq2(noise.n_paths);
    for (std::size_t q = 0; q < noise.n_paths; ++q) {
        const auto path = noise.path(q);
        const auto s = weak_sample(p, path);
        double bq = path.value(g.n_steps(), 0);
        for (std::size_t k = 0; k < g.n_steps(); ++k) bq -= a * s.x[k] * g.dt();
        const double z = s.weight.terminal();
        zq[q] = z * bq;
        zq2[q] = z * bq * bq;
    }
    CHECK(within(mc_estimate(zq), 0.0));
    CHECK(within(mc_estimate(zq2), 1.0));
}

TEST_CASE("overflow and degeneracy are reported") {
    DoleansWeight w{{0.0, 800.0}, 17};
    CHECK(w.z(0) == 1.0);
    try {
        (void)w.z(1);
        FAIL("expected overflow");
    } catch (const WeightOverflow& e) {
        CHECK(e.path() == 17);
    }
    std::vector<double> weights(1000, 1e-6), values(1000, 1.0);
    weights[3] = 1e6;
    CHECK(weighted_estimate(weights, values).degenerate);
    CHECK_FALSE(weighted_estimate(std::vector<double>(1000, 1.0), values).degenerate);
}

TEST_CASE("exponential moment check") {
    const TimeGrid g(0.0, 0.1, 100);
    const BrownianEnsemble noise{g, 1, 15, 20000};
    const auto c = analysis_constants(1.0, 1, {1.0}, 0.1);
    SUBCASE("bounded drift gives a constant") {
        const auto r = exponential_moment_check(tanh_b2(), c, noise);
        CHECK(r.full.mean == doctest::Approx(std::exp(c.exp_moment_constant * 4.0)));
        CHECK(r.full.se == doctest::Approx(0.0));
        CHECK_FALSE(r.unstable);
    }
    SUBCASE("small Wiener-integral drift is stable") {
        const auto r = exponential_moment_check(wiener_integral_b2(0.2), c, noise);
        CHECK_FALSE(r.unstable);
        CHECK(r.full.mean > 1.0);
    }
    SUBCASE("zero drift") {
        CHECK(exponential_moment_check(zero_random_drift(), c, noise).full.mean == 1.0);
    }
}

TEST_CASE("json summary is deterministic") {
    const TimeGrid g(0.0, 0.1, 10);
    const BrownianEnsemble noise{g, 1, 16, 100};
    const auto p = make_problem(zero_drift(), tanh_b2(), {1.0}, 0.0, g);
    const auto a = weighted_estimate_json(weak_solution_sampler(p, noise, [](auto x) { return x.back(); }, 1), 16);
    const auto b = weighted_estimate_json(weak_solution_sampler(p, noise, [](auto x) { return x.back(); }, 3), 16);
    CHECK(a == b);
    CHECK(a.find("\"n_eff\"") != std::string::npos);
}
