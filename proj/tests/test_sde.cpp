#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "rsde/catalog.hpp"
#include "rsde/sde.hpp"

using namespace rsde;

namespace {

// Exact OU transition driven by the same increments: X_{j+1} = e^{a h} X_j +
// dB_j (e^{a h} - 1)/(a h), the conditional mean of the stochastic integral
// given the increment. Run on a grid finer than every Euler grid it checks.
double ou_reference(double a, double x0, const BrownianPath& fine) {
    const double h = fine.grid().dt();
    const double decay = std::exp(a * h), gain = (decay - 1.0) / (a * h);
    double x = x0;
    for (std::size_t j = 0; j < fine.n_steps(); ++j) x = decay * x + gain * fine.increment(j, 0);
    return x;
}

/// b2 fixed to a given path, whatever path the solver binds it to.
struct PinnedModel final : RandomDriftModel {
    RandomDrift inner;
    BrownianPath pinned;
    PinnedModel(RandomDrift d, BrownianPath p) : inner(std::move(d)), pinned(std::move(p)) {}
    std::unique_ptr<BoundRandomDrift> bind(const NoiseView&) const override { return inner.bind(pinned); }
};

}  // namespace

TEST_CASE("zero and constant drift are exact") {
    const TimeGrid g(0.0, 1.0, 500);
    const auto path = sample_brownian(g, 2, {3, 1});
    const std::vector<double> sigma{0.6, -1.1};
    const auto x = solve_path(make_problem(zero_drift(), zero_random_drift(), sigma, 0.4, g), path);
    for (std::size_t k = 0; k <= 500; ++k)
        CHECK(std::abs(x[k] - (0.4 + sigma[0] * path.value(k, 0) + sigma[1] * path.value(k, 1))) < 1e-12);
    const auto y = solve_path(make_problem(constant_drift(1.5), zero_random_drift(), sigma, 0.4, g), path);
    CHECK(std::abs(y[500] - (0.4 + 1.5 + sigma[0] * path.value(500, 0) + sigma[1] * path.value(500, 1))) < 1e-12);
}

TEST_CASE("affine drift follows the affine recursion") {
    DeterministicDrift aff;
    aff.name = "affine";
    aff.eval = [](double, double x) { return -0.8 * x + 0.3; };
    aff.eval_dx = [](double, double) { return -0.8; };
    aff.k = 0.8;
    aff.smooth = true;
    const TimeGrid g(0.0, 2.0, 400);
    const auto path = sample_brownian(g, 1, {5, 0});
    const auto x = solve_path(make_problem(aff, zero_random_drift(), {0.9}, 1.0, g), path);
    double r = 1.0;
    for (std::size_t k = 0; k < 400; ++k) {
        r = (1.0 - 0.8 * g.dt()) * r + 0.3 * g.dt() + 0.9 * path.increment(k, 0);
        CHECK(std::abs(x[k + 1] - r) < 1e-12);
    }
}

TEST_CASE("Euler strong error halves with dt for OU") {
    const double a = -1.0, x0 = 1.0;
    const std::size_t N = 10000, fine_factor = 16;
    const std::vector<std::size_t> steps{100, 200, 400};
    std::vector<double> sq(steps.size(), 0.0);
    const TimeGrid fine(0.0, 1.0, 400 * fine_factor);
    for (std::size_t p = 0; p < N; ++p) {
        const auto fpath = sample_brownian(fine, 1, {77, p});
        const double exact = ou_reference(a, x0, fpath);
        for (std::size_t j = 0; j < steps.size(); ++j) {
            const auto cpath = coarsen(fpath, fine.n_steps() / steps[j]);
            const auto x = solve_path(make_problem(ou_drift(a), zero_random_drift(), {1.0}, x0, cpath.grid()), cpath);
            sq[j] += std::pow(x.back() - exact, 2);
        }
    }
    for (std::size_t j = 0; j + 1 < steps.size(); ++j) {
        const double ratio = std::sqrt(sq[j] / sq[j + 1]);
        CHECK(ratio > 1.6);
        CHECK(ratio < 2.4);
    }
}

TEST_CASE("shift equivariance") {
    // Solving on B + phi equals solving on B with drift b1 + sigma phi' and b2 read on B + phi.
    const TimeGrid g(0.0, 1.0, 300);
    const auto path = sample_brownian(g, 1, {8, 0});
    CameronMartinShift h{1, {}};
    for (std::size_t k = 0; k <= 300; ++k) h.phi_dot.push_back(std::cos(3.0 * g.time(k)));
    const auto shifted = shift_path(path, h);
    const double sigma = 0.7;
    const auto b1 = sine_drift(0.8);
    const auto lhs = solve_path(make_problem(b1, tanh_b2(), {sigma}, 0.2, g), shifted);

    DeterministicDrift aug = b1;
    aug.eval = [b1, h, g, sigma](double t, double x) {
        return b1.eval(t, x) + sigma * h.phi_dot[g.floor_index(t)];
    };
    const RandomDrift pinned("pinned", std::make_shared<PinnedModel>(tanh_b2(), shifted), true);
    const auto rhs = solve_path(make_problem(aug, pinned, {sigma}, 0.2, g), path);
    for (std::size_t k = 0; k <= 300; ++k) CHECK(std::abs(lhs[k] - rhs[k]) < 1e-12);
}

TEST_CASE("ensemble solve is reproducible and path-indexed") {
    const TimeGrid g(0.0, 1.0, 50);
    const BrownianEnsemble noise{g, 1, 4, 20};
    const auto p = make_problem(ou_drift(-0.5), tanh_b2(), {1.0}, 0.1, g);
    const auto serial = euler_maruyama(p, noise, 1);
    const auto threaded = euler_maruyama(p, noise, 3);
    CHECK(serial.values == threaded.values);
    const auto one = solve_path(p, noise.path(7));
    for (std::size_t k = 0; k <= 50; ++k) CHECK(serial.value(7, k) == one[k]);
    CHECK(serial.value(3, 0) == 0.1);
}

TEST_CASE("explosion is reported with path and step") {
    DeterministicDrift blow;
    blow.name = "square";
    blow.eval = [](double, double x) { return x * x; };
    const TimeGrid g(0.0, 1.0, 100);
    const BrownianEnsemble noise{g, 1, 2, 3};
    try {
        euler_maruyama(make_problem(blow, zero_random_drift(), {0.1}, 50.0, g), noise);
        FAIL("expected an explosion");
    } catch (const ExplosionDetected& e) {
        CHECK(e.path() == 0);
        CHECK(e.step() > 0);
        CHECK(e.step() <= 100);
    }
}

TEST_CASE("sigma must be non-degenerate") {
    CHECK_THROWS_AS(make_problem(zero_drift(), zero_random_drift(), {0.0}, 0.0, TimeGrid(0, 1, 10)),
                    std::invalid_argument);
    CHECK_THROWS_AS(analysis_constants(1.0, 1, {0.0}, 1.0), std::invalid_argument);
}

TEST_CASE("mollified sequence and Cauchy diagnostic") {
    const TimeGrid g(0.0, 0.25, 2500);
    const BrownianEnsemble noise{g, 1, 31, 2000};
    SUBCASE("sign drift distances shrink") {
        const auto sols = solve_mollified_sequence({sign_drift()}, zero_random_drift(), {1.0}, 0.0, g, noise,
                                                   {10, 100, 1000});
        const auto rep = cauchy_l2_diagnostic(sols, 0.25);
        CHECK(rep.distance[1][2] < rep.distance[0][1]);
        CHECK(rep.max_tail == rep.distance[1][2]);
    }
    SUBCASE("zero drift levels coincide") {
        const BrownianEnsemble small{g, 1, 31, 50};
        const auto sols = solve_mollified_sequence({zero_drift()}, zero_random_drift(), {1.0}, 0.0, g, small,
                                                   {10, 100, 1000});
        for (const auto& row : cauchy_l2_diagnostic(sols, 0.25).distance)
            for (double v : row) CHECK(v == 0.0);
    }
    SUBCASE("OU distances stay below the Euler perturbation bound") {
        // |X^m_T - X^n_T| <= T e^{|a| T} sup |b_m - b_n| over the visited states.
        const double a = -1.5;
        const BrownianEnsemble small{g, 1, 31, 200};
        const MollifiedFamily fam{ou_drift(a)};
        const std::vector<int> levels{3, 10, 100};
        const auto sols = solve_mollified_sequence(fam, zero_random_drift(), {1.0}, 0.5, g, small, levels);
        const auto rep = cauchy_l2_diagnostic(sols, 0.25);
        for (std::size_t i = 0; i < levels.size(); ++i)
            for (std::size_t j = i + 1; j < levels.size(); ++j) {
                const auto bi = fam.level(levels[i]), bj = fam.level(levels[j]);
                double sup = 0;
                for (const auto* s : {&sols[i], &sols[j]})
                    for (double x : s->values) sup = std::max(sup, std::abs(bi.eval(0, x) - bj.eval(0, x)));
                const double bound = 0.25 * std::exp(std::abs(a) * 0.25) * sup;
                CHECK(rep.distance[i][j] <= bound + 1e-12);
            }
    }
}

TEST_CASE("analysis constants") {
    const auto c = analysis_constants(1.0, 1, {1.0}, 1.0);
    CHECK(c.small_horizon == doctest::Approx(1.0 / (4.0 * std::sqrt(3.0))).epsilon(1e-15));
    CHECK(c.small_horizon == doctest::Approx(0.1443).epsilon(1e-3));
    CHECK(c.gronwall_constant == doctest::Approx(4.0 * std::exp(8.0)).epsilon(1e-15));
    CHECK(c.exp_moment_constant == 48.0);
    CHECK(c.delta0 < c.delta0_limit);
    CHECK(c.delta0_limit == doctest::Approx(std::min(1.0 / (12 * c.gronwall_constant), 1.0 / c.gronwall_constant)));
    CHECK(c.pasting_step == doctest::Approx(c.delta0 / (64 * std::numbers::sqrt2)));
    const auto c2 = analysis_constants(0.5, 2, {1.0, 2.0}, 0.5);
    CHECK(c2.exp_moment_constant == doctest::Approx(48 * 0.5 * 2 * 4.0 / 25.0));
    CHECK(c2.small_horizon == doctest::Approx(1.0 / (4 * std::sqrt(3.0) * 2 * 0.25)));
}

TEST_CASE("non-explosion estimate") {
    const TimeGrid g(0.0, 1.0, 100);
    const auto c = analysis_constants(1.0, 1, {1.0}, 1.0);
    const auto p = make_problem(zero_drift(), zero_random_drift(), {1.0}, 0.0, g);
    SUBCASE("admissible delta0 is stable") {
        const auto sol = euler_maruyama(p, {g, 1, 41, 40000});
        const auto r = non_explosion_check(sol, c.delta0, c);
        CHECK(r.admissible);
        CHECK_FALSE(r.stats.unstable);
        CHECK(std::isfinite(r.stats.full.mean));
        CHECK(r.stats.prefixes.size() == 3);
    }
    SUBCASE("large delta0 is flagged") {
        const auto sol = euler_maruyama(p, {g, 1, 41, 40000});
        const auto r = non_explosion_check(sol, 10.0, c);
        CHECK_FALSE(r.admissible);
        CHECK(r.stats.unstable);
    }
}

TEST_CASE("Gronwall bound holds in mean for catalog problems") {
    const TimeGrid g(0.0, 1.0, 200);
    const std::size_t N = 2000;
    struct Case {
        DeterministicDrift b1;
        RandomDrift b2;
    };
    const std::vector<Case> cases{{zero_drift(), zero_random_drift()},   {ou_drift(-1.0), zero_random_drift()},
                                  {mollify(sign_drift(), 100), tanh_b2()}, {constant_drift(0.5), tanh_b2()},
                                  {sine_drift(), sinx_tanh_b2()},          {zero_drift(), wiener_integral_b2(1.0)}};
    for (const auto& cs : cases) {
        const auto p = make_problem(cs.b1, cs.b2, {1.0}, 0.3, g);
        std::vector<double> lhs(N), rhs(N);
        for (std::size_t q = 0; q < N; ++q) {
            const auto path = sample_brownian(g, 1, {51, q});
            const auto x = solve_path(p, path);
            double sx = 0, sb = 0;
            for (std::size_t k = 0; k <= g.n_steps(); ++k) {
                sx = std::max(sx, x[k] * x[k]);
                sb = std::max(sb, path.value(k, 0) * path.value(k, 0));
            }
            lhs[q] = sx;
            rhs[q] = gronwall_sup_bound(0.3, cs.b1.k, 1.0, sb, cs.b2.m2_bound(path));
        }
        const auto l = mc_estimate(lhs), r = mc_estimate(rhs);
        CHECK(l.mean <= r.mean + 3 * std::sqrt(l.se * l.se + r.se * r.se));
    }
}

TEST_CASE("solution exports") {
    const TimeGrid g(0.0, 1.0, 4);
    const auto sol = euler_maruyama(make_problem(zero_drift(), zero_random_drift(), {1.0}, 0.0, g), {g, 1, 1, 2});
    std::ostringstream os;
    write_solution_csv(os, sol);
    CHECK(os.str().rfind("path_id,t,X\n", 0) == 0);
    const auto js = solution_summary_json(sol);
    CHECK(js.find("\"moments\"") != std::string::npos);
    CHECK(js == solution_summary_json(sol));
}
