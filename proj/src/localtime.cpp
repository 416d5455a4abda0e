#include "rsde/localtime.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "rsde/catalog.hpp"
#include "rsde/parallel.hpp"

namespace rsde {

SpaceTimeIntegrand integrand_from_drift(const DeterministicDrift& b) {
    SpaceTimeIntegrand f;
    f.name = b.name;
    f.f = b.eval;
    f.f_dz = b.eval_dx;
    f.growth = b.k > 0 ? GrowthClass::linear : GrowthClass::bounded;
    return f;
}

HxNorm hx_norm(const SpaceTimeIntegrand& f, double x, double s_max) {
    if (!f.f) throw std::invalid_argument("integrand has no evaluation function");
    if (!(s_max > 0)) throw std::invalid_argument("time range must be positive");
    using boost::math::quadrature::gauss;
    using boost::math::quadrature::gauss_kronrod;
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

    // z = x + sqrt(s) y turns both inner integrals into expectations against the
    // standard normal density; s = r^2 removes the sqrt(s) behaviour at s = 0.
    auto inner = [&](double s, bool squared) {
        const double rs = std::sqrt(s);
        auto g = [&](double y) {
            const double v = f.f(s, x + rs * y);
            const double dens = std::exp(-0.5 * y * y) * inv_sqrt_2pi;
            return squared ? v * v * dens : std::abs(y) * std::abs(v) * dens;
        };
        return gauss_kronrod<double, 31>::integrate(g, -8.0, 8.0, 12, 1e-11);
    };
    auto outer = [&](bool squared) {
        auto g = [&](double r) { return 2.0 * r * inner(r * r, squared); };
        return gauss<double, 30>::integrate(g, 0.0, std::sqrt(s_max));
    };
    HxNorm out;
    out.s_max = s_max;
    const double l2 = outer(true);
    out.l2_term = 2.0 * std::sqrt(l2);
    out.moment_term = outer(false);
    out.value = out.l2_term + out.moment_term;
    out.finite = std::isfinite(out.value);
    return out;
}

std::string route_name(LocalTimeRoute r) {
    return r == LocalTimeRoute::derivative_identity ? "derivative-identity" : "decomposition";
}

LocalTimeIntegral lt_via_derivative(const SpaceTimeIntegrand& f, std::span<const double> y, const TimeGrid& grid,
                                    double t_hi, double t_lo) {
    if (!f.has_derivative()) throw std::invalid_argument("derivative route needs f_dz");
    if (y.size() != grid.n_points()) throw std::invalid_argument("path does not match grid");
    const std::size_t lo = grid.index_of(t_lo), hi = grid.index_of(t_hi);
    double acc = 0;
    for (std::size_t k = lo; k < hi; ++k) acc += f.f_dz(grid.time(k), y[k]);
    return {-acc * grid.dt(), LocalTimeRoute::derivative_identity, t_lo, t_hi, 0};
}

namespace {

/// Contribution of original interval j to the decomposition, before division by scale.
inline double decomposition_term(const SpaceTimeIntegrand& f, const ReversedPath& rev, double x, double scale,
                                 std::size_t j, double length) {
    const BrownianPath& w = rev.base();
    const TimeGrid& g = w.grid();
    const std::size_t n = g.n_steps();
    const double forward = f.f(g.time(j), x + scale * w.value(j, 0)) * w.increment(j, 0);
    const std::size_t m = n - 1 - j;
    if (m >= rev.n_tilde()) return forward;
    const double hat = rev.hat(m, 0);
    const double fy = f.f(g.time(j + 1), x + scale * hat);
    const double backward = fy * rev.tilde_increment(m, 0) - fy * hat / (length - rev.reversed_time(m)) * g.dt();
    return forward + backward;
}

}  // namespace

LocalTimeIntegral lt_via_decomposition(const SpaceTimeIntegrand& f, const ReversedPath& driver, double x,
                                       double scale, double t_hi, double t_lo, std::size_t band) {
    if (!(scale > 0)) throw std::invalid_argument("scale must be positive");
    const TimeGrid& g = driver.base().grid();
    const std::size_t lo = std::max(g.index_of(t_lo), band), hi = g.index_of(t_hi);
    const double length = g.T() - g.t0();
    double acc = 0;
    for (std::size_t j = lo; j < hi; ++j) acc += decomposition_term(f, driver, x, scale, j, length);
    return {acc / scale, LocalTimeRoute::decomposition, t_lo, t_hi, band};
}

LocalTimeIntegral lt_brownian(const SpaceTimeIntegrand& f, const BrownianPath& path, double x, double t_hi,
                              double t_lo, std::size_t band) {
    if (path.dim() == 1) return lt_via_decomposition(f, ReversedPath(path), x, 1.0, t_hi, t_lo, band);
    std::vector<double> inc(path.n_steps());
    for (std::size_t k = 0; k < path.n_steps(); ++k) inc[k] = path.increment(k, 0);
    const BrownianPath first(path.grid(), 1, std::move(inc), path.stream());
    return lt_via_decomposition(f, ReversedPath(first), x, 1.0, t_hi, t_lo, band);
}

BrownianPath solution_driver(std::span<const double> x, const TimeGrid& grid, double sigma_norm) {
    if (x.size() != grid.n_points() || !(sigma_norm > 0)) throw std::invalid_argument("invalid solution path");
    std::vector<double> inc(grid.n_steps());
    for (std::size_t k = 0; k < grid.n_steps(); ++k) inc[k] = (x[k + 1] - x[k]) / sigma_norm;
    return BrownianPath(grid, 1, std::move(inc));
}

namespace {

bool admissible_integrand(const DeterministicDrift& b1, double x, double s_max) {
    static std::mutex mutex;
    static std::map<std::tuple<std::string, double, double>, bool> cache;
    const auto key = std::make_tuple(b1.name, x, s_max);
    {
        std::lock_guard<std::mutex> lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    const bool ok = hx_norm(integrand_from_drift(b1), x, s_max).finite;
    std::lock_guard<std::mutex> lock(mutex);
    cache[key] = ok;
    return ok;
}

}  // namespace

double malliavin_localtime_signed(const SdeProblem& problem, const BrownianPath& path, std::span<const double> x,
                                  double t, double s, std::size_t i, int sign) {
    if (!problem.drift2.x_independent())
        throw std::invalid_argument("local-time representation requires b2 independent of x");
    if (i >= problem.dim()) throw std::invalid_argument("direction exceeds noise dimension");
    if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
    const TimeGrid& g = problem.grid;
    if (x.size() != g.n_points()) throw std::invalid_argument("solution path does not match grid");
    if (t > s) return 0.0;
    if (!admissible_integrand(problem.drift1, problem.x0, std::min(g.T(), 1.0)))
        throw std::invalid_argument("b1 has an infinite weighted Gaussian norm");
    const std::size_t kt = g.index_of(t), ks = g.index_of(s);
    const double sn = std::sqrt(problem.sigma_norm2());
    const ReversedPath rev(solution_driver(x, g, sn));
    const SpaceTimeIntegrand f = integrand_from_drift(problem.drift1);
    auto b2 = problem.drift2.bind(path);
    const bool has_b2 = !problem.drift2.is_zero();
    const double length = g.T() - g.t0();
    double exponent = 0, integral = 0;
    for (std::size_t j = kt; j < ks; ++j) {
        if (has_b2) integral += b2->malliavin(kt, j, x[j], i) * std::exp(-sign * exponent) * g.dt();
        if (j >= kBoundaryBand) exponent += decomposition_term(f, rev, problem.x0, sn, j, length) / sn;
    }
    return std::exp(sign * exponent) * (integral + problem.sigma[i]);
}

const SignCalibration& localtime_sign_calibration() {
    static const SignCalibration cal = [] {
        const double a = -0.7, t = 0.1, s = 0.4;
        SdeProblem p = make_problem(ou_drift(a), zero_random_drift(), {1.0}, 0.3, TimeGrid(0.0, 0.5, 50000));
        const BrownianPath path = sample_brownian(p.grid, 1, {20240601, 0});
        const auto x = solve_path(p, path);
        const double target = std::exp(a * (s - t));
        SignCalibration c;
        c.error_plus = std::abs(malliavin_localtime_signed(p, path, x, t, s, 0, 1) - target) / target;
        c.error_minus = std::abs(malliavin_localtime_signed(p, path, x, t, s, 0, -1) - target) / target;
        c.sign = c.error_plus <= c.error_minus ? 1 : -1;
        return c;
    }();
    return cal;
}

double malliavin_localtime(const SdeProblem& problem, const BrownianPath& path, std::span<const double> x, double t,
                           double s, std::size_t i) {
    return malliavin_localtime_signed(problem, path, x, t, s, i, localtime_sign_calibration().sign);
}

StabilityReport localtime_exp_moment(const SpaceTimeIntegrand& f, double k, double x, const BrownianEnsemble& noise,
                                     const AnalysisConstants& constants, unsigned workers) {
    const double horizon = noise.grid.T() - noise.grid.t0();
    if (horizon > constants.small_horizon * (1 + 1e-12))
        throw std::invalid_argument("horizon exceeds the small-time bound");
    std::vector<double> samples(noise.n_paths, 1.0);
    if (k != 0 && f.f) {
        parallel_for(noise.n_paths, workers, [&](std::size_t p) {
            const BrownianPath path = noise.path(p);
            samples[p] = std::exp(k * lt_brownian(f, path, x, noise.grid.T(), noise.grid.t0()).value);
        });
    }
    return nested_stability(samples);
}

void write_route_csv(std::ostream& out, const RouteComparison& cmp) {
    out << "path_id,route_a,route_b,rel_err\n";
    const auto prec = out.precision(17);
    for (std::size_t p = 0; p < cmp.route_a.size(); ++p)
        out << p << ',' << cmp.route_a[p] << ',' << cmp.route_b[p] << ',' << cmp.rel_err[p] << '\n';
    out.precision(prec);
}

}  // namespace rsde
