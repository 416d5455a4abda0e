#include "rsde/girsanov.hpp"

#include <cmath>
#include <json.hpp>

#include "rsde/parallel.hpp"

namespace rsde {

GirsanovKernel::GirsanovKernel(DeterministicDrift drift1, RandomDrift drift2, std::vector<double> sigma)
    : drift1_(std::move(drift1)), drift2_(std::move(drift2)), sigma_(std::move(sigma)), norm2_(0) {
    for (double s : sigma_) norm2_ += s * s;
    if (sigma_.empty() || !(norm2_ > 0)) throw std::invalid_argument("sigma must satisfy |sigma|^2 > 0");
}

double GirsanovKernel::drift(const TimeGrid& grid, std::size_t k, double x, BoundRandomDrift& b2) const {
    double b = drift1_.eval(grid.time(k), x);
    if (!drift2_.is_zero()) b += b2.eval(k, x);
    return b;
}

void GirsanovKernel::components(double b, std::span<double> u) const {
    for (std::size_t i = 0; i < sigma_.size(); ++i) u[i] = sigma_[i] * b / norm2_;
}

GirsanovKernel girsanov_kernel(const SdeProblem& problem) {
    return GirsanovKernel(problem.drift1, problem.drift2, problem.sigma);
}

double DoleansWeight::z(std::size_t k) const {
    const double v = std::exp(log_z.at(k));
    if (!std::isfinite(v)) throw WeightOverflow(path_id);
    return v;
}

DoleansWeight doleans_exponential(const GirsanovKernel& kernel, const BrownianPath& path,
                                  std::span<const double> state) {
    const TimeGrid& g = path.grid();
    if (state.size() != g.n_points() || path.dim() != kernel.dim())
        throw std::invalid_argument("state and path do not match");
    auto b2 = kernel.drift2().bind(path);
    const std::size_t d = kernel.dim();
    const double dt = g.dt();
    DoleansWeight w;
    w.path_id = path.stream().index;
    w.log_z.assign(g.n_points(), 0.0);
    double acc = 0;
    for (std::size_t k = 0; k < g.n_steps(); ++k) {
        const double b = kernel.drift(g, k, state[k], *b2);
        double u2 = 0;
        for (std::size_t i = 0; i < d; ++i) {
            const double u = kernel.component(b, i);
            acc += u * path.increment(k, i);
            u2 += u * u;
        }
        acc -= 0.5 * u2 * dt;
        if (!std::isfinite(acc)) throw WeightOverflow(w.path_id);
        w.log_z[k + 1] = acc;
    }
    return w;
}

WeakSample weak_sample(const SdeProblem& problem, const BrownianPath& pure_noise) {
    const TimeGrid& g = problem.grid;
    const std::size_t d = problem.dim();
    if (!(pure_noise.grid() == g) || pure_noise.dim() != d) throw std::invalid_argument("noise does not match problem");
    const GirsanovKernel kernel = girsanov_kernel(problem);
    const double dt = g.dt();

    // Increments of the reweighted-measure Brownian motion, filled step by step;
    // b2 at step k reads only the ones already written.
    std::vector<double> q_inc(g.n_steps() * d, 0.0);
    auto b2 = problem.drift2.bind(NoiseView{&g, d, q_inc.data()});

    WeakSample s;
    s.x.assign(g.n_points(), problem.x0);
    s.weight.path_id = pure_noise.stream().index;
    s.weight.log_z.assign(g.n_points(), 0.0);
    double acc = 0;
    std::vector<double> u(d);
    for (std::size_t k = 0; k < g.n_steps(); ++k) {
        double xk = problem.x0;
        for (std::size_t i = 0; i < d; ++i) xk += problem.sigma[i] * pure_noise.value(k, i);
        s.x[k] = xk;
        const double b = kernel.drift(g, k, xk, *b2);
        kernel.components(b, u);
        double u2 = 0;
        for (std::size_t i = 0; i < d; ++i) {
            const double db = pure_noise.increment(k, i);
            acc += u[i] * db;
            u2 += u[i] * u[i];
            q_inc[k * d + i] = db - u[i] * dt;
        }
        acc -= 0.5 * u2 * dt;
        if (!std::isfinite(acc)) throw WeightOverflow(s.weight.path_id);
        s.weight.log_z[k + 1] = acc;
    }
    double xn = problem.x0;
    for (std::size_t i = 0; i < d; ++i) xn += problem.sigma[i] * pure_noise.value(g.n_steps(), i);
    s.x[g.n_steps()] = xn;
    return s;
}

WeightedEstimate weak_solution_sampler(const SdeProblem& problem, const BrownianEnsemble& noise,
                                       const PathPayoff& payoff, unsigned workers) {
    problem.validate();
    std::vector<double> weights(noise.n_paths), values(noise.n_paths);
    parallel_for(noise.n_paths, workers, [&](std::size_t p) {
        const WeakSample s = weak_sample(problem, noise.path(p));
        weights[p] = s.weight.terminal();
        values[p] = payoff(s.x);
    });
    return weighted_estimate(weights, values);
}

std::vector<Estimate> weight_means(const SdeProblem& problem, const BrownianEnsemble& noise,
                                   const std::vector<std::size_t>& steps, unsigned workers) {
    problem.validate();
    std::vector<std::vector<double>> z(steps.size(), std::vector<double>(noise.n_paths));
    parallel_for(noise.n_paths, workers, [&](std::size_t p) {
        const WeakSample s = weak_sample(problem, noise.path(p));
        for (std::size_t j = 0; j < steps.size(); ++j) z[j][p] = s.weight.z(steps[j]);
    });
    std::vector<Estimate> out;
    for (const auto& col : z) out.push_back(mc_estimate(col));
    return out;
}

StabilityReport exponential_moment_check(const RandomDrift& drift2, const AnalysisConstants& constants,
                                         const BrownianEnsemble& noise, unsigned workers) {
    std::vector<double> samples(noise.n_paths);
    parallel_for(noise.n_paths, workers, [&](std::size_t p) {
        if (drift2.is_zero()) {
            samples[p] = 1.0;
            return;
        }
        const BrownianPath path = noise.path(p);
        const double m2 = drift2.bind(path)->m2_bound();
        samples[p] = std::exp(constants.exp_moment_constant * m2 * m2);
    });
    return nested_stability(samples);
}

std::string weighted_estimate_json(const WeightedEstimate& w, std::uint64_t seed) {
    nlohmann::ordered_json j;
    j["estimate"] = w.estimate;
    j["se"] = w.se;
    j["n_eff"] = w.n_eff;
    j["n_paths"] = w.n_paths;
    j["seed"] = seed;
    j["degenerate"] = w.degenerate;
    return j.dump(2);
}

}  // namespace rsde
