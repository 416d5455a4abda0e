#include "rsde/sde.hpp"

#include <cmath>
#include <json.hpp>
#include <numbers>
#include <string>

#include "rsde/parallel.hpp"

namespace rsde {

double SdeProblem::sigma_norm2() const {
    double s = 0;
    for (double v : sigma) s += v * v;
    return s;
}

void SdeProblem::validate() const {
    if (sigma.empty() || !(sigma_norm2() > 0)) throw std::invalid_argument("sigma must satisfy |sigma|^2 > 0");
    if (!drift1.eval) throw std::invalid_argument("drift1 has no evaluation function");
    if (!std::isfinite(x0)) throw std::invalid_argument("x0 must be finite");
}

SdeProblem make_problem(DeterministicDrift drift1, RandomDrift drift2, std::vector<double> sigma, double x0,
                        TimeGrid grid) {
    SdeProblem p;
    p.outside_construction = !drift1.smooth;
    p.drift1 = std::move(drift1);
    p.drift2 = std::move(drift2);
    p.sigma = std::move(sigma);
    p.x0 = x0;
    p.grid = grid;
    p.validate();
    return p;
}

ExplosionDetected::ExplosionDetected(std::size_t path, std::size_t step)
    : std::runtime_error("explosion on path " + std::to_string(path) + " at step " + std::to_string(step)),
      path_(path),
      step_(step) {}

void solve_path(const SdeProblem& problem, const NoiseView& noise, BoundRandomDrift& b2, std::span<double> out,
                std::size_t k_start, double x_start, std::size_t path_index) {
    const TimeGrid& g = problem.grid;
    if (!(*noise.grid == g) || noise.d != problem.dim()) throw std::invalid_argument("noise does not match problem");
    if (out.size() != g.n_points()) throw std::invalid_argument("output size does not match grid");
    const std::size_t d = problem.dim();
    const double dt = g.dt();
    const bool has_b2 = !problem.drift2.is_zero();
    double x = x_start;
    out[k_start] = x;
    for (std::size_t k = k_start; k < g.n_steps(); ++k) {
        double drift = problem.drift1.eval(g.time(k), x);
        if (has_b2) drift += b2.eval(k, x);
        double noise_term = 0;
        for (std::size_t i = 0; i < d; ++i) noise_term += problem.sigma[i] * noise.increments[k * d + i];
        x = x + drift * dt + noise_term;
        if (!std::isfinite(x) || std::abs(x) > kExplosionThreshold) throw ExplosionDetected(path_index, k + 1);
        out[k + 1] = x;
    }
}

std::vector<double> solve_path(const SdeProblem& problem, const BrownianPath& path) {
    problem.validate();
    std::vector<double> out(problem.grid.n_points());
    auto b2 = problem.drift2.bind(path);
    solve_path(problem, NoiseView::of(path), *b2, out, 0, problem.x0, path.stream().index);
    return out;
}

SolutionGrid euler_maruyama(const SdeProblem& problem, const BrownianEnsemble& noise, unsigned workers) {
    problem.validate();
    if (!(noise.grid == problem.grid) || noise.d != problem.dim())
        throw std::invalid_argument("noise ensemble does not match problem");
    SolutionGrid sol{problem.grid, noise.n_paths, problem.level, noise.seed, problem.x0, {}};
    const std::size_t np = problem.grid.n_points();
    sol.values.assign(noise.n_paths * np, 0.0);
    parallel_for(noise.n_paths, workers, [&](std::size_t p) {
        const BrownianPath path = noise.path(p);
        auto b2 = problem.drift2.bind(path);
        solve_path(problem, NoiseView::of(path), *b2, std::span<double>(sol.values).subspan(p * np, np), 0,
                   problem.x0, p);
    });
    return sol;
}

std::vector<SolutionGrid> solve_mollified_sequence(const MollifiedFamily& family, const RandomDrift& drift2,
                                                   const std::vector<double>& sigma, double x0, const TimeGrid& grid,
                                                   const BrownianEnsemble& noise, const std::vector<int>& levels,
                                                   unsigned workers) {
    if (levels.empty()) throw std::invalid_argument("at least one mollification level is required");
    for (std::size_t j = 1; j < levels.size(); ++j)
        if (levels[j] <= levels[j - 1]) throw std::invalid_argument("mollification levels must increase");
    std::vector<SolutionGrid> out;
    for (int n : levels) {
        SdeProblem p = make_problem(family.level(n), drift2, sigma, x0, grid);
        p.level = n;
        out.push_back(euler_maruyama(p, noise, workers));
    }
    return out;
}

CauchyReport cauchy_l2_diagnostic(const std::vector<SolutionGrid>& solutions, double t) {
    if (solutions.size() < 2) throw std::invalid_argument("Cauchy diagnostic needs two or more solutions");
    const auto& ref = solutions.front();
    for (const auto& s : solutions)
        if (!(s.grid == ref.grid) || s.n_paths != ref.n_paths || s.seed != ref.seed)
            throw std::invalid_argument("solutions must share grid and noise");
    const std::size_t k = ref.grid.index_of(t);
    const std::size_t L = solutions.size();
    CauchyReport r;
    r.t = t;
    r.distance.assign(L, std::vector<double>(L, 0.0));
    for (const auto& s : solutions) r.levels.push_back(s.level);
    std::vector<double> sq(ref.n_paths);
    for (std::size_t a = 0; a < L; ++a)
        for (std::size_t b = a + 1; b < L; ++b) {
            for (std::size_t p = 0; p < ref.n_paths; ++p) {
                const double diff = solutions[a].value(p, k) - solutions[b].value(p, k);
                sq[p] = diff * diff;
            }
            const double dist = std::sqrt(pairwise_sum(sq) / static_cast<double>(ref.n_paths));
            r.distance[a][b] = r.distance[b][a] = dist;
            if (a >= 1) r.max_tail = std::max(r.max_tail, dist);
        }
    return r;
}

AnalysisConstants analysis_constants(double k1, std::size_t d, const std::vector<double>& sigma, double T) {
    if (!(k1 > 0)) throw std::invalid_argument("k1 must be positive");
    if (d == 0 || sigma.size() != d) throw std::invalid_argument("sigma must have d components");
    AnalysisConstants c;
    c.k1 = k1;
    c.d = d;
    c.T = T;
    double max_sq = 0;
    for (double s : sigma) {
        c.sigma_norm2 += s * s;
        max_sq = std::max(max_sq, s * s);
    }
    if (!(c.sigma_norm2 > 0)) throw std::invalid_argument("sigma must satisfy |sigma|^2 > 0");
    const double dd = static_cast<double>(d);
    c.exp_moment_constant = 48.0 * T * dd * max_sq / (c.sigma_norm2 * c.sigma_norm2);
    c.small_horizon = 1.0 / (4.0 * std::numbers::sqrt3 * dd * k1 * k1);
    c.gronwall_constant = 4.0 * std::exp(8.0 * k1 * k1);
    c.delta0_limit = std::min(1.0 / (12.0 * dd * c.gronwall_constant * c.sigma_norm2), 1.0 / c.gronwall_constant);
    c.delta0 = 0.5 * c.delta0_limit;
    c.pasting_step = c.delta0 / (64.0 * dd * std::numbers::sqrt2 * k1 * k1);
    return c;
}

NonExplosionReport non_explosion_check(const SolutionGrid& solution, double delta0, const AnalysisConstants& constants) {
    if (!(constants.sigma_norm2 > 0)) throw std::invalid_argument("sigma must satisfy |sigma|^2 > 0");
    if (!(delta0 > 0)) throw std::invalid_argument("delta0 must be positive");
    std::vector<double> samples(solution.n_paths);
    for (std::size_t p = 0; p < solution.n_paths; ++p) {
        double sup = 0;
        for (double x : solution.path(p)) sup = std::max(sup, x * x);
        samples[p] = std::exp(delta0 * sup);
    }
    NonExplosionReport r;
    r.stats = nested_stability(samples);
    r.delta0 = delta0;
    r.admissible = delta0 < constants.delta0_limit;
    return r;
}

double gronwall_sup_bound(double x0, double k1, double sigma_norm2, double sup_noise2, double m2) {
    return (4.0 * x0 * x0 + 8.0 * k1 * k1 + 4.0 * sigma_norm2 * sup_noise2 + 4.0 * m2 * m2) *
           std::exp(8.0 * k1 * k1);
}

void write_solution_csv(std::ostream& out, const SolutionGrid& solution) {
    out << "path_id,t,X\n";
    const auto prec = out.precision(17);
    for (std::size_t p = 0; p < solution.n_paths; ++p)
        for (std::size_t k = 0; k < solution.grid.n_points(); ++k)
            out << p << ',' << solution.grid.time(k) << ',' << solution.value(p, k) << '\n';
    out.precision(prec);
}

std::string solution_summary_json(const SolutionGrid& solution, std::size_t stride) {
    nlohmann::ordered_json j;
    j["level"] = solution.level;
    j["seed"] = solution.seed;
    j["n_paths"] = solution.n_paths;
    j["x0"] = solution.x0;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    std::vector<double> col(solution.n_paths), sq(solution.n_paths);
    const std::size_t np = solution.grid.n_points();
    for (std::size_t k = 0; k < np; k += std::max<std::size_t>(stride, 1)) {
        for (std::size_t p = 0; p < solution.n_paths; ++p) col[p] = solution.value(p, k);
        const Estimate e = mc_estimate(col);
        for (std::size_t p = 0; p < solution.n_paths; ++p) sq[p] = (col[p] - e.mean) * (col[p] - e.mean);
        const double var = solution.n_paths > 1 ? pairwise_sum(sq) / static_cast<double>(solution.n_paths - 1) : 0.0;
        rows.push_back({{"t", solution.grid.time(k)}, {"mean", e.mean}, {"variance", var}});
    }
    j["moments"] = rows;
    return j.dump(2);
}

}  // namespace rsde
