#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "rsde/catalog.hpp"
#include "rsde/drift.hpp"
#include "rsde/paths.hpp"
#include "rsde/stats.hpp"

namespace rsde {

/// dX = (b1(t,X) + b2(t,X,omega)) dt + sigma . dB on a uniform grid.
struct SdeProblem {
    DeterministicDrift drift1 = zero_drift();
    RandomDrift drift2 = zero_random_drift();
    std::vector<double> sigma{1.0};
    double x0 = 0;
    TimeGrid grid{0.0, 1.0, 100};
    int level = 0;                      // mollification level of drift1; 0 when used directly
    bool outside_construction = false;  // irregular drift1 evaluated without mollification

    std::size_t dim() const { return sigma.size(); }
    double sigma_norm2() const;
    void validate() const;
};

/// Builds a problem that evaluates drift1 directly, labelling irregular drifts.
SdeProblem make_problem(DeterministicDrift drift1, RandomDrift drift2, std::vector<double> sigma, double x0,
                        TimeGrid grid);

class ExplosionDetected : public std::runtime_error {
public:
    ExplosionDetected(std::size_t path, std::size_t step);
    std::size_t path() const { return path_; }
    std::size_t step() const { return step_; }

private:
    std::size_t path_;
    std::size_t step_;
};

/// |X| above this (or non-finite) counts as an explosion.
inline constexpr double kExplosionThreshold = 1e12;

/// Euler-Maruyama with left-point drift on one noise path. Fills out[k] for
/// k >= k_start, starting from out[k_start] = x_start. The bound drift must be
/// attached to `noise`.
void solve_path(const SdeProblem& problem, const NoiseView& noise, BoundRandomDrift& b2, std::span<double> out,
                std::size_t k_start, double x_start, std::size_t path_index = 0);

/// Convenience: the whole trajectory on one path, started from problem.x0.
std::vector<double> solve_path(const SdeProblem& problem, const BrownianPath& path);

/// X values per path per grid point together with their provenance.
struct SolutionGrid {
    TimeGrid grid;
    std::size_t n_paths = 0;
    int level = 0;
    std::uint64_t seed = 0;
    double x0 = 0;
    std::vector<double> values;  // [path][grid point]

    double value(std::size_t p, std::size_t k) const { return values[p * grid.n_points() + k]; }
    std::span<const double> path(std::size_t p) const {
        return std::span<const double>(values).subspan(p * grid.n_points(), grid.n_points());
    }
};

SolutionGrid euler_maruyama(const SdeProblem& problem, const BrownianEnsemble& noise, unsigned workers = 1);

/// One solution per level, all on the same noise ensemble.
std::vector<SolutionGrid> solve_mollified_sequence(const MollifiedFamily& family, const RandomDrift& drift2,
                                                   const std::vector<double>& sigma, double x0, const TimeGrid& grid,
                                                   const BrownianEnsemble& noise, const std::vector<int>& levels,
                                                   unsigned workers = 1);

/// Pairwise root-mean-square distances between solutions at time t.
struct CauchyReport {
    std::vector<int> levels;
    double t = 0;
    std::vector<std::vector<double>> distance;
    double max_tail = 0;  // largest distance among levels past the coarsest
};

CauchyReport cauchy_l2_diagnostic(const std::vector<SolutionGrid>& solutions, double t);

/// Constants of the small-time, Fernique-type and pasting arguments for a
/// drift of growth constant k1 and noise loading sigma.
struct AnalysisConstants {
    double k1 = 0;
    std::size_t d = 1;
    double sigma_norm2 = 0;
    double T = 0;
    double exp_moment_constant = 0;  // 48 T max_i d sigma_i^2 / |sigma|^4
    double small_horizon = 0;        // 1 / (4 sqrt(3) d k1^2)
    double gronwall_constant = 0;    // 4 e^{8 k1^2}
    double delta0_limit = 0;         // min(1/(12 d C |sigma|^2), 1/C), C the Gronwall constant
    double delta0 = 0;               // half the limit
    double pasting_step = 0;         // delta0 / (64 d sqrt(2) k1^2)
};

AnalysisConstants analysis_constants(double k1, std::size_t d, const std::vector<double>& sigma, double T);

/// Monte Carlo estimate of E exp(delta0 sup_t |X_t|^2) with the nested-prefix stability flag.
struct NonExplosionReport {
    StabilityReport stats;
    double delta0 = 0;
    bool admissible = false;  // delta0 below the admissible limit of the supplied constants
};

NonExplosionReport non_explosion_check(const SolutionGrid& solution, double delta0, const AnalysisConstants& constants);

/// Right side of the pathwise Gronwall bound for sup over [t0, t0 + 1] of |X|^2:
/// (4|x0|^2 + 8k^2 + 4|sigma|^2 sup|B_t - B_t0|^2 + 4 M2^2) e^{8 k^2}.
double gronwall_sup_bound(double x0, double k1, double sigma_norm2, double sup_noise2, double m2);

/// CSV with columns path_id, t, X.
void write_solution_csv(std::ostream& out, const SolutionGrid& solution);

/// JSON summary: per grid time the ensemble mean and variance.
std::string solution_summary_json(const SolutionGrid& solution, std::size_t stride = 1);

}  // namespace rsde
