#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsde/sde.hpp"
#include "rsde/stats.hpp"

namespace rsde {

/// u_i = sigma_i b / |sigma|^2, so that sigma . u = b.
class GirsanovKernel {
public:
    GirsanovKernel(DeterministicDrift drift1, RandomDrift drift2, std::vector<double> sigma);

    const std::vector<double>& sigma() const { return sigma_; }
    std::size_t dim() const { return sigma_.size(); }

    /// Total drift b1 + b2 at step k; b2 must be bound to the reference path.
    double drift(const TimeGrid& grid, std::size_t k, double x, BoundRandomDrift& b2) const;
    /// Kernel components for a drift value.
    void components(double b, std::span<double> u) const;
    double component(double b, std::size_t i) const { return sigma_[i] * b / norm2_; }

    const RandomDrift& drift2() const { return drift2_; }

private:
    DeterministicDrift drift1_;
    RandomDrift drift2_;
    std::vector<double> sigma_;
    double norm2_;
};

GirsanovKernel girsanov_kernel(const SdeProblem& problem);

class WeightOverflow : public std::overflow_error {
public:
    explicit WeightOverflow(std::size_t path)
        : std::overflow_error("Doleans weight overflows on path " + std::to_string(path)), path_(path) {}
    std::size_t path() const { return path_; }

private:
    std::size_t path_;
};

/// Log-domain Doleans-Dade exponential of int u dB along one path.
struct DoleansWeight {
    std::vector<double> log_z;  // per grid point, log_z[0] = 0
    std::size_t path_id = 0;

    /// Z at grid index k; throws WeightOverflow when Z is not representable.
    double z(std::size_t k) const;
    double terminal() const { return z(log_z.size() - 1); }
};

/// log Z_t = sum u(t_k, X_k) . dB_k - 1/2 sum |u(t_k, X_k)|^2 dt with b2 read on `path`.
DoleansWeight doleans_exponential(const GirsanovKernel& kernel, const BrownianPath& path,
                                  std::span<const double> state);

/// One reweighted pure-noise path: X = x0 + sigma . B^, the weight Z_T, and the
/// path B^Q = B^ - int u dt that is Brownian under the reweighted measure.
struct WeakSample {
    std::vector<double> x;
    DoleansWeight weight;
};

WeakSample weak_sample(const SdeProblem& problem, const BrownianPath& pure_noise);

using PathPayoff = std::function<double(std::span<const double>)>;

/// sum Z_T payoff(X) / N over pure-noise paths: the expectation of the payoff
/// under the law of the solution.
WeightedEstimate weak_solution_sampler(const SdeProblem& problem, const BrownianEnsemble& noise,
                                       const PathPayoff& payoff, unsigned workers = 1);

/// Ensemble means of Z_{t_k} at the requested grid indices.
std::vector<Estimate> weight_means(const SdeProblem& problem, const BrownianEnsemble& noise,
                                   const std::vector<std::size_t>& steps, unsigned workers = 1);

/// Monte Carlo of E exp(C M2^2) with C the exponential-moment constant.
StabilityReport exponential_moment_check(const RandomDrift& drift2, const AnalysisConstants& constants,
                                         const BrownianEnsemble& noise, unsigned workers = 1);

std::string weighted_estimate_json(const WeightedEstimate& w, std::uint64_t seed);

}  // namespace rsde
