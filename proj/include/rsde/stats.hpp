#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rsde {

/// Pairwise (cascade) summation; result depends only on the input order.
double pairwise_sum(std::span<const double> x);

/// Monte Carlo mean with its standard error.
struct Estimate {
    double mean = 0;
    double se = 0;
    std::size_t n = 0;
};

Estimate mc_estimate(std::span<const double> samples);

/// |a - b| measured in combined standard errors; 0 when both are exact and equal.
double z_score(const Estimate& a, const Estimate& b);

/// Estimate of E[g] on nested prefixes N/4, N/2, N of the samples.
/// `unstable` is raised when the estimate at least doubles between prefixes,
/// which is the signature of an infinite or heavy-tailed expectation.
struct StabilityReport {
    Estimate full;
    std::vector<Estimate> prefixes;
    bool unstable = false;
};

StabilityReport nested_stability(std::span<const double> samples);

/// Importance-weighted mean sum(w f)/N with standard error and effective sample size.
struct WeightedEstimate {
    double estimate = 0;
    double se = 0;
    double n_eff = 0;
    std::size_t n_paths = 0;
    bool degenerate = false;  // n_eff < 0.01 N
};

WeightedEstimate weighted_estimate(std::span<const double> weights, std::span<const double> payoffs);

/// Ordinary least squares y = intercept + slope * x.
struct LinearFit {
    double slope = 0;
    double intercept = 0;
    std::size_t n = 0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace rsde
