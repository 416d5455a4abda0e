#pragma once

#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rsde/sde.hpp"
#include "rsde/stats.hpp"

namespace rsde {

enum class GrowthClass { bounded, linear };

/// Integrand f(s, z) against the local time of a process.
struct SpaceTimeIntegrand {
    std::string name;
    std::function<double(double, double)> f;
    std::function<double(double, double)> f_dz;  // optional
    GrowthClass growth = GrowthClass::bounded;

    bool has_derivative() const { return static_cast<bool>(f_dz); }
};

SpaceTimeIntegrand integrand_from_drift(const DeterministicDrift& b);

/// Weighted Gaussian norm of f around x; s runs over [0, s_max].
struct HxNorm {
    double value = 0;
    double l2_term = 0;
    double moment_term = 0;
    double s_max = 1;
    bool finite = true;
};

HxNorm hx_norm(const SpaceTimeIntegrand& f, double x, double s_max = 1.0);

enum class LocalTimeRoute { derivative_identity, decomposition };

std::string route_name(LocalTimeRoute r);

struct LocalTimeIntegral {
    double value = 0;
    LocalTimeRoute route = LocalTimeRoute::decomposition;
    double t_lo = 0;  // integration window [t_lo, t_hi]
    double t_hi = 0;
    std::size_t boundary_band = 0;  // excluded steps at the start of the forward grid
};

/// -int_{t_lo}^{t_hi} f_dz(s, Y_s) ds by left-point sums, Y given on the grid.
LocalTimeIntegral lt_via_derivative(const SpaceTimeIntegrand& f, std::span<const double> y, const TimeGrid& grid,
                                    double t_hi, double t_lo = 0.0);

/// Default number of excluded steps next to the singular end of the reversed time.
inline constexpr std::size_t kBoundaryBand = 10;

/// Forward-plus-backward decomposition of int int f dL for Y = x + scale W, with
/// W a one-dimensional driver started at 0:
///   (1/scale) [ sum f(s_k, Y_k) dW_k + sum f(T - r_m, Y^_m) dW~_m
///               - sum f(T - r_m, Y^_m) W^_m / (L - r_m) dr ].
/// Both sums cover the original window [max(t_lo, band dt), t_hi].
LocalTimeIntegral lt_via_decomposition(const SpaceTimeIntegrand& f, const ReversedPath& driver, double x,
                                       double scale, double t_hi, double t_lo = 0.0,
                                       std::size_t band = kBoundaryBand);

/// The same for a Brownian path started at x (first component).
LocalTimeIntegral lt_brownian(const SpaceTimeIntegrand& f, const BrownianPath& path, double x, double t_hi,
                              double t_lo = 0.0, std::size_t band = kBoundaryBand);

/// Driver W = (X - x0)/|sigma| of a solution path, as a one-dimensional path.
BrownianPath solution_driver(std::span<const double> x, const TimeGrid& grid, double sigma_norm);

/// Sign s in D_t X_s = e^{s E(t,s)} (int_t^s D_t b2 e^{-s E(t,u)} du + sigma_i),
/// E(t,u) the local-time integral of b1 over [t,u].
struct SignCalibration {
    int sign = 0;
    double error_plus = 0;   // relative error with exponent +E
    double error_minus = 0;  // relative error with exponent -E
};

/// One-off self-test against the closed form sigma e^{a (s - t)} for b1 = a z.
const SignCalibration& localtime_sign_calibration();

/// Malliavin derivative through the local-time integral of b1; b2 must not depend on x.
double malliavin_localtime(const SdeProblem& problem, const BrownianPath& path, std::span<const double> x, double t,
                           double s, std::size_t i);

/// Same with an explicit sign (used by the calibration).
double malliavin_localtime_signed(const SdeProblem& problem, const BrownianPath& path, std::span<const double> x,
                                  double t, double s, std::size_t i, int sign);

/// Monte Carlo of E exp(k int int f dL^{B^x}) over [band dt, T] with the
/// nested-prefix stability flag. Requires T - t0 <= small_horizon.
StabilityReport localtime_exp_moment(const SpaceTimeIntegrand& f, double k, double x, const BrownianEnsemble& noise,
                                     const AnalysisConstants& constants, unsigned workers = 1);

/// CSV with columns path_id, route_a, route_b, rel_err.
struct RouteComparison {
    std::vector<double> route_a, route_b, rel_err;
};

void write_route_csv(std::ostream& out, const RouteComparison& cmp);

}  // namespace rsde
