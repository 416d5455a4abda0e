#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rsde/sde.hpp"
#include "rsde/stats.hpp"

namespace rsde {

/// Solution X^{s,x} started from x at grid time s on a given path; entries
/// before s are left at x.
std::vector<double> solve_from(const SdeProblem& problem, const BrownianPath& path, double s, double x);

/// exp of the left-point sum of (b1' + b2')(u, X_u) over [s, t] along a solution path.
double flow_derivative_explicit(const SdeProblem& problem, const BrownianPath& path, std::span<const double> x,
                                double s, double t);

/// (X^{s,x+eps}_t - X^{s,x-eps}_t) / (2 eps) on identical noise.
double flow_derivative_fd(const SdeProblem& problem, const BrownianPath& path, double s, double x, double t,
                          double eps);

/// Uniform quadrature grid in x.
struct XGrid {
    double lo = -6;
    double hi = 6;
    std::size_t points = 481;

    double at(std::size_t j) const { return lo + (hi - lo) * static_cast<double>(j) / (points - 1.0); }
    double spacing() const { return (hi - lo) / (points - 1.0); }
};

/// Per-path flow derivatives over an x grid.
struct FlowDerivativeGrid {
    XGrid x;
    std::size_t n_paths = 0;
    std::vector<double> values;  // [path][x]
};

FlowDerivativeGrid flow_derivative_grid(const SdeProblem& problem, const BrownianEnsemble& noise, const XGrid& xs,
                                        double s, double t, unsigned workers = 1);

/// E|d/dx X^{s,x}_t|^p per x with a least-squares fit of log E against x^2.
struct FlowMomentTable {
    std::vector<double> x;
    std::vector<Estimate> moment;
    double fit_slope = 0;
    double fit_intercept = 0;
};

FlowMomentTable flow_moment_bound(const SdeProblem& problem, const BrownianEnsemble& noise, double p, const XGrid& xs,
                                  double s, double t, unsigned workers = 1);

struct WeightFunction {
    std::string name;
    std::function<double(double)> w;
    std::function<double(double)> log_w;  // log w, -inf where w vanishes
};

WeightFunction exp_quartic_weight();
WeightFunction gaussian_weight();
WeightFunction indicator_weight(double half_width);
/// Catalog keys: exp-quartic, gaussian, indicator.
WeightFunction make_weight(const std::string& key, double half_width = 1.0);
std::vector<std::string> weight_keys();

struct AdmissibilityEntry {
    double c = 0;
    double integral = 0;
    bool finite = false;
};

struct AdmissibilityCertificate {
    std::string weight;
    std::vector<AdmissibilityEntry> entries;
    bool admissible() const;
};

/// Quadrature of int e^{c x^2} w(x) dx for each c; divergent when the
/// integrand does not decay by |x| = 1024.
AdmissibilityCertificate weight_admissibility(const WeightFunction& w, const std::vector<double>& c_list);

/// Monte Carlo of E[((int |X^x_t|^p w dx)^{1/p} + (int |d/dx X^x_t|^p w dx)^{1/p})^2]
/// with trapezoid quadrature on the x grid, skipping nodes where w < 1e-16.
struct SobolevReport {
    double p = 2;
    std::string weight_id;
    Estimate norm;
    XGrid x_grid;
    int mollification_level = 0;
    std::size_t nodes_used = 0;
};

SobolevReport weighted_sobolev_norm(const SdeProblem& problem, const BrownianEnsemble& noise, const WeightFunction& w,
                                    double p, const XGrid& xs, double s, double t, unsigned workers = 1);

std::string sobolev_report_json(const SobolevReport& r);

/// Power-law fits of E|X^{s1,x1}_t - X^{s2,x2}_t|^p in the s gap and in the x gap.
struct HolderFlowFit {
    std::vector<double> s_gaps, s_moments;
    std::vector<double> x_gaps, x_moments;
    std::optional<double> s_slope;
    std::optional<double> x_slope;
};

HolderFlowFit holder_flow_diagnostic(const SdeProblem& problem, const BrownianEnsemble& noise, double p, double s,
                                     double x, double t, const std::vector<double>& s_gaps,
                                     const std::vector<double>& x_gaps, unsigned workers = 1);

}  // namespace rsde
