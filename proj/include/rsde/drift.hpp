#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rsde/paths.hpp"

namespace rsde {

/// Deterministic drift part b1(t, x) of linear growth: |b1(t,x)| <= k (1 + |x|).
struct DeterministicDrift {
    std::string name;
    std::function<double(double, double)> eval;
    std::function<double(double, double)> eval_dx;  // empty unless smooth
    /// Optional fused evaluation of value and x-derivative.
    std::function<double(double, double, double*)> eval_both;
    double k = 0;
    bool smooth = false;
    /// Locations in x where the drift is discontinuous or not differentiable.
    std::vector<double> breakpoints;

    double operator()(double t, double x) const { return eval(t, x); }
    bool has_derivative() const { return static_cast<bool>(eval_dx); }
    double value_and_slope(double t, double x, double* slope) const {
        if (eval_both) return eval_both(t, x, slope);
        *slope = eval_dx(t, x);
        return eval(t, x);
    }
};

/// (b1(t,.) * rho_{1/n}) chi_n: convolution with a bump of width 1/n, then a
/// smooth cutoff equal to 1 on [-n, n] and 0 outside [-n-1, n+1].
DeterministicDrift mollify(const DeterministicDrift& b1, int n);

/// The sequence of mollified drifts b_{1,n}.
struct MollifiedFamily {
    DeterministicDrift base;

    DeterministicDrift level(int n) const { return mollify(base, n); }
    static double width(int n) { return 1.0 / n; }
    static double cutoff_radius(int n) { return n; }
};

/// Sampling region for bound checks.
struct SampleBox {
    double t0 = 0, T = 1;
    double x_lo = -10, x_hi = 10;
    std::size_t nt = 1000, nx = 1000;
};

/// max over the sampled box of |b1(t,z)| / (1 + |z|): a lower bound of the sup norm of b1/(1+|z|).
double linear_growth_norm(const DeterministicDrift& b1, const SampleBox& box);

/// Read access to a driving path that may still be under construction:
/// a bound drift evaluated at step k reads only increments 0..k-1.
struct NoiseView {
    const TimeGrid* grid = nullptr;
    std::size_t d = 1;
    const double* increments = nullptr;  // [step][component]

    static NoiseView of(const BrownianPath& path) {
        return {&path.grid(), path.dim(), path.increments().data()};
    }
};

/// A random drift b2 attached to one noise path. Evaluations are indexed by
/// grid step; instances cache running path functionals and are not shared
/// between threads.
class BoundRandomDrift {
public:
    virtual ~BoundRandomDrift() = default;
    /// b2(t_k, x)
    virtual double eval(std::size_t k, double x) = 0;
    /// d/dx b2(t_k, x)
    virtual double eval_dx(std::size_t k, double x) = 0;
    /// D^i_{t_j} b2(t_k, x) with j = k_deriv.
    virtual double malliavin(std::size_t k_deriv, std::size_t k, double x, std::size_t i) = 0;
    /// M2(omega): bound of |b2| + |b2_x| over the grid (needs the whole path).
    virtual double m2_bound() = 0;
    /// Bound of |D_{t_j} b2(t_k, .)| over j in [k_s, k_t] and k in [k_s, k_t].
    virtual double m2_tilde_bound(std::size_t k_s, std::size_t k_t) = 0;
};

class RandomDriftModel {
public:
    virtual ~RandomDriftModel() = default;
    virtual std::unique_ptr<BoundRandomDrift> bind(const NoiseView& noise) const = 0;
};

/// Random drift part b2(t, x, omega): bounded, adapted and smooth in x.
class RandomDrift {
public:
    RandomDrift(std::string name, std::shared_ptr<const RandomDriftModel> model, bool x_independent,
                bool is_zero = false)
        : name_(std::move(name)), model_(std::move(model)), x_independent_(x_independent), zero_(is_zero) {}

    const std::string& name() const { return name_; }
    bool x_independent() const { return x_independent_; }
    bool is_zero() const { return zero_; }

    std::unique_ptr<BoundRandomDrift> bind(const NoiseView& noise) const { return model_->bind(noise); }
    std::unique_ptr<BoundRandomDrift> bind(const BrownianPath& path) const { return bind(NoiseView::of(path)); }

    /// One-off evaluations at grid time t (slow path, rebinding each call).
    double eval(double t, double x, const BrownianPath& path) const;
    double eval_dx(double t, double x, const BrownianPath& path) const;
    double malliavin_eval(double t_deriv, double s, double x, const BrownianPath& path, std::size_t i) const;
    double m2_bound(const BrownianPath& path) const;
    double m2_tilde_bound(double s, double t, const BrownianPath& path) const;

private:
    std::string name_;
    std::shared_ptr<const RandomDriftModel> model_;
    bool x_independent_;
    bool zero_;
};

}  // namespace rsde
