#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rsde/sde.hpp"
#include "rsde/stats.hpp"

namespace rsde {

/// D^i_t X_s for every grid time s >= t from the closed-form representation
///   D_t X_s = e^{G(t,s)} ( int_t^s D_t b2(u) e^{-G(t,u)} du + sigma_i ),
///   G(t,u) = int_t^u (b1' + b2')(r, X_r) dr,
/// with left-point sums on the grid. Entry j of the result is D_t X_{t_{kt+j}}.
std::vector<double> malliavin_sweep(const SdeProblem& problem, const BrownianPath& path, std::span<const double> x,
                                    std::size_t kt, std::size_t i);

/// Single value of the representation above; exactly 0 when t > s.
double malliavin_explicit(const SdeProblem& problem, const BrownianPath& path, std::span<const double> x, double t,
                          double s, std::size_t i);

/// Unit perturbation of increment kt in component i: shifting the path by eps
/// times it moves B_u by eps e_i for every u past t_kt + dt.
CameronMartinShift cell_shift(const TimeGrid& grid, std::size_t d, std::size_t kt, std::size_t i);

/// Symmetric difference (X_s(B + eps h) - X_s(B - eps h)) / (2 eps) along the
/// cell shift at t, with b2 re-read on the shifted paths.
double malliavin_fd_oracle(const SdeProblem& problem, const BrownianPath& path, double t, double s, std::size_t i,
                           double eps);

/// Default oracle step 1e-4 (1 + |x0|).
double default_fd_step(double x0);

/// Ensemble means of D^i_t X_s on a (t, s) grid.
struct MalliavinGrid {
    std::vector<double> t;
    std::vector<double> s;
    std::size_t d = 1;
    std::size_t n_paths = 0;
    std::vector<Estimate> cells;  // [ti][si][i]; zero when t > s

    const Estimate& at(std::size_t ti, std::size_t si, std::size_t i) const {
        return cells[(ti * s.size() + si) * d + i];
    }
};

MalliavinGrid malliavin_grid(const SdeProblem& problem, const BrownianEnsemble& noise, const std::vector<double>& t,
                             const std::vector<double>& s, unsigned workers = 1);

/// CSV with columns t, s, i, mean, se (directions counted from 1).
void write_malliavin_csv(std::ostream& out, const MalliavinGrid& grid);

/// Power-law fit E|D_t X_s - D_t' X_s|^2 ~ C |t - t'|^slope.
struct HolderFit {
    double slope = 0;
    double constant = 0;
    bool degenerate = false;  // every difference vanished
    std::vector<double> gaps;
    std::vector<double> second_moments;
};

/// Pairs of t values below s with gaps in [min_gap, max_gap]; when both bounds
/// are zero they default to [5 dt, (s - t0)/4]. Uses direction i.
HolderFit holder_diagnostic(const SdeProblem& problem, const BrownianEnsemble& noise, double s,
                            const std::vector<double>& t_list, std::size_t i = 0, double min_gap = 0,
                            double max_gap = 0, unsigned workers = 1);

/// sup over t of E|D_t X^n_s|^2 (summed over directions) per mollification level.
struct MomentScanRow {
    int level = 0;
    double sup_second_moment = 0;
    double se_at_sup = 0;
    double t_at_sup = 0;
};

struct MomentScan {
    std::vector<MomentScanRow> rows;
    bool growth_flag = false;  // a level exceeds twice its predecessor
    double uniform_bound = 0;  // twice the smallest level's value
    bool within_uniform_bound = true;
};

MomentScan moment_bound_scan(const MollifiedFamily& family, const SdeProblem& base, const BrownianEnsemble& noise,
                             const std::vector<int>& levels, double s, const std::vector<double>& t_list,
                             unsigned workers = 1);

/// E[(int_{t0}^{t0+h} b'(u, x + sigma . B_u) du)^n] over a list of h.
struct DerivativeMoments {
    std::vector<double> h;
    std::vector<Estimate> lhs;
    std::vector<double> rhs_shape;  // k^n (1 + |x|^n) (n/2)! h^{n/2}
    std::optional<double> fitted_exponent;
};

DerivativeMoments integrated_derivative_moments(const DeterministicDrift& b, double x, int n, double t0,
                                                const std::vector<double>& h, const std::vector<double>& sigma,
                                                std::size_t n_paths, std::uint64_t seed, double dt, unsigned workers = 1);

}  // namespace rsde
