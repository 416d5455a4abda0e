#include "rsde/malliavin.hpp"

#include <algorithm>
#include <cmath>

#include "rsde/parallel.hpp"

namespace rsde {

namespace {

/// prefix[j] = sum_{m < j} (b1' + b2')(t_m, X_m) dt along one solution path.
std::vector<double> exponent_prefix(const SdeProblem& problem, BoundRandomDrift& b2, std::span<const double> x) {
    if (!problem.drift1.has_derivative())
        throw std::invalid_argument("drift '" + problem.drift1.name + "' has no spatial derivative; mollify it first");
    const TimeGrid& g = problem.grid;
    const bool has_b2 = !problem.drift2.is_zero();
    std::vector<double> prefix(g.n_points(), 0.0);
    for (std::size_t m = 0; m < g.n_steps(); ++m) {
        double slope = problem.drift1.eval_dx(g.time(m), x[m]);
        if (has_b2) slope += b2.eval_dx(m, x[m]);
        prefix[m + 1] = prefix[m] + slope * g.dt();
    }
    return prefix;
}

/// D^i_{t_kt} X_{t_ks} given the exponent prefix sums.
double malliavin_from_prefix(const SdeProblem& problem, BoundRandomDrift& b2, std::span<const double> x,
                             const std::vector<double>& prefix, std::size_t kt, std::size_t ks, std::size_t i) {
    if (kt > ks) return 0.0;
    double integral = 0;
    if (!problem.drift2.is_zero()) {
        const double dt = problem.grid.dt();
        for (std::size_t j = kt; j < ks; ++j)
            integral += b2.malliavin(kt, j, x[j], i) * std::exp(-(prefix[j] - prefix[kt])) * dt;
    }
    return std::exp(prefix[ks] - prefix[kt]) * (integral + problem.sigma[i]);
}

void check_direction(const SdeProblem& problem, std::size_t i) {
    if (i >= problem.dim()) throw std::invalid_argument("direction exceeds noise dimension");
}

}  // namespace

std::vector<double> malliavin_sweep(const SdeProblem& problem, const BrownianPath& path, std::span<const double> x,
                                    std::size_t kt, std::size_t i) {
    check_direction(problem, i);
    const TimeGrid& g = problem.grid;
    if (x.size() != g.n_points() || kt > g.n_steps()) throw std::invalid_argument("solution path does not match grid");
    if (!problem.drift1.has_derivative())
        throw std::invalid_argument("drift '" + problem.drift1.name + "' has no spatial derivative; mollify it first");
    auto b2 = problem.drift2.bind(path);
    const bool has_b2 = !problem.drift2.is_zero();
    const double dt = g.dt();
    std::vector<double> out(g.n_points() - kt);
    double exponent = 0, integral = 0;
    out[0] = problem.sigma[i];
    for (std::size_t j = kt; j < g.n_steps(); ++j) {
        double slope = problem.drift1.eval_dx(g.time(j), x[j]);
        if (has_b2) {
            integral += b2->malliavin(kt, j, x[j], i) * std::exp(-exponent) * dt;
            slope += b2->eval_dx(j, x[j]);
        }
        exponent += slope * dt;
        out[j - kt + 1] = std::exp(exponent) * (integral + problem.sigma[i]);
    }
    return out;
}

double malliavin_explicit(const SdeProblem& problem, const BrownianPath& path, std::span<const double> x, double t,
                          double s, std::size_t i) {
    const TimeGrid& g = problem.grid;
    if (t > s) return 0.0;
    const std::size_t kt = g.index_of(t), ks = g.index_of(s);
    return malliavin_sweep(problem, path, x, kt, i)[ks - kt];
}

CameronMartinShift cell_shift(const TimeGrid& grid, std::size_t d, std::size_t kt, std::size_t i) {
    if (kt >= grid.n_steps() || i >= d) throw std::invalid_argument("shift cell outside the grid");
    CameronMartinShift h = CameronMartinShift::zero(grid, d);
    h.phi_dot[kt * d + i] = 1.0 / grid.dt();
    return h;
}

double malliavin_fd_oracle(const SdeProblem& problem, const BrownianPath& path, double t, double s, std::size_t i,
                           double eps) {
    if (!(eps > 0)) throw std::invalid_argument("finite-difference step must be positive");
    check_direction(problem, i);
    const TimeGrid& g = problem.grid;
    const std::size_t kt = g.index_of(t), ks = g.index_of(s);
    if (kt >= g.n_steps()) return 0.0;
    const CameronMartinShift h = cell_shift(g, problem.dim(), kt, i);
    const auto up = solve_path(problem, shift_path(path, h.scaled(eps)));
    const auto down = solve_path(problem, shift_path(path, h.scaled(-eps)));
    return (up[ks] - down[ks]) / (2.0 * eps);
}

double default_fd_step(double x0) { return 1e-4 * (1.0 + std::abs(x0)); }

MalliavinGrid malliavin_grid(const SdeProblem& problem, const BrownianEnsemble& noise, const std::vector<double>& t,
                             const std::vector<double>& s, unsigned workers) {
    problem.validate();
    const TimeGrid& g = problem.grid;
    std::vector<std::size_t> kt, ks;
    for (double v : t) kt.push_back(g.index_of(v));
    for (double v : s) ks.push_back(g.index_of(v));
    const std::size_t d = problem.dim();
    const std::size_t n_cells = t.size() * s.size() * d;
    std::vector<double> samples(n_cells * noise.n_paths, 0.0);
    parallel_for(noise.n_paths, workers, [&](std::size_t p) {
        const BrownianPath path = noise.path(p);
        const auto x = solve_path(problem, path);
        auto b2 = problem.drift2.bind(path);
        const auto prefix = exponent_prefix(problem, *b2, x);
        for (std::size_t a = 0; a < kt.size(); ++a)
            for (std::size_t b = 0; b < ks.size(); ++b)
                for (std::size_t i = 0; i < d; ++i)
                    samples[((a * ks.size() + b) * d + i) * noise.n_paths + p] =
                        malliavin_from_prefix(problem, *b2, x, prefix, kt[a], ks[b], i);
    });
    MalliavinGrid out{t, s, d, noise.n_paths, {}};
    for (std::size_t c = 0; c < n_cells; ++c)
        out.cells.push_back(
            mc_estimate(std::span<const double>(samples).subspan(c * noise.n_paths, noise.n_paths)));
    return out;
}

void write_malliavin_csv(std::ostream& out, const MalliavinGrid& grid) {
    out << "t,s,i,mean,se\n";
    const auto prec = out.precision(17);
    for (std::size_t a = 0; a < grid.t.size(); ++a)
        for (std::size_t b = 0; b < grid.s.size(); ++b)
            for (std::size_t i = 0; i < grid.d; ++i) {
                const Estimate& e = grid.at(a, b, i);
                out << grid.t[a] << ',' << grid.s[b] << ',' << (i + 1) << ',' << e.mean << ',' << e.se << '\n';
            }
    out.precision(prec);
}

HolderFit holder_diagnostic(const SdeProblem& problem, const BrownianEnsemble& noise, double s,
                            const std::vector<double>& t_list, std::size_t i, double min_gap, double max_gap,
                            unsigned workers) {
    problem.validate();
    check_direction(problem, i);
    const TimeGrid& g = problem.grid;
    const std::size_t ks = g.index_of(s);
    std::vector<std::size_t> kt;
    for (double t : t_list) {
        const std::size_t k = g.index_of(t);
        if (k >= ks) throw std::invalid_argument("Hölder diagnostic needs t values below s");
        kt.push_back(k);
    }
    std::sort(kt.begin(), kt.end());
    kt.erase(std::unique(kt.begin(), kt.end()), kt.end());
    if (kt.size() < 4) throw std::invalid_argument("Hölder diagnostic needs at least four distinct t values");
    if (min_gap == 0 && max_gap == 0) {
        min_gap = 5.0 * g.dt();
        max_gap = (s - g.t0()) / 4.0;
    }

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < kt.size(); ++a)
        for (std::size_t b = a + 1; b < kt.size(); ++b) {
            const double gap = static_cast<double>(kt[b] - kt[a]) * g.dt();
            if (gap >= min_gap * (1 - 1e-9) && gap <= max_gap * (1 + 1e-9)) pairs.emplace_back(a, b);
        }
    if (pairs.empty()) throw std::invalid_argument("no t pairs fall inside the gap window");

    std::vector<double> sq(pairs.size() * noise.n_paths);
    parallel_for(noise.n_paths, workers, [&](std::size_t p) {
        const BrownianPath path = noise.path(p);
        const auto x = solve_path(problem, path);
        auto b2 = problem.drift2.bind(path);
        const auto prefix = exponent_prefix(problem, *b2, x);
        std::vector<double> dv(kt.size());
        for (std::size_t a = 0; a < kt.size(); ++a) dv[a] = malliavin_from_prefix(problem, *b2, x, prefix, kt[a], ks, i);
        for (std::size_t q = 0; q < pairs.size(); ++q) {
            const double diff = dv[pairs[q].first] - dv[pairs[q].second];
            sq[q * noise.n_paths + p] = diff * diff;
        }
    });

    HolderFit fit;
    std::vector<double> lx, ly;
    for (std::size_t q = 0; q < pairs.size(); ++q) {
        const double gap = static_cast<double>(kt[pairs[q].second] - kt[pairs[q].first]) * g.dt();
        const double m = mc_estimate(std::span<const double>(sq).subspan(q * noise.n_paths, noise.n_paths)).mean;
        fit.gaps.push_back(gap);
        fit.second_moments.push_back(m);
        if (m > 0) {
            lx.push_back(std::log(gap));
            ly.push_back(std::log(m));
        }
    }
    bool distinct = false;
    for (double v : lx)
        if (v != lx.front()) distinct = true;
    if (lx.size() < 2 || !distinct) {
        fit.degenerate = true;
        return fit;
    }
    const LinearFit lf = least_squares(lx, ly);
    fit.slope = lf.slope;
    fit.constant = std::exp(lf.intercept);
    return fit;
}

MomentScan moment_bound_scan(const MollifiedFamily& family, const SdeProblem& base, const BrownianEnsemble& noise,
                             const std::vector<int>& levels, double s, const std::vector<double>& t_list,
                             unsigned workers) {
    if (levels.empty()) throw std::invalid_argument("at least one level is required");
    for (std::size_t j = 1; j < levels.size(); ++j)
        if (levels[j] <= levels[j - 1]) throw std::invalid_argument("levels must increase");
    const TimeGrid& g = base.grid;
    const std::size_t ks = g.index_of(s);
    std::vector<std::size_t> kt;
    for (double t : t_list) kt.push_back(g.index_of(t));
    const std::size_t d = base.dim();

    MomentScan scan;
    for (int n : levels) {
        SdeProblem problem = base;
        problem.drift1 = family.level(n);
        problem.level = n;
        problem.outside_construction = false;
        problem.validate();
        std::vector<double> sq(kt.size() * noise.n_paths);
        parallel_for(noise.n_paths, workers, [&](std::size_t p) {
            const BrownianPath path = noise.path(p);
            const auto x = solve_path(problem, path);
            auto b2 = problem.drift2.bind(path);
            const auto prefix = exponent_prefix(problem, *b2, x);
            for (std::size_t a = 0; a < kt.size(); ++a) {
                double total = 0;
                for (std::size_t i = 0; i < d; ++i) {
                    const double v = malliavin_from_prefix(problem, *b2, x, prefix, kt[a], ks, i);
                    total += v * v;
                }
                sq[a * noise.n_paths + p] = total;
            }
        });
        MomentScanRow row;
        row.level = n;
        for (std::size_t a = 0; a < kt.size(); ++a) {
            const Estimate e = mc_estimate(std::span<const double>(sq).subspan(a * noise.n_paths, noise.n_paths));
            if (a == 0 || e.mean > row.sup_second_moment) {
                row.sup_second_moment = e.mean;
                row.se_at_sup = e.se;
                row.t_at_sup = g.time(kt[a]);
            }
        }
        scan.rows.push_back(row);
    }
    scan.uniform_bound = 2.0 * scan.rows.front().sup_second_moment;
    for (std::size_t j = 0; j < scan.rows.size(); ++j) {
        if (j > 0 && scan.rows[j].sup_second_moment > 2.0 * scan.rows[j - 1].sup_second_moment) scan.growth_flag = true;
        if (scan.rows[j].sup_second_moment > scan.uniform_bound) scan.within_uniform_bound = false;
    }
    return scan;
}

DerivativeMoments integrated_derivative_moments(const DeterministicDrift& b, double x, int n, double t0,
                                                const std::vector<double>& h, const std::vector<double>& sigma,
                                                std::size_t n_paths, std::uint64_t seed, double dt, unsigned workers) {
    if (n < 2 || n % 2 != 0 || n > 8) throw std::invalid_argument("moment order must be even and at most 8");
    if (!b.has_derivative()) throw std::invalid_argument("drift must supply a spatial derivative");
    if (h.empty() || sigma.empty() || !(dt > 0) || t0 < 0) throw std::invalid_argument("invalid moment-check setup");
    const double h_max = *std::max_element(h.begin(), h.end());
    const auto n_steps = static_cast<std::size_t>(std::llround((t0 + h_max) / dt));
    const TimeGrid grid(0.0, t0 + h_max, n_steps);
    const std::size_t k0 = grid.index_of(t0);
    std::vector<std::size_t> kh;
    for (double v : h) kh.push_back(grid.index_of(t0 + v));
    const BrownianEnsemble noise{grid, sigma.size(), seed, n_paths};

    std::vector<double> powers(h.size() * n_paths);
    parallel_for(n_paths, workers, [&](std::size_t p) {
        const BrownianPath path = noise.path(p);
        std::vector<double> running(grid.n_points(), 0.0);
        double acc = 0;
        for (std::size_t k = k0; k < grid.n_steps(); ++k) {
            double bs = 0;
            for (std::size_t i = 0; i < sigma.size(); ++i) bs += sigma[i] * path.value(k, i);
            acc += b.eval_dx(grid.time(k), x + bs) * grid.dt();
            running[k + 1] = acc;
        }
        for (std::size_t j = 0; j < h.size(); ++j) powers[j * n_paths + p] = std::pow(running[kh[j]], n);
    });

    DerivativeMoments out;
    out.h = h;
    double fact = 1;
    for (int m = 2; m <= n / 2; ++m) fact *= m;
    std::vector<double> lx, ly;
    bool positive = true;
    for (std::size_t j = 0; j < h.size(); ++j) {
        out.lhs.push_back(mc_estimate(std::span<const double>(powers).subspan(j * n_paths, n_paths)));
        out.rhs_shape.push_back(std::pow(b.k, n) * (1.0 + std::pow(std::abs(x), n)) * fact * std::pow(h[j], n / 2.0));
        if (!(out.lhs.back().mean > 0)) positive = false;
        lx.push_back(std::log(h[j]));
        ly.push_back(out.lhs.back().mean > 0 ? std::log(out.lhs.back().mean) : 0.0);
    }
    if (positive && h.size() >= 2) out.fitted_exponent = least_squares(lx, ly).slope;
    return out;
}

}  // namespace rsde
