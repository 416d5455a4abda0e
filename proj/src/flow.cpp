#include "rsde/flow.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <json.hpp>
#include <limits>

#include "rsde/parallel.hpp"

namespace rsde {

namespace {

void require_derivative(const SdeProblem& problem) {
    if (!problem.drift1.has_derivative())
        throw std::invalid_argument("drift '" + problem.drift1.name + "' has no spatial derivative; mollify it first");
}

/// Flow runs are limited to horizons below the small-time bound of the drift's growth constant.
void require_small_horizon(const SdeProblem& problem) {
    if (!(problem.drift1.k > 0)) return;
    const double horizon = problem.grid.T() - problem.grid.t0();
    const double bound = analysis_constants(problem.drift1.k, problem.dim(), problem.sigma, horizon).small_horizon;
    if (horizon > bound * (1 + 1e-12))
        throw std::invalid_argument("horizon " + std::to_string(horizon) + " exceeds the small-time bound " +
                                    std::to_string(bound));
}

struct FlowPoint {
    double x;
    double derivative;
};

/// Euler step from (ks, x0) to kt, accumulating the exponent of the flow derivative.
FlowPoint flow_point(const SdeProblem& problem, const BrownianPath& path, BoundRandomDrift& b2, std::size_t ks,
                     std::size_t kt, double x0) {
    const TimeGrid& g = problem.grid;
    const std::size_t d = problem.dim();
    const bool has_b2 = !problem.drift2.is_zero();
    const double dt = g.dt();
    double x = x0, exponent = 0;
    for (std::size_t j = ks; j < kt; ++j) {
        double slope;
        double drift = problem.drift1.value_and_slope(g.time(j), x, &slope);
        if (has_b2) {
            drift += b2.eval(j, x);
            slope += b2.eval_dx(j, x);
        }
        exponent += slope * dt;
        double noise = 0;
        for (std::size_t i = 0; i < d; ++i) noise += problem.sigma[i] * path.increment(j, i);
        x = x + drift * dt + noise;
        if (!std::isfinite(x) || std::abs(x) > kExplosionThreshold) throw ExplosionDetected(path.stream().index, j + 1);
    }
    return {x, std::exp(exponent)};
}

}  // namespace

std::vector<double> solve_from(const SdeProblem& problem, const BrownianPath& path, double s, double x) {
    problem.validate();
    const std::size_t ks = problem.grid.index_of(s);
    std::vector<double> out(problem.grid.n_points(), x);
    auto b2 = problem.drift2.bind(path);
    solve_path(problem, NoiseView::of(path), *b2, out, ks, x, path.stream().index);
    return out;
}

double flow_derivative_explicit(const SdeProblem& problem, const BrownianPath& path, std::span<const double> x,
                                double s, double t) {
    require_derivative(problem);
    const TimeGrid& g = problem.grid;
    if (x.size() != g.n_points()) throw std::invalid_argument("solution path does not match grid");
    const std::size_t ks = g.index_of(s), kt = g.index_of(t);
    if (ks > kt) throw std::invalid_argument("flow derivative needs s <= t");
    auto b2 = problem.drift2.bind(path);
    const bool has_b2 = !problem.drift2.is_zero();
    double exponent = 0;
    for (std::size_t j = ks; j < kt; ++j) {
        double slope = problem.drift1.eval_dx(g.time(j), x[j]);
        if (has_b2) slope += b2->eval_dx(j, x[j]);
        exponent += slope * g.dt();
    }
    return std::exp(exponent);
}

double flow_derivative_fd(const SdeProblem& problem, const BrownianPath& path, double s, double x, double t,
                          double eps) {
    if (!(eps > 0)) throw std::invalid_argument("finite-difference step must be positive");
    const std::size_t kt = problem.grid.index_of(t);
    const auto up = solve_from(problem, path, s, x + eps);
    const auto down = solve_from(problem, path, s, x - eps);
    return (up[kt] - down[kt]) / (2.0 * eps);
}

FlowDerivativeGrid flow_derivative_grid(const SdeProblem& problem, const BrownianEnsemble& noise, const XGrid& xs,
                                        double s, double t, unsigned workers) {
    problem.validate();
    require_derivative(problem);
    const std::size_t ks = problem.grid.index_of(s), kt = problem.grid.index_of(t);
    FlowDerivativeGrid out{xs, noise.n_paths, std::vector<double>(noise.n_paths * xs.points)};
    parallel_for(noise.n_paths, workers, [&](std::size_t p) {
        const BrownianPath path = noise.path(p);
        for (std::size_t j = 0; j < xs.points; ++j) {
            auto b2 = problem.drift2.bind(path);
            out.values[p * xs.points + j] = flow_point(problem, path, *b2, ks, kt, xs.at(j)).derivative;
        }
    });
    return out;
}

FlowMomentTable flow_moment_bound(const SdeProblem& problem, const BrownianEnsemble& noise, double p, const XGrid& xs,
                                  double s, double t, unsigned workers) {
    if (!(p >= 1)) throw std::invalid_argument("moment order must be at least 1");
    require_small_horizon(problem);
    const FlowDerivativeGrid grid = flow_derivative_grid(problem, noise, xs, s, t, workers);
    FlowMomentTable table;
    std::vector<double> col(noise.n_paths), lx, ly;
    for (std::size_t j = 0; j < xs.points; ++j) {
        for (std::size_t q = 0; q < noise.n_paths; ++q) col[q] = std::pow(grid.values[q * xs.points + j], p);
        table.x.push_back(xs.at(j));
        table.moment.push_back(mc_estimate(col));
        lx.push_back(xs.at(j) * xs.at(j));
        ly.push_back(std::log(table.moment.back().mean));
    }
    bool distinct = false;
    for (double v : lx)
        if (v != lx.front()) distinct = true;
    if (distinct) {
        const LinearFit f = least_squares(lx, ly);
        table.fit_slope = f.slope;
        table.fit_intercept = f.intercept;
    }
    return table;
}

WeightFunction exp_quartic_weight() {
    return {"exp-quartic", [](double x) { return std::exp(-x * x * x * x); },
            [](double x) { return -x * x * x * x; }};
}

WeightFunction gaussian_weight() {
    return {"gaussian", [](double x) { return std::exp(-x * x); }, [](double x) { return -x * x; }};
}

WeightFunction indicator_weight(double half_width) {
    if (!(half_width > 0)) throw std::invalid_argument("indicator half width must be positive");
    return {"indicator", [half_width](double x) { return std::abs(x) <= half_width ? 1.0 : 0.0; },
            [half_width](double x) {
                return std::abs(x) <= half_width ? 0.0 : -std::numeric_limits<double>::infinity();
            }};
}

std::vector<std::string> weight_keys() { return {"exp-quartic", "gaussian", "indicator"}; }

WeightFunction make_weight(const std::string& key, double half_width) {
    if (key == "exp-quartic") return exp_quartic_weight();
    if (key == "gaussian") return gaussian_weight();
    if (key == "indicator") return indicator_weight(half_width);
    throw std::invalid_argument("unknown weight '" + key + "'");
}

bool AdmissibilityCertificate::admissible() const {
    for (const auto& e : entries)
        if (!e.finite) return false;
    return true;
}

AdmissibilityCertificate weight_admissibility(const WeightFunction& w, const std::vector<double>& c_list) {
    AdmissibilityCertificate cert;
    cert.weight = w.name;
    for (double c : c_list) {
        auto phi = [&](double x) { return c * x * x + w.log_w(x); };
        AdmissibilityEntry e;
        e.c = c;
        double L = 0;
        for (double cand = 1; cand <= 1024; cand *= 2) {
            const double here = std::max(phi(cand), phi(-cand));
            const double beyond = std::max(phi(2 * cand), phi(-2 * cand));
            if (here < -700 && beyond <= here) {
                L = cand;
                break;
            }
        }
        if (L > 0) {
            double peak = -std::numeric_limits<double>::infinity();
            for (int j = 0; j <= 4000; ++j) peak = std::max(peak, phi(-L + 2 * L * j / 4000.0));
            auto g = [&](double x) { return std::exp(phi(x) - peak); };
            const double scaled =
                boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, -L, L, 20, 1e-10);
            e.integral = std::exp(peak) * scaled;
            e.finite = std::isfinite(e.integral);
        } else {
            e.integral = std::numeric_limits<double>::infinity();
        }
        cert.entries.push_back(e);
    }
    return cert;
}

SobolevReport weighted_sobolev_norm(const SdeProblem& problem, const BrownianEnsemble& noise, const WeightFunction& w,
                                    double p, const XGrid& xs, double s, double t, unsigned workers) {
    problem.validate();
    require_derivative(problem);
    require_small_horizon(problem);
    if (!(p >= 2)) throw std::invalid_argument("Sobolev exponent must be at least 2");
    if (!weight_admissibility(w, {0.0, 1.0, 10.0}).admissible())
        throw std::invalid_argument("weight '" + w.name + "' is not admissible");
    const std::size_t ks = problem.grid.index_of(s), kt = problem.grid.index_of(t);

    std::vector<double> nodes, quad;
    for (std::size_t j = 0; j < xs.points; ++j) {
        const double wx = w.w(xs.at(j));
        if (!(wx >= 1e-16)) continue;
        const double end = (j == 0 || j + 1 == xs.points) ? 0.5 : 1.0;
        nodes.push_back(xs.at(j));
        quad.push_back(end * xs.spacing() * wx);
    }

    std::vector<double> samples(noise.n_paths);
    parallel_for(noise.n_paths, workers, [&](std::size_t q) {
        const BrownianPath path = noise.path(q);
        double value_part = 0, slope_part = 0;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            auto b2 = problem.drift2.bind(path);
            const FlowPoint fp = flow_point(problem, path, *b2, ks, kt, nodes[j]);
            value_part += quad[j] * std::pow(std::abs(fp.x), p);
            slope_part += quad[j] * std::pow(std::abs(fp.derivative), p);
        }
        const double norm = std::pow(value_part, 1.0 / p) + std::pow(slope_part, 1.0 / p);
        samples[q] = norm * norm;
    });
    SobolevReport r;
    r.p = p;
    r.weight_id = w.name;
    r.norm = mc_estimate(samples);
    r.x_grid = xs;
    r.mollification_level = problem.level;
    r.nodes_used = nodes.size();
    return r;
}

std::string sobolev_report_json(const SobolevReport& r) {
    nlohmann::ordered_json j;
    j["p"] = r.p;
    j["weight_id"] = r.weight_id;
    j["norm_estimate"] = r.norm.mean;
    j["se"] = r.norm.se;
    j["n_paths"] = r.norm.n;
    j["x_grid"] = {{"lo", r.x_grid.lo}, {"hi", r.x_grid.hi}, {"points", r.x_grid.points}, {"nodes_used", r.nodes_used}};
    j["mollification_level"] = r.mollification_level;
    return j.dump(2);
}

HolderFlowFit holder_flow_diagnostic(const SdeProblem& problem, const BrownianEnsemble& noise, double p, double s,
                                     double x, double t, const std::vector<double>& s_gaps,
                                     const std::vector<double>& x_gaps, unsigned workers) {
    problem.validate();
    if (!(p >= 2)) throw std::invalid_argument("moment order must be at least 2");
    const TimeGrid& g = problem.grid;
    const std::size_t ks = g.index_of(s), kt = g.index_of(t);
    std::vector<std::size_t> ks2;
    for (double gap : s_gaps) {
        const std::size_t k = g.index_of(s + gap);
        if (k > kt) throw std::invalid_argument("shifted start lies beyond t");
        ks2.push_back(k);
    }
    const std::size_t ns = s_gaps.size(), nx = x_gaps.size();
    std::vector<double> diffs((ns + nx) * noise.n_paths);
    parallel_for(noise.n_paths, workers, [&](std::size_t q) {
        const BrownianPath path = noise.path(q);
        auto end_value = [&](std::size_t k0, double x0) {
            auto b2 = problem.drift2.bind(path);
            std::vector<double> out(g.n_points(), x0);
            solve_path(problem, NoiseView::of(path), *b2, out, k0, x0, q);
            return out[kt];
        };
        const double base = end_value(ks, x);
        for (std::size_t a = 0; a < ns; ++a)
            diffs[a * noise.n_paths + q] = std::pow(std::abs(base - end_value(ks2[a], x)), p);
        for (std::size_t a = 0; a < nx; ++a)
            diffs[(ns + a) * noise.n_paths + q] = std::pow(std::abs(base - end_value(ks, x + x_gaps[a])), p);
    });
    HolderFlowFit fit;
    auto fit_block = [&](std::size_t offset, const std::vector<double>& gaps, std::vector<double>& moments,
                         std::optional<double>& slope) {
        std::vector<double> lx, ly;
        for (std::size_t a = 0; a < gaps.size(); ++a) {
            const double m =
                mc_estimate(std::span<const double>(diffs).subspan((offset + a) * noise.n_paths, noise.n_paths)).mean;
            moments.push_back(m);
            if (m > 0 && gaps[a] > 0) {
                lx.push_back(std::log(gaps[a]));
                ly.push_back(std::log(m));
            }
        }
        if (lx.size() >= 2) slope = least_squares(lx, ly).slope;
    };
    fit.s_gaps = s_gaps;
    fit.x_gaps = x_gaps;
    fit_block(0, s_gaps, fit.s_moments, fit.s_slope);
    fit_block(ns, x_gaps, fit.x_moments, fit.x_slope);
    return fit;
}

}  // namespace rsde
