#include "app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "rsde/catalog.hpp"
#include "rsde/flow.hpp"
#include "rsde/girsanov.hpp"
#include "rsde/haar.hpp"
#include "rsde/localtime.hpp"
#include "rsde/malliavin.hpp"
#include "rsde/parallel.hpp"

namespace rsde {

bool RunReport::passed() const {
    if (!error.empty()) return false;
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

std::string csv_of(const std::string& header, const std::vector<std::vector<double>>& rows) {
    std::ostringstream os;
    os.precision(17);
    os << header << '\n';
    for (const auto& r : rows) {
        for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << r[j];
        os << '\n';
    }
    return os.str();
}

SdeProblem build_problem(const ExperimentConfig& c) {
    const auto& cat = builtin_drifts();
    DeterministicDrift b1 = cat.make_b1(c.drift.key, c.drift.params);
    if (c.level > 0) b1 = mollify(b1, c.level);
    auto p = make_problem(b1, cat.make_b2(c.random_drift.key, c.random_drift.params), c.sigma, c.x0,
                          TimeGrid(c.t0, c.T, c.steps));
    p.level = c.level;
    return p;
}

BrownianEnsemble ensemble_of(const ExperimentConfig& c, const SdeProblem& p, std::uint64_t seed_offset = 0) {
    return {p.grid, p.dim(), c.seed + seed_offset, c.paths};
}

/// Times inside the grid, used when a list is not configured.
std::vector<double> fractions(const ExperimentConfig& c, std::initializer_list<double> f) {
    std::vector<double> out;
    for (double v : f) {
        const TimeGrid g(c.t0, c.T, c.steps);
        out.push_back(g.time(static_cast<std::size_t>(std::llround(v * static_cast<double>(c.steps)))));
    }
    return out;
}

CheckResult make_check(const std::string& title) {
    CheckResult r;
    r.title = title;
    r.pass = true;
    return r;
}

void simulate(const ExperimentConfig& c, RunReport& rep) {
    const auto p = build_problem(c);
    const auto noise = ensemble_of(c, p);
    auto r = make_check("simulation completes without explosion");
    const auto sol = euler_maruyama(p, noise, c.workers);
    std::vector<double> xt(sol.n_paths);
    for (std::size_t q = 0; q < sol.n_paths; ++q) xt[q] = sol.value(q, p.grid.n_steps());
    const auto e = mc_estimate(xt);
    r.metrics = {{"mean_x_T", e.mean}, {"se_x_T", e.se}};
    r.detail = "E X_T = " + num(e.mean) + " +/- " + num(e.se);
    SolutionGrid head = sol;
    head.n_paths = std::min<std::size_t>(sol.n_paths, static_cast<std::size_t>(c.params.number("csv_paths", 10)));
    head.values.resize(head.n_paths * p.grid.n_points());
    std::ostringstream os;
    write_solution_csv(os, head);
    r.tables.push_back({"solution.csv", os.str()});
    rep.checks.push_back(std::move(r));

    if (c.params.numbers.count("levels")) {
        auto cr = make_check("Cauchy distances across mollification levels");
        std::vector<int> levels;
        for (double v : c.params.list("levels", {})) levels.push_back(static_cast<int>(v));
        const MollifiedFamily fam{builtin_drifts().make_b1(c.drift.key, c.drift.params)};
        const auto sols = solve_mollified_sequence(fam, p.drift2, c.sigma, c.x0, p.grid, noise, levels, c.workers);
        const auto cauchy = cauchy_l2_diagnostic(sols, c.T);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < levels.size(); ++i)
            for (std::size_t j = i + 1; j < levels.size(); ++j)
                rows.push_back({double(levels[i]), double(levels[j]), cauchy.distance[i][j]});
        cr.metrics = {{"max_tail_distance", cauchy.max_tail}};
        cr.detail = "largest distance among refined levels " + num(cauchy.max_tail) + " (informational)";
        cr.tables.push_back({"cauchy.csv", csv_of("level_m,level_n,l2_distance", rows)});
        rep.checks.push_back(std::move(cr));
    }
}

void girsanov(const ExperimentConfig& c, RunReport& rep) {
    const auto p = build_problem(c);
    const double tol = c.params.number("tolerance_se", 3.0);
    const auto noise = ensemble_of(c, p);
    auto w = make_check("E Z_T = 1");
    const auto z = weight_means(p, noise, {p.grid.n_steps()}, c.workers).front();
    const double zs = z.se > 0 ? std::abs(z.mean - 1) / z.se : (z.mean == 1 ? 0.0 : INFINITY);
    w.pass = zs <= tol;
    w.metrics = {{"mean_z", z.mean}, {"se", z.se}, {"z_score", zs}};
    w.detail = "E Z_T = " + num(z.mean) + ", " + num(zs) + " SE from 1";
    rep.checks.push_back(std::move(w));

    auto x = make_check("weak and strong estimates of E X_T agree");
    const auto weak = weak_solution_sampler(p, noise, [](std::span<const double> v) { return v.back(); }, c.workers);
    const auto sol = euler_maruyama(p, ensemble_of(c, p, 1), c.workers);
    std::vector<double> xt(sol.n_paths);
    for (std::size_t q = 0; q < sol.n_paths; ++q) xt[q] = sol.value(q, p.grid.n_steps());
    const auto strong = mc_estimate(xt);
    const double combined = std::hypot(weak.se, strong.se);
    const double gap = std::abs(weak.estimate - strong.mean);
    x.pass = gap <= tol * combined && !weak.degenerate;
    x.metrics = {{"weak_estimate", weak.estimate}, {"weak_se", weak.se},   {"n_eff", weak.n_eff},
                 {"strong_estimate", strong.mean}, {"strong_se", strong.se}, {"combined_se", combined}};
    x.detail = "weak " + num(weak.estimate) + " vs strong " + num(strong.mean) + ", combined SE " + num(combined) +
               (weak.degenerate ? " (degenerate weights)" : "");
    rep.checks.push_back(std::move(x));
}

void malliavin(const ExperimentConfig& c, RunReport& rep) {
    const auto p = build_problem(c);
    const auto ts = c.params.list("t", fractions(c, {0.25, 0.5}));
    const auto ss = c.params.list("s", fractions(c, {0.75, 1.0}));
    const double eps = c.params.number("eps", 1e-4), tol = c.params.number("tolerance", 1e-2);
    const auto n_fd = std::min<std::size_t>(c.paths, static_cast<std::size_t>(c.params.number("fd_paths", 20)));
    const auto noise = ensemble_of(c, p);

    auto g = make_check("ensemble means of D_t X_s");
    const auto mg = malliavin_grid(p, noise, ts, ss, c.workers);
    for (std::size_t a = 0; a < ts.size(); ++a)
        for (std::size_t b = 0; b < ss.size(); ++b)
            for (std::size_t i = 0; i < p.dim(); ++i)
                g.metrics.push_back({"D[t=" + num(ts[a]) + ",s=" + num(ss[b]) + ",i=" + std::to_string(i + 1) + "]",
                                     mg.at(a, b, i).mean});
    std::ostringstream os;
    write_malliavin_csv(os, mg);
    g.tables.push_back({"malliavin_grid.csv", os.str()});
    g.detail = std::to_string(g.metrics.size()) + " cells over " + std::to_string(c.paths) + " paths";
    rep.checks.push_back(std::move(g));

    auto f = make_check("explicit derivative matches finite differences");
    std::vector<std::vector<double>> rows(n_fd);
    parallel_for(n_fd, c.workers, [&](std::size_t q) {
        const auto path = noise.path(q);
        const auto x = solve_path(p, path);
        for (double t : ts)
            for (double s : ss) {
                if (!(t < s)) continue;
                for (std::size_t i = 0; i < p.dim(); ++i) {
                    const double e = malliavin_explicit(p, path, x, t, s, i);
                    const double d = malliavin_fd_oracle(p, path, t, s, i, eps);
                    const double err = std::abs(e - d) / std::max(std::abs(d), 1e-300);
                    rows[q].insert(rows[q].end(), {double(q), t, s, double(i + 1), e, d, err});
                }
            }
    });
    std::vector<std::vector<double>> flat;
    double worst = 0;
    for (const auto& r : rows)
        for (std::size_t j = 0; j < r.size(); j += 7) {
            flat.emplace_back(r.begin() + j, r.begin() + j + 7);
            worst = std::max(worst, r[j + 6]);
        }
    f.pass = worst <= tol;
    f.metrics = {{"max_rel_err", worst}, {"paths", double(n_fd)}};
    f.detail = "max relative error " + num(worst) + " (limit " + num(tol) + ")";
    f.tables.push_back({"malliavin_fd.csv", csv_of("path_id,t,s,i,explicit,fd,rel_err", flat)});
    rep.checks.push_back(std::move(f));
}

void holder(const ExperimentConfig& c, RunReport& rep) {
    const auto p = build_problem(c);
    const auto noise = ensemble_of(c, p);
    const double s = c.params.list("s", fractions(c, {0.8})).front();
    std::vector<double> ts = c.params.list("t", {});
    if (ts.empty())
        for (int j = 0; j <= 60; ++j) ts.push_back(c.t0 + (s - c.t0) * 0.75 * j / 60.0);
    auto h = make_check("Holder exponent of t -> D_t X_s");
    const auto fit = holder_diagnostic(p, noise, s, ts, 0, 0, 0, c.workers);
    h.pass = fit.degenerate || fit.slope > 0;
    h.metrics = {{"slope", fit.slope}, {"constant", fit.constant}, {"degenerate", fit.degenerate ? 1.0 : 0.0}};
    h.detail = fit.degenerate ? "all differences vanish" : "fitted slope " + num(fit.slope);
    std::vector<std::vector<double>> rows;
    for (std::size_t j = 0; j < fit.gaps.size(); ++j) rows.push_back({fit.gaps[j], fit.second_moments[j]});
    h.tables.push_back({"holder_fit.csv", csv_of("gap,second_moment", rows)});
    rep.checks.push_back(std::move(h));

    if (c.params.numbers.count("levels")) {
        auto m = make_check("second moments stay bounded across levels");
        std::vector<int> levels;
        for (double v : c.params.list("levels", {})) levels.push_back(static_cast<int>(v));
        const MollifiedFamily fam{builtin_drifts().make_b1(c.drift.key, c.drift.params)};
        const auto scan = moment_bound_scan(fam, p, noise, levels, s, ts, c.workers);
        std::vector<std::vector<double>> mrows;
        for (const auto& row : scan.rows) {
            mrows.push_back({double(row.level), row.sup_second_moment, row.se_at_sup, row.t_at_sup});
            m.metrics.push_back({"level_" + std::to_string(row.level), row.sup_second_moment});
        }
        m.pass = !scan.growth_flag;
        m.detail = scan.growth_flag ? "a level more than doubles its predecessor" : "no growth across levels";
        m.tables.push_back({"moment_scan.csv", csv_of("level,sup_second_moment,se,t_at_sup", mrows)});
        rep.checks.push_back(std::move(m));
    }
}

void localtime(const ExperimentConfig& c, RunReport& rep) {
    const auto p = build_problem(c);
    const auto noise = ensemble_of(c, p);
    const double tol = c.params.number("tolerance", 0.05);
    const auto f = integrand_from_drift(p.drift1);

    auto routes = make_check("decomposition and derivative routes agree in mean");
    const auto n_routes = std::min<std::size_t>(c.paths, static_cast<std::size_t>(c.params.number("route_paths", 200)));
    const TimeGrid& g = p.grid;
    RouteComparison cmp;
    cmp.route_a.resize(n_routes);
    cmp.route_b.resize(n_routes);
    cmp.rel_err.resize(n_routes);
    const double band_t = g.t0() + static_cast<double>(kBoundaryBand) * g.dt();
    parallel_for(n_routes, c.workers, [&](std::size_t q) {
        const auto path = noise.path(q);
        std::vector<double> y(g.n_points());
        for (std::size_t k = 0; k < y.size(); ++k) y[k] = c.x0 + path.value(k, 0);
        cmp.route_a[q] = lt_via_derivative(f, y, g, g.T(), band_t).value;
        cmp.route_b[q] = lt_brownian(f, path, c.x0, g.T(), g.t0()).value;
        cmp.rel_err[q] = std::abs(cmp.route_b[q] - cmp.route_a[q]) / std::max(std::abs(cmp.route_a[q]), 1e-300);
    });
    const auto ea = mc_estimate(cmp.route_a), eb = mc_estimate(cmp.route_b);
    const double z = z_score(ea, eb);
    const double within = static_cast<double>(std::count_if(cmp.rel_err.begin(), cmp.rel_err.end(),
                                                            [&](double e) { return e <= tol; })) /
                          static_cast<double>(n_routes);
    routes.pass = z <= 3.0;
    routes.metrics = {{"mean_derivative", ea.mean}, {"mean_decomposition", eb.mean}, {"z_score", z},
                      {"frac_within_tolerance", within}};
    routes.detail = "means " + num(z) + " SE apart; " + num(100 * within) + "% of paths within tolerance";
    std::ostringstream os;
    write_route_csv(os, cmp);
    routes.tables.push_back({"localtime_routes.csv", os.str()});
    rep.checks.push_back(std::move(routes));

    auto mall = make_check("local-time Malliavin route matches the explicit one");
    const double t = c.params.list("t", fractions(c, {0.2})).front();
    const double s = c.params.list("s", fractions(c, {1.0})).front();
    const std::size_t n_m = std::min<std::size_t>(c.paths, 10);
    std::vector<std::vector<double>> rows(n_m);
    parallel_for(n_m, c.workers, [&](std::size_t q) {
        const auto path = noise.path(q);
        const auto x = solve_path(p, path);
        const double lt = malliavin_localtime(p, path, x, t, s, 0);
        const double ex = malliavin_explicit(p, path, x, t, s, 0);
        rows[q] = {double(q), lt, ex, std::abs(lt - ex) / std::max(std::abs(ex), 1e-300)};
    });
    double worst = 0;
    for (const auto& r : rows) worst = std::max(worst, r[3]);
    mall.pass = worst <= tol;
    mall.metrics = {{"max_rel_err", worst}, {"calibrated_sign", double(localtime_sign_calibration().sign)}};
    mall.detail = "max relative error " + num(worst) + " (limit " + num(tol) + ")";
    mall.tables.push_back({"localtime_malliavin.csv", csv_of("path_id,localtime,explicit,rel_err", rows)});
    rep.checks.push_back(std::move(mall));
}

void flow(const ExperimentConfig& c, RunReport& rep) {
    const auto p = build_problem(c);
    const auto noise = ensemble_of(c, p);
    const double s = c.params.list("s", {c.t0}).front(), t = c.params.list("t", {c.T}).front();
    const auto xs = c.params.list("x", {c.x0 - 1, c.x0, c.x0 + 1});
    const double eps = c.params.number("eps", 1e-4), tol = c.params.number("tolerance", 1e-2);
    auto r = make_check("explicit flow derivative matches finite differences");
    std::vector<std::vector<double>> rows(c.paths);
    parallel_for(c.paths, c.workers, [&](std::size_t q) {
        const auto path = noise.path(q);
        for (double x : xs) {
            const double e = flow_derivative_explicit(p, path, solve_from(p, path, s, x), s, t);
            const double f = flow_derivative_fd(p, path, s, x, t, eps);
            rows[q].insert(rows[q].end(), {double(q), x, e, f, std::abs(e - f) / std::max(std::abs(f), 1e-300)});
        }
    });
    std::vector<std::vector<double>> flat;
    double worst = 0;
    for (const auto& row : rows)
        for (std::size_t j = 0; j < row.size(); j += 5) {
            flat.emplace_back(row.begin() + j, row.begin() + j + 5);
            worst = std::max(worst, row[j + 4]);
        }
    r.pass = worst <= tol;
    r.metrics = {{"max_rel_err", worst}};
    r.detail = "max relative error " + num(worst) + " (limit " + num(tol) + ")";
    r.tables.push_back({"flow_fd.csv", csv_of("path_id,x,explicit,fd,rel_err", flat)});
    rep.checks.push_back(std::move(r));
}

void sobolev(const ExperimentConfig& c, RunReport& rep) {
    const auto p = build_problem(c);
    const auto w = make_weight(c.params.text("weight", "exp-quartic"), c.params.number("half_width", 1.0));
    XGrid xs;
    xs.lo = c.params.number("x_lo", xs.lo);
    xs.hi = c.params.number("x_hi", xs.hi);
    xs.points = static_cast<std::size_t>(c.params.number("x_points", double(xs.points)));
    const double pw = c.params.number("p", 2.0);
    const double s = c.params.number("s", c.t0), t = c.params.number("t", c.T);
    auto r = make_check("weighted Sobolev norm is finite");
    const auto rep_norm = weighted_sobolev_norm(p, ensemble_of(c, p), w, pw, xs, s, t, c.workers);
    r.pass = std::isfinite(rep_norm.norm.mean);
    r.metrics = {{"norm", rep_norm.norm.mean}, {"se", rep_norm.norm.se}, {"nodes_used", double(rep_norm.nodes_used)}};
    r.detail = "norm " + num(rep_norm.norm.mean) + " +/- " + num(rep_norm.norm.se) + " (" + w.name + ", p=" + num(pw) +
               ")";
    r.tables.push_back({"sobolev.csv", csv_of("n_paths,norm,se,nodes_used",
                                              {{double(c.paths), rep_norm.norm.mean, rep_norm.norm.se,
                                                double(rep_norm.nodes_used)}})});
    rep.checks.push_back(std::move(r));
}

void compactness(const ExperimentConfig& c, RunReport& rep) {
    const double alpha = c.params.number("alpha", 0.2), beta = c.params.number("beta", 0.3);
    const auto K = static_cast<std::size_t>(c.params.number("depth", 10));
    if (K < 2 || K > 16) throw std::invalid_argument("depth must lie in [2, 16]");
    const std::size_t N = std::size_t{1} << K;
    std::vector<std::vector<double>> family;
    for (std::size_t k = 0; k <= K / 2; ++k) family.push_back(haar_wavelet(K, k, 0));
    const TimeGrid g(0.0, 1.0, N);
    for (std::size_t q = 0; q < c.paths; ++q) {
        const auto path = sample_brownian(g, 1, {c.seed, q});
        std::vector<double> f(N);
        for (std::size_t i = 0; i < N; ++i) f[i] = 0.5 * (path.value(i, 0) + path.value(i + 1, 0));
        family.push_back(std::move(f));
    }
    std::vector<double> ratios(family.size());
    parallel_for(family.size(), c.workers, [&](std::size_t j) { ratios[j] = compactness_ratio(family[j], alpha, beta); });
    auto sorted = ratios;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const double median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    auto r = make_check("compactness ratio is uniformly bounded");
    r.pass = sorted.back() <= 2.0 * median;
    r.metrics = {{"max_ratio", sorted.back()}, {"median_ratio", median}};
    r.detail = "max/median " + num(sorted.back() / median) + " (limit 2)";
    std::vector<std::vector<double>> rows;
    for (std::size_t j = 0; j < ratios.size(); ++j) rows.push_back({double(j), ratios[j]});
    r.tables.push_back({"compactness.csv", csv_of("function_id,ratio", rows)});
    rep.checks.push_back(std::move(r));
}

void constants(const ExperimentConfig& c, RunReport& rep) {
    const auto p = build_problem(c);
    const auto k = analysis_constants(p.drift1.k, p.dim(), c.sigma, c.T - c.t0);
    auto r = make_check("analysis constants");
    r.metrics = {{"k1", k.k1},
                 {"exp_moment_constant", k.exp_moment_constant},
                 {"small_horizon", k.small_horizon},
                 {"gronwall_constant", k.gronwall_constant},
                 {"delta0_limit", k.delta0_limit},
                 {"delta0", k.delta0},
                 {"pasting_step", k.pasting_step}};
    r.pass = std::all_of(r.metrics.begin(), r.metrics.end(), [](const Metric& m) { return std::isfinite(m.value); });
    r.detail = "small horizon " + num(k.small_horizon) + ", exponential-moment constant " +
               num(k.exp_moment_constant) + (c.T - c.t0 <= k.small_horizon ? "" : " (horizon exceeds small horizon)");
    rep.checks.push_back(std::move(r));
}

ExperimentConfig sobolev_default_config() {
    ExperimentConfig c;
    c.diagnostic = "sobolev-norm";
    c.drift.key = "sign";
    c.level = 100;
    c.x0 = 0;
    c.T = 0.5 * analysis_constants(1.0, 1, {1.0}, 1.0).small_horizon;
    c.steps = 100;
    c.paths = 10000;
    c.seed = 112;
    return c;
}

}  // namespace

RunReport run(const ExperimentConfig& config) {
    RunReport rep{config.diagnostic, "config", {}, {}};
    static const std::map<std::string, void (*)(const ExperimentConfig&, RunReport&)> table{
        {"simulate", simulate},       {"girsanov-check", girsanov},     {"malliavin-check", malliavin},
        {"holder-scan", holder},      {"localtime-check", localtime},   {"flow-check", flow},
        {"sobolev-norm", sobolev},    {"compactness-scan", compactness}, {"constants", constants}};
    auto it = table.find(config.diagnostic);
    if (it == table.end()) throw std::invalid_argument("unknown diagnostic '" + config.diagnostic + "'");
    try {
        it->second(config, rep);
    } catch (const ExplosionDetected& e) {
        rep.error = e.what();
    } catch (const WeightOverflow& e) {
        rep.error = e.what();
    }
    return rep;
}

RunReport run_preset(const std::string& subcommand, const CheckOptions& options) {
    if (subcommand == "sobolev-norm") {
        auto c = sobolev_default_config();
        if (options.seed) c.seed = *options.seed;
        if (options.paths) c.paths = *options.paths;
        c.workers = options.workers;
        auto rep = run(c);
        rep.mode = "preset";
        return rep;
    }
    RunReport rep{subcommand, "preset", {}, {}};
    const auto checks = checks_for(subcommand);
    if (checks.empty()) throw std::invalid_argument("unknown diagnostic '" + subcommand + "'");
    for (const auto* c : checks) {
        try {
            rep.checks.push_back(c->run(options));
        } catch (const ExplosionDetected& e) {
            rep.error = e.what();
            break;
        }
    }
    return rep;
}

std::string summary_json(const RunReport& report, const ExperimentConfig* config,
                         const std::vector<std::string>& artifacts) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["subcommand"] = report.subcommand;
    j["mode"] = report.mode;
    if (config) {
        ordered_json cfg;
        auto drift = [](const DriftSpec& d) {
            ordered_json o;
            o["key"] = d.key;
            o["params"] = ordered_json::object();
            for (const auto& [k, v] : d.params) o["params"][k] = v;
            return o;
        };
        cfg["drift"] = drift(config->drift);
        cfg["random_drift"] = drift(config->random_drift);
        cfg["level"] = config->level;
        cfg["sigma"] = config->sigma;
        cfg["x0"] = config->x0;
        cfg["grid"] = {{"t0", config->t0}, {"T", config->T}, {"steps", config->steps}};
        cfg["paths"] = config->paths;
        cfg["seed"] = config->seed;
        ordered_json params = ordered_json::object();
        for (const auto& [k, v] : config->params.numbers) params[k] = v;
        for (const auto& [k, v] : config->params.strings) params[k] = v;
        cfg["params"] = params;
        j["config"] = cfg;
    }
    j["pass"] = report.passed();
    if (!report.error.empty()) j["error"] = report.error;
    ordered_json checks = ordered_json::array();
    for (const auto& c : report.checks) {
        ordered_json o;
        if (c.id) o["id"] = c.id;
        o["name"] = c.title;
        o["pass"] = c.pass;
        o["detail"] = c.detail;
        ordered_json m = ordered_json::object();
        for (const auto& metric : c.metrics) m[metric.name] = metric.value;
        o["metrics"] = m;
        checks.push_back(o);
    }
    j["checks"] = checks;
    j["artifacts"] = artifacts;
    return j.dump(2) + "\n";
}

std::vector<std::string> write_outputs(const RunReport& report, const ExperimentConfig* config,
                                       const std::string& dir, const std::vector<std::string>& argv) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::string> names;
    for (const auto& c : report.checks)
        for (const auto& t : c.tables) {
            std::ofstream(fs::path(dir) / t.name) << t.content;
            names.push_back(t.name);
        }
    std::ofstream(fs::path(dir) / "summary.json") << summary_json(report, config, names);

    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::ostringstream ts;
    ts << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
    nlohmann::ordered_json meta;
    meta["created"] = ts.str();
    meta["argv"] = argv;
    std::ofstream(fs::path(dir) / "metadata.json") << meta.dump(2) << "\n";
    names.push_back("summary.json");
    names.push_back("metadata.json");
    return names;
}

std::string list_catalog() {
    std::ostringstream os;
    const auto& cat = builtin_drifts();
    auto entries = [&](const std::vector<CatalogEntry>& list) {
        for (const auto& e : list) {
            os << "  " << std::left << std::setw(20) << e.key << e.description;
            if (!e.params.empty()) {
                os << " [";
                for (std::size_t j = 0; j < e.params.size(); ++j) os << (j ? ", " : "") << e.params[j];
                os << "]";
            }
            os << '\n';
        }
    };
    os << "deterministic drifts (problem.drift):\n";
    entries(cat.b1);
    os << "random drifts (problem.random_drift):\n";
    entries(cat.b2);
    os << "weights (sobolev-norm params.weight):\n";
    for (const auto& w : weight_keys()) os << "  " << w << '\n';
    os << "diagnostics:\n";
    for (const auto& d : diagnostic_names()) {
        os << "  " << std::left << std::setw(20) << d;
        const auto owned = checks_for(d);
        if (owned.empty()) os << "standalone";
        for (std::size_t j = 0; j < owned.size(); ++j)
            os << (j ? ", " : "acceptance ") << owned[j]->id << " " << owned[j]->title;
        os << '\n';
    }
    return os.str();
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulation and diagnostics for SDEs with random, irregular drift"};
    app.name("rsde_cli");
    app.require_subcommand(0, 1);
    struct Flags {
        std::string config, out;
        std::optional<std::uint64_t> seed;
        std::optional<std::size_t> paths;
    } flags;
    for (const auto& name : diagnostic_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " diagnostic");
        sub->add_option("--config", flags.config, "YAML experiment file; without it the acceptance preset runs");
        sub->add_option("--seed", flags.seed, "base seed (U64)");
        sub->add_option("--paths", flags.paths, "number of paths")->check(CLI::PositiveNumber);
        sub->add_option("--out", flags.out, "output directory");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }
    if (app.get_subcommands().empty()) {
        out << list_catalog();
        return 0;
    }
    const std::string sub = app.get_subcommands().front()->get_name();
    const std::vector<std::string> args(argv, argv + argc);
    try {
        RunReport rep;
        std::optional<ExperimentConfig> cfg;
        if (!flags.config.empty()) {
            cfg = load_config(flags.config, sub);
            if (flags.seed) cfg->seed = *flags.seed;
            if (flags.paths) cfg->paths = *flags.paths;
            rep = run(*cfg);
        } else {
            CheckOptions o;
            o.seed = flags.seed;
            o.paths = flags.paths;
            rep = run_preset(sub, o);
        }
        std::string dir = flags.out;
        if (dir.empty()) dir = cfg && !cfg->out_dir.empty() ? cfg->out_dir : "rsde_out";
        write_outputs(rep, cfg ? &*cfg : nullptr, dir, args);
        for (const auto& c : rep.checks)
            out << (c.pass ? "[PASS] " : "[FAIL] ") << (c.id ? std::to_string(c.id) + " " : "") << c.title << ": "
                << c.detail << '\n';
        if (!rep.error.empty()) err << "error: " << rep.error << " (diagnostics partial)\n";
        out << "results in " << dir << '\n';
        return rep.passed() ? 0 : 1;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "invalid setup: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace rsde
