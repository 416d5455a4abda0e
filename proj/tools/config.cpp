#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace rsde {

ConfigError::ConfigError(const std::string& source, std::size_t line, const std::string& message)
    : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + message), line_(line) {}

double DiagnosticParams::number(const std::string& key, double fallback) const {
    auto it = numbers.find(key);
    return it == numbers.end() ? fallback : it->second.front();
}

std::vector<double> DiagnosticParams::list(const std::string& key, std::vector<double> fallback) const {
    auto it = numbers.find(key);
    return it == numbers.end() ? fallback : it->second;
}

std::string DiagnosticParams::text(const std::string& key, const std::string& fallback) const {
    auto it = strings.find(key);
    return it == strings.end() ? fallback : it->second;
}

const std::vector<std::string>& diagnostic_names() {
    static const std::vector<std::string> names{"simulate",         "girsanov-check", "malliavin-check",
                                                "holder-scan",      "localtime-check", "flow-check",
                                                "sobolev-norm",     "compactness-scan", "constants"};
    return names;
}

namespace {

/// Numeric and string parameter keys accepted by each diagnostic.
struct ParamSchema {
    std::set<std::string> numbers;
    std::set<std::string> strings;
};

const std::map<std::string, ParamSchema>& param_schemas() {
    static const std::map<std::string, ParamSchema> s{
        {"simulate", {{"levels", "csv_paths"}, {}}},
        {"girsanov-check", {{"tolerance_se"}, {}}},
        {"malliavin-check", {{"t", "s", "eps", "tolerance", "fd_paths"}, {}}},
        {"holder-scan", {{"t", "s", "levels"}, {}}},
        {"localtime-check", {{"t", "s", "tolerance", "route_paths"}, {}}},
        {"flow-check", {{"s", "t", "x", "eps", "tolerance"}, {}}},
        {"sobolev-norm", {{"p", "s", "t", "x_lo", "x_hi", "x_points", "half_width"}, {"weight"}}},
        {"compactness-scan", {{"alpha", "beta", "depth"}, {}}},
        {"constants", {{}, {}}},
    };
    return s;
}

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const {
        const auto m = n.Mark();
        throw ConfigError(source_, m.is_null() ? 0 : static_cast<std::size_t>(m.line) + 1, msg);
    }

    void require_map(const YAML::Node& n, const std::string& what) const {
        if (!n.IsMap()) fail(n, "'" + what + "' must be a table");
    }

    /// Rejects keys outside `allowed`; `prefix` names the enclosing table.
    void only_keys(const YAML::Node& n, const std::set<std::string>& allowed, const std::string& prefix) const {
        for (const auto& kv : n) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key)) fail(kv.first, "unknown key '" + prefix + key + "'");
        }
    }

    template <typename T>
    T scalar(const YAML::Node& n, const std::string& key) const {
        if (!n.IsScalar()) fail(n, "'" + key + "' must be a scalar");
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            fail(n, "'" + key + "' has an invalid value '" + n.Scalar() + "'");
        }
    }

    std::vector<double> numbers(const YAML::Node& n, const std::string& key) const {
        std::vector<double> out;
        if (n.IsSequence()) {
            for (const auto& e : n) out.push_back(scalar<double>(e, key));
            if (out.empty()) fail(n, "'" + key + "' must not be empty");
        } else {
            out.push_back(scalar<double>(n, key));
        }
        return out;
    }

    DriftSpec drift(const YAML::Node& n, const std::string& key, bool random) const {
        DriftSpec d;
        if (n.IsScalar()) {
            d.key = n.as<std::string>();
        } else {
            require_map(n, key);
            only_keys(n, {"key", "params"}, key + ".");
            if (!n["key"]) fail(n, "'" + key + ".key' is required");
            d.key = scalar<std::string>(n["key"], key + ".key");
            if (const auto p = n["params"]) {
                require_map(p, key + ".params");
                for (const auto& kv : p)
                    d.params[kv.first.as<std::string>()] =
                        scalar<double>(kv.second, key + ".params." + kv.first.as<std::string>());
            }
        }
        const auto& cat = builtin_drifts();
        if (random ? !cat.has_b2(d.key) : !cat.has_b1(d.key)) fail(n, "unknown " + key + " '" + d.key + "'");
        try {
            if (random)
                (void)cat.make_b2(d.key, d.params);
            else
                (void)cat.make_b1(d.key, d.params);
        } catch (const std::invalid_argument& e) {
            fail(n, key + ": " + e.what());
        }
        return d;
    }

private:
    std::string source_;
};

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& diagnostic, const std::string& source) {
    const auto& schemas = param_schemas();
    if (!schemas.count(diagnostic)) throw ConfigError(source, 0, "unknown diagnostic '" + diagnostic + "'");
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source, static_cast<std::size_t>(e.mark.line) + 1, e.msg);
    }
    const Reader r(source);
    ExperimentConfig c;
    c.diagnostic = diagnostic;
    if (root.IsNull()) return c;
    r.require_map(root, "document");
    r.only_keys(root, {"diagnostic", "problem", "ensemble", "output", "params"}, "");

    if (const auto d = root["diagnostic"]) {
        const auto name = r.scalar<std::string>(d, "diagnostic");
        if (name != diagnostic) r.fail(d, "'diagnostic' is '" + name + "' but the subcommand is '" + diagnostic + "'");
    }
    if (const auto p = root["problem"]) {
        r.require_map(p, "problem");
        r.only_keys(p, {"drift", "random_drift", "level", "sigma", "x0", "grid"}, "problem.");
        if (p["drift"]) c.drift = r.drift(p["drift"], "problem.drift", false);
        if (p["random_drift"]) c.random_drift = r.drift(p["random_drift"], "problem.random_drift", true);
        if (p["level"]) {
            c.level = r.scalar<int>(p["level"], "problem.level");
            if (c.level < 0) r.fail(p["level"], "'problem.level' must be non-negative");
        }
        if (p["sigma"]) {
            c.sigma = r.numbers(p["sigma"], "problem.sigma");
            double n2 = 0;
            for (double s : c.sigma) n2 += s * s;
            if (!(n2 > 0)) r.fail(p["sigma"], "'problem.sigma' must not vanish");
        }
        if (p["x0"]) c.x0 = r.scalar<double>(p["x0"], "problem.x0");
        if (const auto g = p["grid"]) {
            r.require_map(g, "problem.grid");
            r.only_keys(g, {"t0", "T", "steps"}, "problem.grid.");
            if (g["t0"]) c.t0 = r.scalar<double>(g["t0"], "problem.grid.t0");
            if (g["T"]) c.T = r.scalar<double>(g["T"], "problem.grid.T");
            if (g["steps"]) c.steps = r.scalar<std::size_t>(g["steps"], "problem.grid.steps");
            if (!(c.T > c.t0) || c.steps == 0) r.fail(g, "'problem.grid' needs T > t0 and steps >= 1");
        }
    }
    if (const auto e = root["ensemble"]) {
        r.require_map(e, "ensemble");
        r.only_keys(e, {"paths", "seed", "workers"}, "ensemble.");
        if (e["paths"]) {
            const auto n = r.scalar<long long>(e["paths"], "ensemble.paths");
            if (n < 1) r.fail(e["paths"], "'ensemble.paths' must be at least 1");
            c.paths = static_cast<std::size_t>(n);
        }
        if (e["seed"]) c.seed = r.scalar<std::uint64_t>(e["seed"], "ensemble.seed");
        if (e["workers"]) {
            const auto w = r.scalar<int>(e["workers"], "ensemble.workers");
            if (w < 1) r.fail(e["workers"], "'ensemble.workers' must be at least 1");
            c.workers = static_cast<unsigned>(w);
        }
    }
    if (const auto o = root["output"]) {
        r.require_map(o, "output");
        r.only_keys(o, {"dir"}, "output.");
        if (o["dir"]) c.out_dir = r.scalar<std::string>(o["dir"], "output.dir");
    }
    if (const auto p = root["params"]) {
        r.require_map(p, "params");
        const auto& schema = schemas.at(diagnostic);
        for (const auto& kv : p) {
            const auto key = kv.first.as<std::string>();
            if (schema.numbers.count(key))
                c.params.numbers[key] = r.numbers(kv.second, "params." + key);
            else if (schema.strings.count(key))
                c.params.strings[key] = r.scalar<std::string>(kv.second, "params." + key);
            else
                r.fail(kv.first, "unknown key 'params." + key + "' for " + diagnostic);
        }
    }
    return c;
}

ExperimentConfig load_config(const std::string& path, const std::string& diagnostic) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), diagnostic, path);
}

}  // namespace rsde
