#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsde/catalog.hpp"

namespace rsde {

/// Config problem with the source line (1-based, 0 when unknown).
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, std::size_t line, const std::string& message);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct DriftSpec {
    std::string key = "zero";
    Params params;
};

/// Diagnostic parameters: numeric lists and strings, keys checked per diagnostic.
struct DiagnosticParams {
    std::map<std::string, std::vector<double>> numbers;
    std::map<std::string, std::string> strings;

    double number(const std::string& key, double fallback) const;
    std::vector<double> list(const std::string& key, std::vector<double> fallback) const;
    std::string text(const std::string& key, const std::string& fallback) const;
};

struct ExperimentConfig {
    std::string diagnostic;
    DriftSpec drift;
    DriftSpec random_drift;
    int level = 0;  // mollification level of the drift, 0 for none
    std::vector<double> sigma{1.0};
    double x0 = 0;
    double t0 = 0;
    double T = 1;
    std::size_t steps = 1000;
    std::size_t paths = 1000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::string out_dir;
    DiagnosticParams params;
};

/// Subcommand names in documentation order.
const std::vector<std::string>& diagnostic_names();

/// Parse a YAML experiment file. Unknown keys, wrong types and unknown catalog
/// entries raise ConfigError naming the key and line. `diagnostic` is the
/// selected subcommand; a `diagnostic` entry in the file must agree with it.
ExperimentConfig parse_config(const std::string& text, const std::string& diagnostic,
                              const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path, const std::string& diagnostic);

}  // namespace rsde
