#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "rsde/checks.hpp"

namespace rsde {

/// Outcome of one subcommand: check results plus what to write.
struct RunReport {
    std::string subcommand;
    std::string mode;  // "preset" or "config"
    std::vector<CheckResult> checks;
    std::string error;  // set when the run stopped early
    bool passed() const;
};

/// Config-driven run of one diagnostic. ExplosionDetected is caught and
/// recorded in the report with the results gathered so far.
RunReport run(const ExperimentConfig& config);

/// Acceptance preset of a subcommand (sobolev-norm uses its default config).
RunReport run_preset(const std::string& subcommand, const CheckOptions& options);

/// summary.json content: byte-identical for identical inputs.
std::string summary_json(const RunReport& report, const ExperimentConfig* config,
                         const std::vector<std::string>& artifacts);

/// Writes summary.json, metadata.json and the CSV tables into `dir`.
std::vector<std::string> write_outputs(const RunReport& report, const ExperimentConfig* config,
                                       const std::string& dir, const std::vector<std::string>& argv);

/// Drift keys, weight keys and diagnostic names.
std::string list_catalog();

/// Exit status 0 pass, 1 check failure or explosion, 2 usage or config error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rsde
