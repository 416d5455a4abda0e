#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rsde {

/// Overrides applied to a preset check.
struct CheckOptions {
    std::optional<std::uint64_t> seed;  // replaces the preset base seed
    std::optional<std::size_t> paths;   // replaces the preset path count
    unsigned workers = 1;
};

struct Metric {
    std::string name;
    double value = 0;
};

/// Bulk detail written next to the summary.
struct CsvArtifact {
    std::string name;
    std::string content;
};

struct CheckResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;  // one line, human-readable
    std::vector<Metric> metrics;
    std::vector<CsvArtifact> tables;
};

struct AcceptanceCheck {
    int id;
    std::string subcommand;
    std::string title;
    std::function<CheckResult(const CheckOptions&)> run;
};

/// Every acceptance check in id order; each is owned by exactly one subcommand.
const std::vector<AcceptanceCheck>& acceptance_checks();

std::vector<const AcceptanceCheck*> checks_for(const std::string& subcommand);

}  // namespace rsde
