#pragma once

#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "rsde/drift.hpp"

namespace rsde {

DeterministicDrift zero_drift();
DeterministicDrift constant_drift(double c);
/// a * x, optionally with x clamped to [-cap, cap].
DeterministicDrift ou_drift(double a, double cap = std::numeric_limits<double>::infinity());
/// -k * sign(x)
DeterministicDrift sign_drift(double k = 1.0);
/// `left` for x < at, `right` for x >= at.
DeterministicDrift step_drift(double left, double right, double at = 0.0);
DeterministicDrift sine_drift(double amp = 1.0, double freq = 1.0);
/// amp * exp(-1/(1 - x^2)) on (-1, 1): smooth with compact support.
DeterministicDrift bump_drift(double amp = 1.0);
/// k (1 + |x|): saturates the linear-growth bound.
DeterministicDrift growth_drift(double k);

RandomDrift zero_random_drift();
/// amp * tanh(B^c_t) with D_s b2(t) = amp sech^2(B^c_t) 1_{s <= t} in direction c.
RandomDrift tanh_b2(double amp = 1.0, std::size_t component = 0);
/// Wiener integral sum_i int_0^t alpha_i(s) dB^i_s with D^i_s b2(t) = alpha_i(s) 1_{s <= t}.
RandomDrift wiener_integral_b2(std::function<double(double, std::size_t)> alpha, std::string name = "wiener-integral-b2");
RandomDrift wiener_integral_b2(double alpha = 1.0);
/// amp * sin(x) * tanh(B^c_t): an x-dependent random drift.
RandomDrift sinx_tanh_b2(double amp = 1.0, std::size_t component = 0);

using Params = std::map<std::string, double>;

struct CatalogEntry {
    std::string key;
    std::string description;
    std::vector<std::string> params;
};

/// String-keyed drift catalog used by the command line harness.
struct DriftCatalog {
    std::vector<CatalogEntry> b1;
    std::vector<CatalogEntry> b2;

    DeterministicDrift make_b1(const std::string& key, const Params& params = {}) const;
    RandomDrift make_b2(const std::string& key, const Params& params = {}) const;
    bool has_b1(const std::string& key) const;
    bool has_b2(const std::string& key) const;
};

const DriftCatalog& builtin_drifts();

}  // namespace rsde
