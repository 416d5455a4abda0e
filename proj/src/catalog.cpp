#include "rsde/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rsde {

DeterministicDrift zero_drift() {
    DeterministicDrift b;
    b.name = "zero";
    b.eval = [](double, double) { return 0.0; };
    b.eval_dx = [](double, double) { return 0.0; };
    b.smooth = true;
    return b;
}

DeterministicDrift constant_drift(double c) {
    DeterministicDrift b;
    b.name = "constant";
    b.eval = [c](double, double) { return c; };
    b.eval_dx = [](double, double) { return 0.0; };
    b.k = std::abs(c);
    b.smooth = true;
    return b;
}

DeterministicDrift ou_drift(double a, double cap) {
    if (!(cap > 0)) throw std::invalid_argument("ou cap must be positive");
    DeterministicDrift b;
    b.name = "ou";
    b.k = std::abs(a);
    if (std::isinf(cap)) {
        b.eval = [a](double, double x) { return a * x; };
        b.eval_dx = [a](double, double) { return a; };
        b.smooth = true;
    } else {
        b.eval = [a, cap](double, double x) { return a * std::clamp(x, -cap, cap); };
        b.breakpoints = {-cap, cap};
    }
    return b;
}

DeterministicDrift sign_drift(double k) {
    DeterministicDrift b;
    b.name = "sign";
    b.eval = [k](double, double x) { return x > 0 ? -k : (x < 0 ? k : 0.0); };
    b.k = std::abs(k);
    b.breakpoints = {0.0};
    return b;
}

DeterministicDrift step_drift(double left, double right, double at) {
    DeterministicDrift b;
    b.name = "step";
    b.eval = [=](double, double x) { return x < at ? left : right; };
    b.k = std::max(std::abs(left), std::abs(right));
    b.breakpoints = {at};
    return b;
}

DeterministicDrift sine_drift(double amp, double freq) {
    DeterministicDrift b;
    b.name = "sine";
    b.eval = [=](double, double x) { return amp * std::sin(freq * x); };
    b.eval_dx = [=](double, double x) { return amp * freq * std::cos(freq * x); };
    b.k = std::abs(amp);
    b.smooth = true;
    return b;
}

DeterministicDrift bump_drift(double amp) {
    DeterministicDrift b;
    b.name = "bump";
    b.eval = [amp](double, double x) {
        const double q = 1.0 - x * x;
        return q > 0 ? amp * std::exp(-1.0 / q) : 0.0;
    };
    b.eval_dx = [amp](double, double x) {
        const double q = 1.0 - x * x;
        return q > 0 ? amp * std::exp(-1.0 / q) * (-2.0 * x / (q * q)) : 0.0;
    };
    b.k = std::abs(amp) * std::exp(-1.0);
    b.smooth = true;
    return b;
}

DeterministicDrift growth_drift(double k) {
    DeterministicDrift b;
    b.name = "growth";
    b.eval = [k](double, double x) { return k * (1.0 + std::abs(x)); };
    b.k = std::abs(k);
    b.breakpoints = {0.0};
    return b;
}

namespace {

/// Running values of one path component, extended on demand so that a query
/// at step k reads only increments 0..k-1.
class RunningValue {
public:
    RunningValue(const NoiseView& noise, std::size_t component) : noise_(noise), c_(component) {
        if (component >= noise.d) throw std::invalid_argument("drift component exceeds noise dimension");
        values_.reserve(noise.grid->n_points());
        values_.push_back(0.0);
    }

    double at(std::size_t k) {
        while (values_.size() <= k) {
            const std::size_t j = values_.size() - 1;
            values_.push_back(values_.back() + noise_.increments[j * noise_.d + c_]);
        }
        return values_[k];
    }

private:
    NoiseView noise_;
    std::size_t c_;
    std::vector<double> values_;
};

class ZeroBound final : public BoundRandomDrift {
public:
    double eval(std::size_t, double) override { return 0; }
    double eval_dx(std::size_t, double) override { return 0; }
    double malliavin(std::size_t, std::size_t, double, std::size_t) override { return 0; }
    double m2_bound() override { return 0; }
    double m2_tilde_bound(std::size_t, std::size_t) override { return 0; }
};

struct ZeroModel final : RandomDriftModel {
    std::unique_ptr<BoundRandomDrift> bind(const NoiseView&) const override { return std::make_unique<ZeroBound>(); }
};

/// amp * g(x) * tanh(B^c_t) with g = 1 or g = sin.
class TanhBound final : public BoundRandomDrift {
public:
    TanhBound(const NoiseView& noise, double amp, std::size_t c, bool sin_x)
        : b_(noise, c), amp_(amp), c_(c), sin_x_(sin_x) {}

    double eval(std::size_t k, double x) override { return amp_ * g(x) * std::tanh(b_.at(k)); }
    double eval_dx(std::size_t k, double x) override {
        return sin_x_ ? amp_ * std::cos(x) * std::tanh(b_.at(k)) : 0.0;
    }
    double malliavin(std::size_t kd, std::size_t k, double x, std::size_t i) override {
        if (i != c_ || kd > k) return 0.0;
        const double c = std::cosh(b_.at(k));
        return amp_ * g(x) / (c * c);
    }
    double m2_bound() override { return 2.0 * std::abs(amp_); }
    double m2_tilde_bound(std::size_t, std::size_t) override { return std::abs(amp_); }

private:
    double g(double x) const { return sin_x_ ? std::sin(x) : 1.0; }
    RunningValue b_;
    double amp_;
    std::size_t c_;
    bool sin_x_;
};

struct TanhModel final : RandomDriftModel {
    double amp;
    std::size_t c;
    bool sin_x;
    TanhModel(double a, std::size_t comp, bool s) : amp(a), c(comp), sin_x(s) {}
    std::unique_ptr<BoundRandomDrift> bind(const NoiseView& noise) const override {
        return std::make_unique<TanhBound>(noise, amp, c, sin_x);
    }
};

class WienerBound final : public BoundRandomDrift {
public:
    WienerBound(const NoiseView& noise, std::function<double(double, std::size_t)> alpha)
        : noise_(noise), alpha_(std::move(alpha)) {
        values_.reserve(noise.grid->n_points());
        values_.push_back(0.0);
    }

    double eval(std::size_t k, double) override { return at(k); }
    double eval_dx(std::size_t, double) override { return 0.0; }
    double malliavin(std::size_t kd, std::size_t k, double, std::size_t i) override {
        return kd <= k ? alpha_(noise_.grid->time(kd), i) : 0.0;
    }
    double m2_bound() override {
        double m = 0;
        for (std::size_t k = 0; k < noise_.grid->n_points(); ++k) m = std::max(m, std::abs(at(k)));
        return m;
    }
    double m2_tilde_bound(std::size_t ks, std::size_t kt) override {
        double m = 0;
        for (std::size_t j = ks; j <= kt; ++j)
            for (std::size_t i = 0; i < noise_.d; ++i) m = std::max(m, std::abs(alpha_(noise_.grid->time(j), i)));
        return m;
    }

private:
    double at(std::size_t k) {
        while (values_.size() <= k) {
            const std::size_t j = values_.size() - 1;
            const double t = noise_.grid->time(j);
            double dv = 0;
            for (std::size_t i = 0; i < noise_.d; ++i) dv += alpha_(t, i) * noise_.increments[j * noise_.d + i];
            values_.push_back(values_.back() + dv);
        }
        return values_[k];
    }

    NoiseView noise_;
    std::function<double(double, std::size_t)> alpha_;
    std::vector<double> values_;
};

struct WienerModel final : RandomDriftModel {
    std::function<double(double, std::size_t)> alpha;
    explicit WienerModel(std::function<double(double, std::size_t)> a) : alpha(std::move(a)) {}
    std::unique_ptr<BoundRandomDrift> bind(const NoiseView& noise) const override {
        return std::make_unique<WienerBound>(noise, alpha);
    }
};

double param(const Params& p, const std::string& key, double fallback) {
    const auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

void check_params(const std::string& key, const Params& p, const std::vector<std::string>& allowed) {
    for (const auto& [name, value] : p) {
        if (std::find(allowed.begin(), allowed.end(), name) == allowed.end())
            throw std::invalid_argument("drift '" + key + "' has no parameter '" + name + "'");
        (void)value;
    }
}

}  // namespace

RandomDrift zero_random_drift() {
    return RandomDrift("zero", std::make_shared<ZeroModel>(), true, true);
}

RandomDrift tanh_b2(double amp, std::size_t component) {
    return RandomDrift("tanh-b2", std::make_shared<TanhModel>(amp, component, false), true, amp == 0);
}

RandomDrift sinx_tanh_b2(double amp, std::size_t component) {
    return RandomDrift("sinx-tanh-b2", std::make_shared<TanhModel>(amp, component, true), false, amp == 0);
}

RandomDrift wiener_integral_b2(std::function<double(double, std::size_t)> alpha, std::string name) {
    return RandomDrift(std::move(name), std::make_shared<WienerModel>(std::move(alpha)), true);
}

RandomDrift wiener_integral_b2(double alpha) {
    return wiener_integral_b2([alpha](double, std::size_t i) { return i == 0 ? alpha : 0.0; });
}

const DriftCatalog& builtin_drifts() {
    static const DriftCatalog catalog{
        {
            {"zero", "b1 = 0", {}},
            {"constant", "b1 = c", {"c"}},
            {"ou", "b1 = a x, x clamped to [-cap, cap] when cap is given", {"a", "cap"}},
            {"sign", "b1 = -k sign(x)", {"k"}},
            {"step", "b1 = left for x < at, right otherwise", {"left", "right", "at"}},
            {"sine", "b1 = amp sin(freq x)", {"amp", "freq"}},
            {"bump", "b1 = amp exp(-1/(1-x^2)) on (-1,1)", {"amp"}},
        },
        {
            {"zero", "b2 = 0", {}},
            {"tanh-b2", "b2 = amp tanh(B_t) (first component)", {"amp"}},
            {"wiener-integral-b2", "b2 = alpha B_t, the Wiener integral of a constant alpha", {"alpha"}},
            {"sinx-tanh-b2", "b2 = amp sin(x) tanh(B_t), x-dependent", {"amp"}},
        },
    };
    return catalog;
}

bool DriftCatalog::has_b1(const std::string& key) const {
    return std::any_of(b1.begin(), b1.end(), [&](const CatalogEntry& e) { return e.key == key; });
}

bool DriftCatalog::has_b2(const std::string& key) const {
    return std::any_of(b2.begin(), b2.end(), [&](const CatalogEntry& e) { return e.key == key; });
}

DeterministicDrift DriftCatalog::make_b1(const std::string& key, const Params& p) const {
    for (const auto& e : b1)
        if (e.key == key) check_params(key, p, e.params);
    if (key == "zero") return zero_drift();
    if (key == "constant") return constant_drift(param(p, "c", 1.0));
    if (key == "ou") return ou_drift(param(p, "a", -1.0), param(p, "cap", std::numeric_limits<double>::infinity()));
    if (key == "sign") return sign_drift(param(p, "k", 1.0));
    if (key == "step") return step_drift(param(p, "left", 1.0), param(p, "right", -1.0), param(p, "at", 0.0));
    if (key == "sine") return sine_drift(param(p, "amp", 1.0), param(p, "freq", 1.0));
    if (key == "bump") return bump_drift(param(p, "amp", 1.0));
    throw std::invalid_argument("unknown b1 drift '" + key + "'");
}

RandomDrift DriftCatalog::make_b2(const std::string& key, const Params& p) const {
    for (const auto& e : b2)
        if (e.key == key) check_params(key, p, e.params);
    if (key == "zero") return zero_random_drift();
    if (key == "tanh-b2") return tanh_b2(param(p, "amp", 1.0));
    if (key == "wiener-integral-b2") return wiener_integral_b2(param(p, "alpha", 1.0));
    if (key == "sinx-tanh-b2") return sinx_tanh_b2(param(p, "amp", 1.0));
    throw std::invalid_argument("unknown b2 drift '" + key + "'");
}

}  // namespace rsde
