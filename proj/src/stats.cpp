#include "rsde/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace rsde {

double pairwise_sum(std::span<const double> x) {
    if (x.size() <= 8) {
        double s = 0;
        for (double v : x) s += v;
        return s;
    }
    const std::size_t half = x.size() / 2;
    return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

Estimate mc_estimate(std::span<const double> samples) {
    Estimate e;
    e.n = samples.size();
    if (e.n == 0) return e;
    e.mean = pairwise_sum(samples) / static_cast<double>(e.n);
    if (e.n < 2) return e;
    std::vector<double> sq(e.n);
    for (std::size_t i = 0; i < e.n; ++i) sq[i] = (samples[i] - e.mean) * (samples[i] - e.mean);
    const double var = pairwise_sum(sq) / static_cast<double>(e.n - 1);
    e.se = std::sqrt(var / static_cast<double>(e.n));
    return e;
}

double z_score(const Estimate& a, const Estimate& b) {
    const double diff = std::abs(a.mean - b.mean);
    const double se = std::sqrt(a.se * a.se + b.se * b.se);
    if (se == 0) return diff == 0 ? 0.0 : INFINITY;
    return diff / se;
}

StabilityReport nested_stability(std::span<const double> samples) {
    StabilityReport r;
    const std::size_t n = samples.size();
    for (std::size_t m : {n / 4, n / 2, n})
        if (m > 0) r.prefixes.push_back(mc_estimate(samples.first(m)));
    r.full = mc_estimate(samples);
    for (std::size_t j = 1; j < r.prefixes.size(); ++j) {
        const double prev = r.prefixes[j - 1].mean, cur = r.prefixes[j].mean;
        if (!std::isfinite(cur) || (prev > 0 && cur >= 2.0 * prev)) r.unstable = true;
    }
    if (!std::isfinite(r.full.mean)) r.unstable = true;
    return r;
}

WeightedEstimate weighted_estimate(std::span<const double> weights, std::span<const double> payoffs) {
    if (weights.size() != payoffs.size()) throw std::invalid_argument("weights and payoffs differ in length");
    WeightedEstimate w;
    w.n_paths = weights.size();
    if (w.n_paths == 0) return w;
    std::vector<double> prod(w.n_paths), wsq(w.n_paths);
    for (std::size_t i = 0; i < w.n_paths; ++i) {
        prod[i] = weights[i] * payoffs[i];
        wsq[i] = weights[i] * weights[i];
    }
    const Estimate e = mc_estimate(prod);
    w.estimate = e.mean;
    w.se = e.se;
    const double sw = pairwise_sum(weights), sw2 = pairwise_sum(wsq);
    w.n_eff = sw2 > 0 ? sw * sw / sw2 : 0.0;
    w.degenerate = w.n_eff < 0.01 * static_cast<double>(w.n_paths);
    return w;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("least squares needs two or more points");
    LinearFit f;
    f.n = x.size();
    const double nx = static_cast<double>(f.n);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < f.n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= nx;
    my /= nx;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < f.n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0) throw std::invalid_argument("least squares needs distinct abscissae");
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

}  // namespace rsde
