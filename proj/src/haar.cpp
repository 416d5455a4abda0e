#include "rsde/haar.hpp"

#include <cmath>
#include <stdexcept>

namespace rsde {

namespace {

std::size_t dyadic_depth(std::size_t n) {
    if (n < 2 || (n & (n - 1)) != 0) throw std::invalid_argument("sample count must be a power of two, at least 2");
    std::size_t K = 0;
    while ((std::size_t{1} << K) < n) ++K;
    return K;
}

void check_alpha(double alpha) {
    if (!(alpha > 0 && alpha < 0.5)) throw std::invalid_argument("alpha must lie in (0, 1/2)");
}

}  // namespace

std::vector<double> haar_forward(std::span<const double> f) {
    const std::size_t K = dyadic_depth(f.size());
    const double N = static_cast<double>(f.size());
    std::vector<double> coeffs(f.size(), 0.0);
    std::vector<double> sums(f.begin(), f.end());
    for (std::size_t k = K; k-- > 0;) {
        const std::size_t blocks = std::size_t{1} << k;
        const double norm = std::sqrt(static_cast<double>(blocks)) / N;
        for (std::size_t j = 0; j < blocks; ++j) {
            coeffs[blocks + j] = norm * (sums[2 * j] - sums[2 * j + 1]);
            sums[j] = sums[2 * j] + sums[2 * j + 1];
        }
    }
    coeffs[0] = sums[0] / N;
    return coeffs;
}

std::vector<double> haar_inverse(std::span<const double> coeffs) {
    const std::size_t K = dyadic_depth(coeffs.size());
    std::vector<double> v(coeffs.size(), 0.0);
    v[0] = coeffs[0];
    for (std::size_t k = 0; k < K; ++k) {
        const std::size_t blocks = std::size_t{1} << k;
        const double norm = std::sqrt(static_cast<double>(blocks));
        for (std::size_t j = blocks; j-- > 0;) {
            const double base = v[j], c = norm * coeffs[blocks + j];
            v[2 * j] = base + c;
            v[2 * j + 1] = base - c;
        }
    }
    return v;
}

std::vector<double> HaarOperator::apply(std::span<const double> f) const {
    check_alpha(alpha);
    if (f.size() != (std::size_t{1} << depth)) throw std::invalid_argument("sample count must be 2^K");
    auto c = haar_forward(f);
    for (std::size_t k = 0; k < depth; ++k) {
        const std::size_t blocks = std::size_t{1} << k;
        const double scale = std::pow(2.0, alpha * static_cast<double>(k));
        for (std::size_t j = 0; j < blocks; ++j) c[blocks + j] *= scale;
    }
    return haar_inverse(c);
}

std::vector<double> haar_apply(std::span<const double> f, double alpha) {
    return HaarOperator{alpha, dyadic_depth(f.size())}.apply(f);
}

std::vector<double> haar_wavelet(std::size_t K, std::size_t level, std::size_t shift) {
    if (K < 1 || level >= K || shift >= (std::size_t{1} << level))
        throw std::invalid_argument("wavelet index outside the dyadic depth");
    const std::size_t n = std::size_t{1} << K;
    const std::size_t width = n >> level;
    const double height = std::sqrt(static_cast<double>(std::size_t{1} << level));
    std::vector<double> f(n, 0.0);
    for (std::size_t m = 0; m < width; ++m) f[shift * width + m] = m < width / 2 ? height : -height;
    return f;
}

double l2_norm(std::span<const double> f) {
    double s = 0;
    for (double v : f) s += v * v;
    return std::sqrt(s / static_cast<double>(f.size()));
}

double fractional_seminorm(std::span<const double> f, double beta) {
    const std::size_t n = f.size();
    if (n < 2) return 0.0;
    const double h = 1.0 / static_cast<double>(n);
    double total = 0;
    for (std::size_t m = 1; m < n; ++m) {
        double s = 0;
        for (std::size_t i = 0; i + m < n; ++i) {
            const double diff = f[i + m] - f[i];
            s += diff * diff;
        }
        // both orderings (i, i+m) and (i+m, i) of the cell pair
        total += 2.0 * s * std::pow(static_cast<double>(m) * h, -(1.0 + 2.0 * beta));
    }
    return std::sqrt(total * h * h);
}

double compactness_ratio(std::span<const double> f, double alpha, double beta) {
    check_alpha(alpha);
    if (!(beta > alpha && beta < 0.5)) throw std::invalid_argument("beta must satisfy alpha < beta < 1/2");
    const auto af = haar_apply(f, alpha);
    const double denom = l2_norm(f) + fractional_seminorm(f, beta);
    if (denom == 0) return 0.0;
    return l2_norm(af) / denom;
}

}  // namespace rsde
