#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rsde/haar.hpp"

using namespace rsde;

namespace {

std::vector<double> random_signal(std::size_t n, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    std::vector<double> f(n);
    for (auto& v : f) v = nd(gen);
    return f;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s / static_cast<double>(a.size());
}

}  // namespace

TEST_CASE("forward transform matches direct inner products") {
    const std::size_t K = 6, N = 1u << K;
    const auto f = random_signal(N, 1);
    const auto c = haar_forward(f);
    double mean = 0;
    for (double v : f) mean += v / N;
    CHECK(c[0] == doctest::Approx(mean).epsilon(1e-12));
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < (1u << k); ++j)
            CHECK(c[(1u << k) + j] == doctest::Approx(dot(f, haar_wavelet(K, k, j))).epsilon(1e-10));
}

TEST_CASE("round trip and Parseval") {
    for (std::size_t K : {1u, 4u, 10u}) {
        const auto f = random_signal(1u << K, 2);
        const auto c = haar_forward(f);
        const auto g = haar_inverse(c);
        for (std::size_t i = 0; i < f.size(); ++i) CHECK(g[i] == doctest::Approx(f[i]).epsilon(1e-12));
        double e = 0;
        for (double v : c) e += v * v;
        CHECK(std::sqrt(e) == doctest::Approx(l2_norm(f)).epsilon(1e-12));
    }
    CHECK_THROWS(haar_forward(std::vector<double>(12, 0.0)));
}

TEST_CASE("wavelets are orthonormal eigenvectors of the operator") {
    const std::size_t K = 8;
    const HaarOperator A{0.3, K};
    for (std::size_t k : {0u, 3u, 7u}) {
        const auto w = haar_wavelet(K, k, (1u << k) - 1);
        CHECK(l2_norm(w) == doctest::Approx(1.0));
        CHECK(dot(w, haar_wavelet(K, k, 0)) == doctest::Approx(k == 0 ? 1.0 : 0.0));
        const auto aw = A.apply(w);
        for (std::size_t i = 0; i < w.size(); ++i) CHECK(aw[i] == doctest::Approx(std::pow(2.0, 0.3 * k) * w[i]));
    }
    const auto f = random_signal(1u << K, 3);
    const auto via_depth = haar_apply(f, 0.3);
    CHECK(via_depth == A.apply(f));
    CHECK_THROWS(haar_apply(f, 0.0));
}

TEST_CASE("fractional seminorm against closed forms") {
    const std::size_t N = 1u << 11;
    const double beta = 0.25;
    std::vector<double> lin(N), step(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double t = (i + 0.5) / N;
        lin[i] = t;
        step[i] = t > 0.5 ? 1.0 : 0.0;
    }
    // f(t) = t: int int |t - t'|^{1 - 2 beta} = 2 / ((2 - 2 beta)(3 - 2 beta)).
    const double lin_exact = std::sqrt(2.0 / ((2 - 2 * beta) * (3 - 2 * beta)));
    CHECK(fractional_seminorm(lin, beta) == doctest::Approx(lin_exact).epsilon(1e-2));
    // Indicator of (1/2, 1]: 2 int_0^{1/2} int_0^{1/2} (u + v)^{-1-2 beta}.
    const double a = 0.5, g = -2 * beta;
    const double step_exact = std::sqrt(2 * (std::pow(2 * a, 1 + g) - 2 * std::pow(a, 1 + g)) / (g * (1 + g)));
    CHECK(fractional_seminorm(step, beta) == doctest::Approx(step_exact).epsilon(5e-2));
    CHECK(fractional_seminorm(std::vector<double>(N, 3.0), beta) == 0.0);
}

TEST_CASE("compactness ratio stays bounded on wavelets") {
    const std::size_t K = 10;
    const double alpha = 0.2, beta = 0.4;
    double prev = 0;
    for (std::size_t k = 2; k < 9; ++k) {
        const double r = compactness_ratio(haar_wavelet(K, k, 0), alpha, beta);
        CHECK(r < 1.0);
        if (k > 4) CHECK(r < prev);
        prev = r;
    }
    CHECK_THROWS(compactness_ratio(haar_wavelet(K, 1, 0), 0.3, 0.2));
    CHECK_THROWS(compactness_ratio(haar_wavelet(K, 1, 0), 0.0, 0.2));
    CHECK_THROWS(compactness_ratio(haar_wavelet(K, 1, 0), 0.2, 0.5));
}
