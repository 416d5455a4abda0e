#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rsde {

/// Orthonormal Haar coefficients of a function sampled at the 2^K cell
/// midpoints of [0,1] (piecewise-constant interpretation). Coefficient 0 is
/// the mean; coefficient 2^k + j belongs to the level-k wavelet with shift j.
std::vector<double> haar_forward(std::span<const double> f);
std::vector<double> haar_inverse(std::span<const double> coeffs);

/// The operator scaling level-k coefficients by 2^{k alpha}.
struct HaarOperator {
    double alpha = 0.25;
    std::size_t depth = 10;  // K: number of samples is 2^K

    std::vector<double> apply(std::span<const double> f) const;
};

/// haar_apply with the depth read off the sample count.
std::vector<double> haar_apply(std::span<const double> f, double alpha);

/// Samples of the L2-normalized level-k wavelet with shift j at depth K.
std::vector<double> haar_wavelet(std::size_t K, std::size_t level, std::size_t shift);

/// sqrt(mean of squares): the L2([0,1]) norm of a midpoint-sampled function.
double l2_norm(std::span<const double> f);

/// (int int |f(t) - f(t')|^2 / |t - t'|^{1 + 2 beta})^{1/2} by a midpoint
/// double sum that skips the diagonal cells.
double fractional_seminorm(std::span<const double> f, double beta);

/// ||A_alpha f|| / (||f|| + seminorm_beta(f)).
double compactness_ratio(std::span<const double> f, double alpha, double beta);

}  // namespace rsde
