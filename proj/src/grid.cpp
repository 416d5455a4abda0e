#include "rsde/grid.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rsde {

TimeGrid::TimeGrid(double t0, double T, std::size_t n_steps) : t0_(t0), T_(T), n_(n_steps) {
    if (!std::isfinite(t0) || !std::isfinite(T) || !(T > t0))
        throw std::invalid_argument("time grid requires finite t0 < T");
    if (n_steps == 0) throw std::invalid_argument("time grid requires at least one step");
    if (n_steps >= (std::size_t{1} << 32))
        throw std::invalid_argument("time grid has too many steps");
    dt_ = (T - t0) / static_cast<double>(n_steps);
}

double TimeGrid::time(std::size_t k) const {
    if (k >= n_) return k == n_ ? T_ : std::numeric_limits<double>::quiet_NaN();
    return t0_ + static_cast<double>(k) * dt_;
}

std::size_t TimeGrid::index_of(double t) const {
    const double pos = (t - t0_) / dt_;
    const double r = std::round(pos);
    if (r < 0 || r > static_cast<double>(n_) || std::abs(pos - r) > 1e-6)
        throw std::invalid_argument("time " + std::to_string(t) + " is not a grid point");
    return static_cast<std::size_t>(r);
}

std::size_t TimeGrid::floor_index(double t) const {
    const double pos = (t - t0_) / dt_;
    if (pos <= 0) return 0;
    const double r = std::round(pos);
    const double f = std::abs(pos - r) <= 1e-9 ? r : std::floor(pos);
    return f >= static_cast<double>(n_) ? n_ : static_cast<std::size_t>(f);
}

}  // namespace rsde
