#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "rsde/grid.hpp"

namespace rsde {

/// Identifies one reproducible noise stream: the run seed plus the path index.
struct StreamId {
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
};

/// Discretized d-dimensional Brownian path started at the origin.
/// Increments are the canonical data; values are their running sums.
class BrownianPath {
public:
    /// Builds from per-interval increments laid out as [step][component].
    BrownianPath(TimeGrid grid, std::size_t d, std::vector<double> increments, StreamId stream = {});

    const TimeGrid& grid() const { return grid_; }
    std::size_t dim() const { return d_; }
    std::size_t n_steps() const { return grid_.n_steps(); }
    const StreamId& stream() const { return stream_; }

    double value(std::size_t k, std::size_t i) const { return values_[k * d_ + i]; }
    double increment(std::size_t k, std::size_t i) const { return increments_[k * d_ + i]; }

    std::span<const double> values() const { return values_; }
    std::span<const double> increments() const { return increments_; }

private:
    TimeGrid grid_;
    std::size_t d_;
    std::vector<double> increments_;
    std::vector<double> values_;
    StreamId stream_;
};

/// Draws a path from the counter-based generator. Bit-identical for equal arguments.
BrownianPath sample_brownian(const TimeGrid& grid, std::size_t d, StreamId stream);

/// A family of independent paths addressed by index; paths are regenerated on demand.
struct BrownianEnsemble {
    TimeGrid grid;
    std::size_t d = 1;
    std::uint64_t seed = 0;
    std::size_t n_paths = 0;

    BrownianPath path(std::size_t p) const { return sample_brownian(grid, d, {seed, p}); }
};

/// Reverses grid-point values: out[k] = in[n - k], rows of width d.
std::vector<double> mirror_values(std::span<const double> values, std::size_t d);

/// Time reversal B^_r = B_{T-r} together with the increments of the driving
/// motion W~ of the reversed path, dW~ = dB^ + B^_r/(L - r) dr with L = T - t0.
/// The last reversed interval, where L - r vanishes, carries no W~ increment.
class ReversedPath {
public:
    explicit ReversedPath(const BrownianPath& base);

    const BrownianPath& base() const { return base_; }
    std::size_t dim() const { return base_.dim(); }
    std::size_t n_steps() const { return base_.n_steps(); }

    double hat(std::size_t k, std::size_t i) const { return hat_[k * dim() + i]; }
    std::span<const double> hat_values() const { return hat_; }

    /// Number of intervals that carry a W~ increment (all but the final one).
    std::size_t n_tilde() const { return n_steps() - 1; }
    double tilde_increment(std::size_t k, std::size_t i) const { return tilde_[k * dim() + i]; }

    /// Elapsed reversed time at reversed index k.
    double reversed_time(std::size_t k) const;

private:
    BrownianPath base_;
    std::vector<double> hat_;
    std::vector<double> tilde_;
};

ReversedPath reverse_path(const BrownianPath& path);

/// Cameron-Martin direction given by its derivative sampled at grid points,
/// laid out as [grid point][component]. The shift itself starts at zero.
struct CameronMartinShift {
    std::size_t d = 1;
    std::vector<double> phi_dot;

    static CameronMartinShift zero(const TimeGrid& grid, std::size_t d);
    CameronMartinShift scaled(double factor) const;
};

/// Adds the left-point running integral of the shift derivative to the path.
BrownianPath shift_path(const BrownianPath& path, const CameronMartinShift& shift);

/// Aggregates increments over blocks of `factor` steps.
BrownianPath coarsen(const BrownianPath& path, std::size_t factor);

/// CSV with columns t, B1..Bd.
void write_path_csv(std::ostream& out, const BrownianPath& path);

}  // namespace rsde
