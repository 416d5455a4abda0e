#pragma once

#include <cstddef>

namespace rsde {

/// Uniform time grid t0 < t1 < ... < tn = T.
class TimeGrid {
public:
    TimeGrid(double t0, double T, std::size_t n_steps);

    double t0() const { return t0_; }
    double T() const { return T_; }
    std::size_t n_steps() const { return n_; }
    std::size_t n_points() const { return n_ + 1; }
    double dt() const { return dt_; }

    /// Grid time at index k; the last index maps to T exactly.
    double time(std::size_t k) const;

    /// Index of the grid point at time t. Throws when t is not on the grid.
    std::size_t index_of(double t) const;

    /// Largest grid index with time(k) <= t (clamped to the grid).
    std::size_t floor_index(double t) const;

    bool operator==(const TimeGrid& o) const {
        return t0_ == o.t0_ && T_ == o.T_ && n_ == o.n_;
    }

private:
    double t0_;
    double T_;
    std::size_t n_;
    double dt_;
};

}  // namespace rsde
