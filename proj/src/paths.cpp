#include "rsde/paths.hpp"

#include <cmath>
#include <stdexcept>

#include "rsde/rng.hpp"

namespace rsde {

BrownianPath::BrownianPath(TimeGrid grid, std::size_t d, std::vector<double> increments, StreamId stream)
    : grid_(grid), d_(d), increments_(std::move(increments)), stream_(stream) {
    if (d_ == 0) throw std::invalid_argument("Brownian path dimension must be at least 1");
    if (increments_.size() != grid_.n_steps() * d_)
        throw std::invalid_argument("increment count does not match grid and dimension");
    values_.assign(grid_.n_points() * d_, 0.0);
    for (std::size_t k = 0; k < grid_.n_steps(); ++k)
        for (std::size_t i = 0; i < d_; ++i)
            values_[(k + 1) * d_ + i] = values_[k * d_ + i] + increments_[k * d_ + i];
}

BrownianPath sample_brownian(const TimeGrid& grid, std::size_t d, StreamId stream) {
    if (d == 0) throw std::invalid_argument("Brownian path dimension must be at least 1");
    const Philox4x32 gen(stream.seed);
    const double scale = std::sqrt(grid.dt());
    std::vector<double> inc(grid.n_steps() * d);
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        for (std::size_t i = 0; i < d; i += 2) {
            const auto z = normal_pair(gen, stream.index, static_cast<std::uint32_t>(k),
                                       static_cast<std::uint32_t>(i / 2));
            inc[k * d + i] = scale * z[0];
            if (i + 1 < d) inc[k * d + i + 1] = scale * z[1];
        }
    }
    return BrownianPath(grid, d, std::move(inc), stream);
}

std::vector<double> mirror_values(std::span<const double> values, std::size_t d) {
    if (d == 0 || values.size() % d != 0) throw std::invalid_argument("values are not rows of width d");
    const std::size_t rows = values.size() / d;
    std::vector<double> out(values.size());
    for (std::size_t k = 0; k < rows; ++k)
        for (std::size_t i = 0; i < d; ++i) out[k * d + i] = values[(rows - 1 - k) * d + i];
    return out;
}

ReversedPath::ReversedPath(const BrownianPath& base) : base_(base) {
    const std::size_t d = base_.dim();
    const std::size_t n = base_.n_steps();
    hat_ = mirror_values(base_.values(), d);
    tilde_.assign(n > 0 ? (n - 1) * d : 0, 0.0);
    const double length = base_.grid().T() - base_.grid().t0();
    const double dt = base_.grid().dt();
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double remaining = length - reversed_time(k);
        for (std::size_t i = 0; i < d; ++i) {
            const double dhat = hat_[(k + 1) * d + i] - hat_[k * d + i];
            tilde_[k * d + i] = dhat + hat_[k * d + i] / remaining * dt;
        }
    }
}

double ReversedPath::reversed_time(std::size_t k) const {
    return static_cast<double>(k) * base_.grid().dt();
}

ReversedPath reverse_path(const BrownianPath& path) { return ReversedPath(path); }

CameronMartinShift CameronMartinShift::zero(const TimeGrid& grid, std::size_t d) {
    return {d, std::vector<double>(grid.n_points() * d, 0.0)};
}

CameronMartinShift CameronMartinShift::scaled(double factor) const {
    CameronMartinShift out = *this;
    for (double& v : out.phi_dot) v *= factor;
    return out;
}

BrownianPath shift_path(const BrownianPath& path, const CameronMartinShift& shift) {
    const std::size_t d = path.dim();
    if (shift.d != d || shift.phi_dot.size() != path.grid().n_points() * d)
        throw std::invalid_argument("shift does not match the path grid");
    const double dt = path.grid().dt();
    std::vector<double> inc(path.increments().begin(), path.increments().end());
    for (std::size_t k = 0; k < path.n_steps(); ++k)
        for (std::size_t i = 0; i < d; ++i) inc[k * d + i] += shift.phi_dot[k * d + i] * dt;
    return BrownianPath(path.grid(), d, std::move(inc), path.stream());
}

BrownianPath coarsen(const BrownianPath& path, std::size_t factor) {
    if (factor == 0 || path.n_steps() % factor != 0)
        throw std::invalid_argument("coarsening factor must divide the step count");
    const std::size_t d = path.dim();
    const std::size_t n = path.n_steps() / factor;
    std::vector<double> inc(n * d, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < factor; ++j)
            for (std::size_t i = 0; i < d; ++i) inc[k * d + i] += path.increment(k * factor + j, i);
    return BrownianPath(TimeGrid(path.grid().t0(), path.grid().T(), n), d, std::move(inc), path.stream());
}

void write_path_csv(std::ostream& out, const BrownianPath& path) {
    out << "t";
    for (std::size_t i = 0; i < path.dim(); ++i) out << ",B" << (i + 1);
    out << '\n';
    const auto prec = out.precision(17);
    for (std::size_t k = 0; k < path.grid().n_points(); ++k) {
        out << path.grid().time(k);
        for (std::size_t i = 0; i < path.dim(); ++i) out << ',' << path.value(k, i);
        out << '\n';
    }
    out.precision(prec);
}

}  // namespace rsde
