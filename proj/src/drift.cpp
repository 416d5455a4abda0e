#include "rsde/drift.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <stdexcept>

namespace rsde {

namespace {

// The bump integrals are taken in u with y = tanh(u): the integrand becomes
// analytic and decays like exp(-cosh(u)^2), so a trapezoid rule on [-3, 3]
// converges geometrically. Windows split by a breakpoint use Gauss-Legendre
// panels in the same variable.
constexpr double kHalfRange = 3.0;
constexpr int kTrapezoidIntervals = 30;
constexpr int kPanelNodes = 24;

double bump(double y) {
    const double q = 1.0 - y * y;
    return q > 0 ? std::exp(-1.0 / q) : 0.0;
}

double bump_slope(double y) {
    const double q = 1.0 - y * y;
    return q > 0 ? std::exp(-1.0 / q) * (-2.0 * y / (q * q)) : 0.0;
}

/// Nodes y in (-1, 1) with weights for integrals over dy.
struct Rule {
    std::vector<double> y, w;
};

const Rule& trapezoid_rule() {
    static const Rule r = [] {
        Rule out;
        const double h = 2.0 * kHalfRange / kTrapezoidIntervals;
        for (int j = 0; j <= kTrapezoidIntervals; ++j) {
            const double u = -kHalfRange + h * j;
            const double c = std::cosh(u);
            out.y.push_back(std::tanh(u));
            out.w.push_back(h / (c * c));
        }
        return out;
    }();
    return r;
}

/// Gauss-Legendre nodes and weights on [-1, 1].
const Rule& legendre_rule() {
    static const Rule r = [] {
        Rule out;
        using G = boost::math::quadrature::gauss<double, kPanelNodes>;
        const auto& a = G::abscissa();
        const auto& wt = G::weights();
        for (std::size_t j = 0; j < a.size(); ++j) {
            out.y.push_back(-a[j]);
            out.w.push_back(wt[j]);
            if (a[j] != 0) {
                out.y.push_back(a[j]);
                out.w.push_back(wt[j]);
            }
        }
        return out;
    }();
    return r;
}

/// Smooth step: 0 for u <= 0, 1 for u >= 1.
double smooth_step(double u, double* slope) {
    if (u <= 0 || u >= 1) {
        if (slope) *slope = 0;
        return u <= 0 ? 0.0 : 1.0;
    }
    const double a = std::exp(-1.0 / u), b = std::exp(-1.0 / (1.0 - u));
    const double s = a + b;
    if (slope) {
        const double da = a / (u * u), db = b / ((1.0 - u) * (1.0 - u));
        *slope = (da * b + a * db) / (s * s);
    }
    return a / s;
}

struct Mollifier {
    DeterministicDrift base;
    double eps;
    double radius;
    double norm;
    std::vector<double> nodes, w_rho, w_drho;

    Mollifier(DeterministicDrift b, int n) : base(std::move(b)), eps(1.0 / n), radius(n) {
        const Rule& r = trapezoid_rule();
        norm = 0;
        for (std::size_t j = 0; j < r.y.size(); ++j) norm += r.w[j] * bump(r.y[j]);
        for (std::size_t j = 0; j < r.y.size(); ++j) {
            const double wr = r.w[j] * bump(r.y[j]) / norm;
            const double wd = r.w[j] * bump_slope(r.y[j]) / norm;
            if (wr < 1e-18 && std::abs(wd) < 1e-18) continue;
            nodes.push_back(r.y[j]);
            w_rho.push_back(wr);
            w_drho.push_back(wd);
        }
        std::sort(base.breakpoints.begin(), base.breakpoints.end());
    }

    /// Convolution value and x-derivative at (t, x).
    void convolve(double t, double x, double* value, double* slope) const {
        bool split = false;
        for (double bp : base.breakpoints)
            if (std::abs(x - bp) < eps) split = true;
        double v = 0, s = 0;
        if (!split) {
            for (std::size_t j = 0; j < nodes.size(); ++j) {
                const double bz = base.eval(t, x - eps * nodes[j]);
                v += w_rho[j] * bz;
                s += w_drho[j] * bz;
            }
        } else {
            // panel edges in u = atanh(y)
            std::vector<double> cuts{-kHalfRange};
            for (double bp : base.breakpoints) {
                const double y = (x - bp) / eps;
                if (y > -1 && y < 1) {
                    const double u = std::atanh(y);
                    if (u > -kHalfRange && u < kHalfRange) cuts.push_back(u);
                }
            }
            std::sort(cuts.begin(), cuts.end());
            cuts.push_back(kHalfRange);
            const Rule& r = legendre_rule();
            for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
                const double lo = cuts[p], hi = cuts[p + 1];
                if (hi <= lo) continue;
                const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
                for (std::size_t j = 0; j < r.y.size(); ++j) {
                    // With y = tanh u, 1/(1 - y^2) = cosh^2 u.
                    const double u = mid + half * r.y[j];
                    const double e = std::exp(u);
                    const double ch = 0.5 * (e + 1.0 / e);
                    const double y = 0.5 * (e - 1.0 / e) / ch;
                    const double c2 = ch * ch;
                    const double wj = half * r.w[j] / c2 / norm * std::exp(-c2);
                    const double bz = base.eval(t, x - eps * y);
                    v += wj * bz;
                    s += wj * (-2.0 * y * c2 * c2) * bz;
                }
            }
        }
        if (value) *value = v;
        if (slope) *slope = s / eps;
    }

    double cutoff(double x, double* slope) const {
        double ds = 0;
        const double c = smooth_step(radius + 1.0 - std::abs(x), slope ? &ds : nullptr);
        if (slope) *slope = x >= 0 ? -ds : ds;
        return c;
    }

    double value(double t, double x) const {
        const double c = cutoff(x, nullptr);
        if (c == 0) return 0;
        double v;
        convolve(t, x, &v, nullptr);
        return c * v;
    }

    double both(double t, double x, double* slope) const {
        double dc;
        const double c = cutoff(x, &dc);
        if (c == 0 && dc == 0) {
            *slope = 0;
            return 0;
        }
        double v, s;
        convolve(t, x, &v, &s);
        *slope = s * c + v * dc;
        return c * v;
    }

    double derivative(double t, double x) const {
        double dc;
        const double c = cutoff(x, &dc);
        if (c == 0 && dc == 0) return 0;
        double v, s;
        convolve(t, x, &v, &s);
        return s * c + v * dc;
    }
};

}  // namespace

DeterministicDrift mollify(const DeterministicDrift& b1, int n) {
    if (n < 1) throw std::invalid_argument("mollification level must be at least 1");
    auto m = std::make_shared<const Mollifier>(b1, n);
    DeterministicDrift out;
    out.name = b1.name + "@" + std::to_string(n);
    out.eval = [m](double t, double x) { return m->value(t, x); };
    out.eval_dx = [m](double t, double x) { return m->derivative(t, x); };
    out.eval_both = [m](double t, double x, double* slope) { return m->both(t, x, slope); };
    out.k = b1.k * (1.0 + 1.0 / n);
    out.smooth = true;
    return out;
}

double linear_growth_norm(const DeterministicDrift& b1, const SampleBox& box) {
    if (!(box.T >= box.t0) || !(box.x_hi > box.x_lo) || box.nt == 0 || box.nx < 2)
        throw std::invalid_argument("degenerate sampling box");
    double best = 0;
    for (std::size_t i = 0; i < box.nt; ++i) {
        const double t = box.nt == 1 ? box.t0 : box.t0 + (box.T - box.t0) * i / (box.nt - 1.0);
        for (std::size_t j = 0; j < box.nx; ++j) {
            const double z = box.x_lo + (box.x_hi - box.x_lo) * j / (box.nx - 1.0);
            best = std::max(best, std::abs(b1.eval(t, z)) / (1.0 + std::abs(z)));
        }
    }
    return best;
}

double RandomDrift::eval(double t, double x, const BrownianPath& path) const {
    return bind(path)->eval(path.grid().index_of(t), x);
}

double RandomDrift::eval_dx(double t, double x, const BrownianPath& path) const {
    return bind(path)->eval_dx(path.grid().index_of(t), x);
}

double RandomDrift::malliavin_eval(double t_deriv, double s, double x, const BrownianPath& path,
                                   std::size_t i) const {
    const auto& g = path.grid();
    return bind(path)->malliavin(g.index_of(t_deriv), g.index_of(s), x, i);
}

double RandomDrift::m2_bound(const BrownianPath& path) const { return bind(path)->m2_bound(); }

double RandomDrift::m2_tilde_bound(double s, double t, const BrownianPath& path) const {
    const auto& g = path.grid();
    return bind(path)->m2_tilde_bound(g.index_of(s), g.index_of(t));
}

}  // namespace rsde
