#include "acdiag/funcspace.hpp"

#include <algorithm>
#include <cmath>

namespace acdiag {

Vec vec_sub(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionError("vector size mismatch");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

Vec vec_add(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionError("vector size mismatch");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

Vec vec_scale(double s, const Vec& a) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
    return r;
}

Vec zero_vec(int dim) { return Vec(static_cast<std::size_t>(dim), 0.0); }

NormedTarget NormedTarget::make(int d, NormKind k, double exponent) {
    if (d < 1) throw Error("target dimension must be positive");
    if (k == NormKind::PseudoP) {
        if (d != 1) throw Error("pseudo-norm target requires dim 1");
        if (!(exponent > 0.0 && exponent < 1.0))
            throw Error("pseudo-norm exponent must lie in (0,1)");
    }
    return NormedTarget{d, k, k == NormKind::PseudoP ? exponent : 0.0};
}

double NormedTarget::norm(std::span<const double> v) const {
    if (static_cast<int>(v.size()) != dim)
        throw DimensionError("norm: vector has dimension " +
                             std::to_string(v.size()) + ", target expects " +
                             std::to_string(dim));
    switch (kind) {
        case NormKind::L1: {
            double s = 0.0;
            for (double t : v) s += std::abs(t);
            return s;
        }
        case NormKind::L2: {
            double s = 0.0;
            for (double t : v) s += t * t;
            return std::sqrt(s);
        }
        case NormKind::Linf: {
            double s = 0.0;
            for (double t : v) s = std::max(s, std::abs(t));
            return s;
        }
        case NormKind::PseudoP:
            return std::pow(std::abs(v[0]), p);
    }
    throw Error("unreachable norm kind");
}

double NormedTarget::distance(const Vec& a, const Vec& b) const {
    return norm(vec_sub(a, b));
}

std::string NormedTarget::kind_name() const {
    switch (kind) {
        case NormKind::L1: return "l1";
        case NormKind::L2: return "l2";
        case NormKind::Linf: return "linf";
        case NormKind::PseudoP: return "pseudo";
    }
    return "?";
}

void PiecewiseLinear::push_knot(double t, const Vec& v) {
    if (static_cast<int>(v.size()) != dim)
        throw DimensionError("piecewise linear: value dimension mismatch");
    knots.push_back(t);
    flat.insert(flat.end(), v.begin(), v.end());
}

void PiecewiseLinear::validate() const {
    if (dim < 1) throw Error("piecewise linear: dimension must be positive");
    if (knots.size() < 2) throw Error("piecewise linear curve needs >= 2 knots");
    if (flat.size() != knots.size() * static_cast<std::size_t>(dim))
        throw Error("piecewise linear: knot/value count mismatch");
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (!(knots[i - 1] < knots[i]))
            throw Error("piecewise linear: knots must increase strictly");
}

Vec PiecewiseLinear::eval(double x) const {
    std::size_t d = static_cast<std::size_t>(dim);
    if (x <= knots.front()) return Vec(value(0).begin(), value(0).end());
    if (x >= knots.back()) {
        auto last = value(knots.size() - 1);
        return Vec(last.begin(), last.end());
    }
    auto it = std::upper_bound(knots.begin(), knots.end(), x);
    std::size_t i = static_cast<std::size_t>(it - knots.begin());
    double t = (x - knots[i - 1]) / (knots[i] - knots[i - 1]);
    auto a = value(i - 1);
    auto b = value(i);
    Vec r(d);
    for (std::size_t k = 0; k < d; ++k) r[k] = a[k] + t * (b[k] - a[k]);
    return r;
}

double PiecewiseLinear::max_slope(const NormedTarget& target) const {
    return max_slope(target, knots.front(), knots.back());
}

double PiecewiseLinear::max_slope(const NormedTarget& target, double lo,
                                  double hi) const {
    double best = 0.0;
    Vec diff(static_cast<std::size_t>(dim));
    for (std::size_t i = 1; i < knots.size(); ++i) {
        double a = std::max(knots[i - 1], lo);
        double b = std::min(knots[i], hi);
        if (!(a < b)) continue;  // segment outside the restriction
        auto u = value(i - 1);
        auto v = value(i);
        for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = v[k] - u[k];
        best = std::max(best, target.norm(diff) / (knots[i] - knots[i - 1]));
    }
    return best;
}

double PiecewiseLinear::sup_norm(const NormedTarget& target, double lo,
                                 double hi) const {
    // Convex norms attain segment maxima at segment ends, so it is enough
    // to look at knots inside [lo,hi] plus the two clipped boundary values.
    double best = std::max(target.norm(eval(lo)), target.norm(eval(hi)));
    for (std::size_t i = 0; i < knots.size(); ++i)
        if (knots[i] > lo && knots[i] < hi)
            best = std::max(best, target.norm(value(i)));
    return best;
}

double pl_sup_distance(const PiecewiseLinear& a, const PiecewiseLinear& b,
                       const NormedTarget& target, double lo, double hi) {
    if (!target.is_norm())
        throw Error("pl_sup_distance requires a homogeneous norm");
    double best = std::max(target.distance(a.eval(lo), b.eval(lo)),
                           target.distance(a.eval(hi), b.eval(hi)));
    for (std::size_t i = 0; i < a.knots.size(); ++i) {
        double t = a.knots[i];
        if (t > lo && t < hi)
            best = std::max(best, target.distance(a.eval(t), b.eval(t)));
    }
    for (std::size_t i = 0; i < b.knots.size(); ++i) {
        double t = b.knots[i];
        if (t > lo && t < hi)
            best = std::max(best, target.distance(a.eval(t), b.eval(t)));
    }
    return best;
}

LipschitzMap LipschitzMap::zero(const Interval& dom, const NormedTarget& tgt) {
    int d = tgt.dim;
    LipschitzMap m;
    m.domain = dom;
    m.target = tgt;
    m.eval = [d](double) { return zero_vec(d); };
    m.constant = 0.0;
    m.constant_kind = ConstantKind::Certified;
    if (dom.bounded()) {
        PiecewiseLinear pl;
        pl.dim = d;
        pl.push_knot(dom.lo, zero_vec(d));
        pl.push_knot(dom.hi, zero_vec(d));
        m.pl = std::make_shared<const PiecewiseLinear>(std::move(pl));
    }
    return m;
}

LipschitzMap LipschitzMap::from_pl(const Interval& dom, const NormedTarget& tgt,
                                   PiecewiseLinear curve) {
    curve.validate();
    auto shared = std::make_shared<const PiecewiseLinear>(std::move(curve));
    LipschitzMap m;
    m.domain = dom;
    m.target = tgt;
    m.eval = [shared](double x) { return shared->eval(x); };
    m.constant = shared->max_slope(tgt);
    m.constant_kind = ConstantKind::Certified;
    m.pl = shared;
    return m;
}

Vec BaireSeries::stage(int n, double x) const {
    if (n < 1 || n > n_max()) throw Error("series stage index out of range");
    return stages[static_cast<std::size_t>(n - 1)](x);
}

double BaireSeries::tail_bound(int n) const {
    if (n < 1 || n > n_max()) throw Error("series tail index out of range");
    return tail_bounds[static_cast<std::size_t>(n - 1)];
}

void BaireSeries::validate() const {
    if (stages.empty()) throw Error("series needs at least one stage");
    if (stages.size() != tail_bounds.size())
        throw Error("series: stage/tail count mismatch");
    for (double t : tail_bounds)
        if (!(t >= 0.0)) throw Error("series: tail bounds must be nonnegative");
}

SeriesValue sum_series(const BaireSeries& s, double x, double tol) {
    if (!s.domain.contains(x))
        throw Error("sum_series: point outside the series domain");
    if (!(tol > 0.0)) throw Error("sum_series: tolerance must be positive");
    s.validate();
    for (int n = 1; n <= s.n_max(); ++n) {
        if (s.tail_bound(n) <= tol)
            return SeriesValue{s.stage(n, x), n, s.tail_bound(n)};
    }
    int n = s.n_max();
    return SeriesValue{s.stage(n, x), n, s.tail_bound(n)};
}

namespace grids {

std::vector<double> uniform(double lo, double hi, std::size_t n) {
    if (n < 2) throw Error("grid needs >= 2 points");
    std::vector<double> g(n);
    double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + step * static_cast<double>(i);
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::size_t scaled_points(double length, int per_unit, std::size_t cap) {
    if (!(length > 0.0) || !std::isfinite(length))
        throw Error("grid length must be finite and positive");
    double want = length * per_unit;
    std::size_t n = want <= 2.0 ? 2 : static_cast<std::size_t>(want) + 1;
    return std::min(n, cap);
}

}  // namespace grids

}  // namespace acdiag
