#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "acdiag/errors.hpp"
#include "acdiag/interval.hpp"

namespace acdiag {

using Vec = std::vector<double>;
using ContinuousMap = std::function<Vec(double)>;
using BivariateMap = std::function<Vec(double, double)>;

Vec vec_sub(const Vec& a, const Vec& b);
Vec vec_add(const Vec& a, const Vec& b);
Vec vec_scale(double s, const Vec& a);
Vec zero_vec(int dim);

enum class NormKind { L1, L2, Linf, PseudoP };

/// Codomain of every map in this library: R^dim with an L1/L2/Linf norm,
/// or (for dim 1) the scalar pseudo-norm |t|^p with 0 < p < 1. The
/// pseudo-norm is subadditive and contracts under scalars of modulus <= 1
/// but is not homogeneous; it is supported as a diagnostic codomain only.
struct NormedTarget {
    int dim = 1;
    NormKind kind = NormKind::L2;
    double p = 0.0;  // PseudoP exponent

    static NormedTarget l1(int d) { return make(d, NormKind::L1, 0.0); }
    static NormedTarget l2(int d) { return make(d, NormKind::L2, 0.0); }
    static NormedTarget linf(int d) { return make(d, NormKind::Linf, 0.0); }
    static NormedTarget pseudo(double exponent) {
        return make(1, NormKind::PseudoP, exponent);
    }

    static NormedTarget make(int d, NormKind k, double exponent);

    double norm(std::span<const double> v) const;
    double distance(const Vec& a, const Vec& b) const;

    /// True for the homogeneous kinds; the extension/smoothing pipeline
    /// requires this, the extraction certificates do not.
    bool is_norm() const { return kind != NormKind::PseudoP; }

    std::string kind_name() const;
};

/// Continuous piecewise-linear curve into R^dim: strictly increasing knots
/// with one value per knot, linear in between, constant outside. Values are
/// stored flat (knot-major) so curves with millions of knots stay compact.
struct PiecewiseLinear {
    int dim = 1;
    std::vector<double> knots;
    std::vector<double> flat;  // knots.size() * dim

    std::size_t size() const { return knots.size(); }
    std::span<const double> value(std::size_t i) const {
        return {flat.data() + i * static_cast<std::size_t>(dim),
                static_cast<std::size_t>(dim)};
    }
    void push_knot(double t, const Vec& v);

    Vec eval(double x) const;

    /// Exact Lipschitz constant (max segment slope in the target norm),
    /// optionally restricted to [lo, hi].
    double max_slope(const NormedTarget& target) const;
    double max_slope(const NormedTarget& target, double lo, double hi) const;

    /// Exact sup of the pointwise norm over [lo, hi]; valid for the
    /// homogeneous (convex) norm kinds, where segment maxima sit at knots.
    double sup_norm(const NormedTarget& target, double lo, double hi) const;

    void validate() const;
};

/// Exact sup over [lo, hi] of norm(a - b) for two piecewise-linear curves
/// (their difference is piecewise linear, so the sup sits at a knot of
/// either curve or at the interval ends). Homogeneous norm kinds only.
double pl_sup_distance(const PiecewiseLinear& a, const PiecewiseLinear& b,
                       const NormedTarget& target, double lo, double hi);

enum class ConstantKind { Certified, GridEstimated };

/// An evaluable map X -> Z carrying a Lipschitz constant. `Certified`
/// constants are true upper bounds established by construction;
/// `GridEstimated` ones are finite-sample lower bounds.
struct LipschitzMap {
    Interval domain;
    NormedTarget target;
    ContinuousMap eval;
    double constant = 0.0;
    ConstantKind constant_kind = ConstantKind::GridEstimated;
    // Set when the map is explicitly piecewise linear; enables exact
    // restricted constants and exact sup norms.
    std::shared_ptr<const PiecewiseLinear> pl;

    static LipschitzMap zero(const Interval& dom, const NormedTarget& tgt);
    static LipschitzMap from_pl(const Interval& dom, const NormedTarget& tgt,
                                PiecewiseLinear curve);
};

/// A truncated series representation of a pointwise limit g = lim stages[n]:
/// tail_bounds[n-1] bounds sup_x of the increment sum from stage n onward,
/// hence also the residual norm(g(x) - stage_n(x)).
struct BaireSeries {
    Interval domain;
    NormedTarget target;
    std::vector<ContinuousMap> stages;   // stage n at index n-1
    std::vector<double> tail_bounds;     // same indexing as stages

    int n_max() const { return static_cast<int>(stages.size()); }
    Vec stage(int n, double x) const;    // 1-based
    double tail_bound(int n) const;      // 1-based
    void validate() const;
};

struct SeriesValue {
    Vec value;
    int stage = 0;          // stage index actually used
    double residual = 0.0;  // declared bound on norm(value - limit)
};

/// Evaluates the series at x: the first stage whose declared tail is <= tol,
/// else the last stage together with its declared residual.
SeriesValue sum_series(const BaireSeries& s, double x, double tol);

/// Empirical variation scan of a one-variable map.
struct VariationReport {
    Interval interval;
    std::vector<double> partition;  // increasing scan points
    double total = 0.0;
    // (delta, estimated sup of increment sums over collections of total
    // length < delta)
    std::vector<std::pair<double, double>> modulus_table;

    std::size_t partition_size() const { return partition.size(); }
};

namespace grids {
/// Uniform closed grid with n points including both ends (n >= 2).
std::vector<double> uniform(double lo, double hi, std::size_t n);
/// Default sampling resolutions.
inline constexpr int kLipschitzPerUnit = 4096;
inline constexpr int kAnalysisPerUnit = 10000;
inline constexpr std::size_t kMaxTotalPoints = 10'000'000;
std::size_t scaled_points(double length, int per_unit,
                          std::size_t cap = kMaxTotalPoints);
}  // namespace grids

}  // namespace acdiag
