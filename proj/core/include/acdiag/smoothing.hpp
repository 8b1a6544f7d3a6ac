#pragma once

#include <cstddef>
#include <vector>

#include "acdiag/funcspace.hpp"

namespace acdiag::smoothing {

struct MollifyOptions {
    std::size_t max_cells = 262'144;
    // forced-leaf width as a fraction of the domain length; a cell this
    // narrow that still oscillates is an error, not a silent acceptance
    double min_width_factor = 1e-14;
    int verify_per_unit = grids::kLipschitzPerUnit;
    int max_repair_rounds = 8;
};

/// Locally finite cover of a compact interval by widened open cells with a
/// distance-normalized partition of unity. Every point lies in at most two
/// cells, the covered oscillation of f on each cell is below eps, and
/// eval(x) = sum_U phi_U(x) * z_U with anchors z_U = f(midpoint of U).
struct MollifierCover {
    Interval domain;  // compact
    NormedTarget target;
    double eps = 0.0;

    std::vector<double> cuts;  // base partition, cuts.front()=lo, back()=hi
    struct Cell {
        double lo, hi;  // widened open interval
        Vec anchor;
    };
    std::vector<Cell> cells;  // one per base cell

    std::size_t cell_count() const { return cells.size(); }
    /// Indices of the (at most two) cells whose open interval contains x.
    std::vector<std::size_t> cells_at(double x) const;
    /// Distance from x to the part of the domain outside cell j.
    double psi(std::size_t j, double x) const;
    /// Normalized weights of the active cells at x; sums to 1.
    std::vector<std::pair<std::size_t, double>> weights(double x) const;
    /// The partition-of-unity blend sum phi_U(x) * z_U.
    Vec eval(double x) const;
    /// The same map as an explicit piecewise-linear curve (the blend is
    /// constant on cell cores and linear across overlaps).
    PiecewiseLinear to_piecewise_linear() const;
};

/// Builds the cover by adaptive bisection: a base cell is accepted once the
/// sampled oscillation of f over its widened extent drops below eps/2, then
/// cells are widened by up to 50% to overlap their neighbours.
MollifierCover build_mollifier_cover(const ContinuousMap& f, const Interval& dom,
                                     const NormedTarget& target, double eps,
                                     const MollifyOptions& opts = {});

/// Lipschitz mollification within eps on a compact interval. The result is
/// piecewise linear with an exact certified constant and satisfies
/// sup |f - g| <= eps on the verification grid.
LipschitzMap lipschitz_approx(const ContinuousMap& f, const Interval& dom,
                              const NormedTarget& target, double eps,
                              const MollifyOptions& opts = {});
LipschitzMap lipschitz_approx(const MollifierCover& cover);

/// Piecewise-linear approximation within eps driven by chord error instead
/// of oscillation; same contract as lipschitz_approx but with near-optimal
/// knot counts, which keeps tight tolerances (2^-20) tractable.
LipschitzMap pl_approx(const ContinuousMap& f, const Interval& dom,
                       const NormedTarget& target, double eps,
                       const MollifyOptions& opts = {});

/// Geometric accuracy schedule eps_n = coeff * ratio^n with the closed-form
/// increment-tail bound sum_{m>=n} (eps_m + eps_{m+1}).
struct EpsSchedule {
    double coeff = 1.0;
    double ratio = 0.5;

    void validate() const;
    double eps(int n) const;
    double tail(int n) const;
};

struct SeriesMollifyOptions {
    // stages with eps >= this use the cover construction; finer stages the
    // chord-driven one
    double cover_min_eps = 0.0009765625;  // 2^-10
    std::size_t max_cells_fine = 8'000'000;
    MollifyOptions mollify;
};

struct MollifiedSeries {
    BaireSeries series;
    std::vector<LipschitzMap> stage_maps;  // stage n at index n-1, unclamped
    std::vector<double> stage_eps;         // sup |stage_n - f| <= stage_eps[n-1]
};

/// Stage-wise mollification of a continuous map: stage n approximates f
/// within schedule.eps(n), so consecutive stages differ by at most
/// eps_n + eps_{n+1} and the series tail bound is schedule.tail(n).
MollifiedSeries mollify_series(const ContinuousMap& f, const Interval& dom,
                               const NormedTarget& target, int n_max,
                               const EpsSchedule& schedule,
                               const SeriesMollifyOptions& opts = {});

}  // namespace acdiag::smoothing
