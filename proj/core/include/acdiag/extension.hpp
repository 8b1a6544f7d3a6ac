#pragma once

#include <span>
#include <vector>

#include "acdiag/funcspace.hpp"
#include "acdiag/smoothing.hpp"

namespace acdiag::extension {

/// Increasing compact segments I_1 <= I_2 <= ... whose union is the domain.
/// Closed ends are reached immediately, open and infinite ends are
/// approached geometrically resp. linearly.
struct Exhaustion {
    std::vector<std::pair<double, double>> segments;

    static Exhaustion standard(const Interval& dom, int n_max);
    std::pair<double, double> segment(int n) const;  // 1-based
    void validate(const Interval& dom) const;
};

/// Diagonal band bookkeeping: widths delta_1 > delta_2 > ... > delta_{N+1},
/// per-band stage constants K_n, cutoff constants L_n = 1/(delta_n -
/// delta_{n+1}), blend spreads M_n and section constants C_n = K_n + L_n M_n.
struct BandScheme {
    std::vector<double> delta;  // size N+1, delta[n-1] is delta_n
    std::vector<double> K, L, M, C;  // size N, index n-1 for band n
    std::vector<double> stage_sup_diff;  // exact sup |g_n - g_{n-1}|, size N

    int bands() const { return static_cast<int>(K.size()); }
    double delta_n(int n) const { return delta.at(static_cast<std::size_t>(n - 1)); }
    double sum_K_delta() const;
    /// sum_{n>=m} C_n (delta_n - delta_{n+1}) over the built bands
    double tail_C_dd(int m) const;
    /// the matching certificate bound 3 sum_{n>=m} K_n delta_n
    /// + sum_{n>=m} sup|g_n - g_{n-1}|
    double tail_certificate_bound(int m) const;
};

/// delta_1 = 2^-1 / max(1, K_1); delta_n = min(delta_{n-1}/2,
/// 2^-n / max(1, K_n)); strictly decreasing with sum K_n delta_n <= 1.
/// Returns delta_1..delta_{N+1} (the last entry reuses K_N).
std::vector<double> choose_deltas(std::span<const double> K);

/// Piecewise-linear band cutoff evaluated at |t|: 1 outside delta_n, 0
/// inside delta_{n+1}, linear in between; Lipschitz with constant L_n.
double cutoff(int n, double t, const BandScheme& scheme);

/// Freezes the map on [seg_lo, seg_hi]: identical inside, constant at the
/// segment's edge values outside. The certified constant is the constant of
/// the map restricted to the segment (exact for piecewise-linear maps).
LipschitzMap clamp_stage(const LipschitzMap& g, double seg_lo, double seg_hi);

struct SurfaceBuildOptions {
    int n_max = 20;
    smoothing::EpsSchedule eps_schedule;
    smoothing::SeriesMollifyOptions mollify;
    // accuracy for mollifying explicitly declared series stages
    double declared_stage_eps_factor = 0.0625;  // times schedule eps(n)
};

/// The separately absolutely continuous surface with prescribed diagonal:
/// clamped Lipschitz stages g_0 = 0, g_1, ..., g_N blended across diagonal
/// bands, the diagonal itself delegated to the series.
struct ExtensionSurface {
    Interval domain;
    NormedTarget target;
    std::vector<LipschitzMap> stages;  // clamped; stage n at index n-1
    BandScheme scheme;
    BaireSeries diagonal_source;       // unclamped stages
    Exhaustion exhaustion;
    std::vector<double> stage_eps;     // declared accuracy of stage n vs g

    int n_max() const { return static_cast<int>(stages.size()); }
    const LipschitzMap& stage(int n) const;  // 1-based, n >= 1
    double truncation_residual() const;      // declared tail after stage N
};

/// Builds the surface from a continuous map given directly (mollification
/// path). The declared diagonal is g itself; stage n approximates it within
/// eps_schedule.eps(n).
ExtensionSurface build_surface(const ContinuousMap& g, const Interval& dom,
                               const NormedTarget& target,
                               const SurfaceBuildOptions& opts = {});

/// Builds the surface from an explicitly declared stage series; the stages
/// are mollified (to gain certified constants) and then clamped. Tail
/// bounds are the declared ones plus the mollification dust.
ExtensionSurface build_surface(const BaireSeries& declared,
                               const SurfaceBuildOptions& opts = {});

struct SurfaceValue {
    Vec value;
    double residual = 0.0;  // declared bound on the truncation error
};

/// Exact branch dispatch on |x-y|: zero beyond the first band, the band
/// blend in between, the series on the diagonal, and the top stage with a
/// reported residual inside the innermost band.
SurfaceValue eval_surface(const ExtensionSurface& s, double x, double y,
                          double tol);

enum class Axis { First, Second };

/// One-variable section with the other variable frozen at value; evaluates
/// the surface, so it is exactly as absolutely continuous as f itself.
ContinuousMap section(const ExtensionSurface& s, Axis fixed, double value,
                      double tol = 1e-9);

}  // namespace acdiag::extension
