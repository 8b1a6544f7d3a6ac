#pragma once

#include <optional>
#include <span>
#include <vector>

#include "acdiag/extension.hpp"
#include "acdiag/funcspace.hpp"

namespace acdiag::analysis {

/// Total increment sum over a uniform partition, plus a small table of
/// budgeted-modulus estimates. Monotone nondecreasing under refinement.
VariationReport variation(const ContinuousMap& f, const NormedTarget& target,
                          const Interval& interval, std::size_t points,
                          int threads = 1);

/// Lower-bound estimate of the absolute-continuity modulus: the sup of
/// increment sums over disjoint subinterval collections of total length
/// < delta, approximated by greedy (fractional-knapsack) selection of
/// equal-width grid cells sorted by increment.
double ac_modulus(const ContinuousMap& f, const NormedTarget& target,
                  const Interval& interval, double delta,
                  std::size_t grid_cells, int threads = 1);

/// Max difference quotient over consecutive grid pairs; a lower bound on
/// the true constant.
double lipschitz_estimate(const ContinuousMap& f, const NormedTarget& target,
                          const Interval& interval, std::size_t grid_points,
                          int threads = 1);

struct BlendCheck {
    bool pass = false;
    double measured = 0.0;  // grid-estimated constant of the blend
    double bound = 0.0;     // (K + L*M) * (1 + 1e-6)
    double K = 0.0, L = 0.0, M = 0.0;
};

/// Verifies that phi*g + (1-phi)*h is Lipschitz with constant K + L*M,
/// where K bounds both g and h, L bounds phi and M bounds |g - h|.
/// phi must map into [0,1]; out-of-range values are rejected.
BlendCheck check_blend_constant(const LipschitzMap& g, const LipschitzMap& h,
                                const LipschitzMap& phi,
                                std::optional<double> sup_diff = {},
                                std::size_t grid_points = 4097);

/// Absolute-continuity certificate for a map that is C_n-Lipschitz on
/// [a_n, a_{n+1}] with sum C_n (a_{n+1} - a_n) finite.
struct ACCertificate {
    std::vector<double> breakpoints;  // size pieces + 1, strictly increasing
    std::vector<double> constants;    // C_n per piece
    double tail = 0.0;                // sum C_n (a_{n+1} - a_n)

    /// delta = eps / (2 max{C_n : n <= m}) with m chosen so the piece sum
    /// beyond m is below eps/2.
    double delta_for_eps(double eps) const;
};

ACCertificate piecewise_ac_certificate(std::span<const double> breakpoints,
                                       std::span<const double> constants);

/// Two-sided certificate for a section f(., x0) of an extension surface:
/// band n is C_n-Lipschitz at distance (delta_{n+1}, delta_n] from x0, the
/// innermost disc follows the top stage, and the far field is zero. `jump`
/// is the computed discontinuity of the evaluated (truncated) surface at
/// the diagonal point itself; `declared_residual` is the series tail and
/// only relates this surface to the ideal infinite one.
struct SectionCertificate {
    double x0 = 0.0;
    double far_radius = 0.0;    // delta_1
    double inner_radius = 0.0;  // delta_{N+1}
    double inner_constant = 0.0;
    double jump = 0.0;
    double declared_residual = 0.0;
    std::vector<double> band_constants;  // C_n, band n at index n-1
    std::vector<double> deltas;          // delta_1..delta_{N+1}
    double domain_length = 0.0;

    double tail_term(int m) const;  // both sides from band m inward
    double delta_for_eps(double eps) const;
};

SectionCertificate section_ac_certificate(const extension::ExtensionSurface& s,
                                          double x0, double tol = 1e-9);

/// Two-point Lipschitz ratios of the identity into (R, |.|^p): the table
/// h -> h^(p-1), diverging as h -> 0, so no finite local constant exists.
std::vector<std::pair<double, double>> pseudo_norm_obstruction(
    double p, std::span<const double> scales);

}  // namespace acdiag::analysis
