#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "acdiag/funcspace.hpp"

namespace acdiag::extraction {

using RealMap = std::function<double(double)>;

/// Uniform level-n probing grid on the line: cell half-step h = alpha/4,
/// cells V_i = ((i-1)h, (i+1)h) around centers i*h, probe points
/// y_i = i*h + (3/4) alpha. For every t in V_i the probe satisfies
/// t + alpha/2 < y_i < t + alpha.
struct LevelGrid {
    int n = 1;
    double alpha = 0.5;  // 2^-n
    double h = 0.125;    // alpha/4

    static LevelGrid at(int n);
    double center(long i) const { return static_cast<double>(i) * h; }
    double probe(long i) const { return center(i) + 0.75 * alpha; }
};

/// Hat weights of the (at most two) cells containing x. `i` is the chosen
/// cell (larger weight, ties to the lower index), `j` the other one;
/// j == i when x sits in a single cell.
struct CellMembership {
    long i = 0;
    long j = 0;
    double w_i = 1.0;
    double w_j = 0.0;
};
CellMembership cells_at(const LevelGrid& grid, double x);

/// Level-n extracted value at x: the hat-weighted average of f(x, y_i) over
/// the cells containing x. Probes lie in (x + 2^-n-1, x + 2^-n); the caller
/// guarantees f is evaluable there.
Vec build_g_n(const BivariateMap& f, int n, double x);

/// The pointwise inequality behind the extraction: with beta the chosen
/// probe offset and gamma the other one, p(g_n(x) - f(x, x+beta)) is at most
/// p(f(x, x+beta) - f(x, x+gamma)). Holds for pseudo-norm targets too.
struct Prop31Certificate {
    double beta = 0.0;
    double gamma = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
};
Prop31Certificate extraction_certificate(const BivariateMap& f,
                                         const NormedTarget& target, int n,
                                         double x);

/// Homeomorphism (a,b) -> R with phi and its inverse locally Lipschitz:
/// phi(x) = 1/(b-x) - 1/(x-a); the inverse is solved to ~machine accuracy.
struct Transfer {
    RealMap phi;
    RealMap phi_inverse;
};
Transfer transfer_to_line(double a, double b);

struct LevelSummary {
    int n = 0;
    double max_err = 0.0;           // max |g_n(x) - f(x,x)| over samples
    double max_increment = 0.0;     // max |g_{n+1}(x) - g_n(x)|, 0 for last
    int spliced_count = 0;
    double max_cert_violation = 0.0;  // max(lhs - rhs) over unspliced samples
    double beta_min = 0.0, beta_max = 0.0;
};

struct ExtractionResult {
    Interval domain;
    NormedTarget target;
    std::vector<ContinuousMap> levels;  // g_n at index n-1, domain-aware
    std::vector<double> samples;
    // values[n-1][k] = g_n(samples[k]); err/increment/spliced likewise
    std::vector<std::vector<Vec>> values;
    std::vector<std::vector<double>> err;
    std::vector<std::vector<double>> increment;  // size levels-1 rows
    std::vector<std::vector<std::uint8_t>> spliced;
    std::vector<double> partial_sums;  // per sample, sum of all increments
    std::vector<LevelSummary> summary;
};

/// Recovers the level maps g_n (n = 1..levels) of the diagonal of f and
/// evaluates them on the sample points, with convergence bookkeeping.
/// Domains unbounded to the right probe directly; a finite closed right end
/// bridges into f(b,b) across the last probe width (splices are marked);
/// open bounded-right domains run through the line transfer.
ExtractionResult extract_series(const BivariateMap& f, const Interval& domain,
                                const NormedTarget& target, int levels,
                                std::span<const double> samples);

/// Variation of t -> f(x,t) over the window [x + 2^-k-1, x + 2^-k], the
/// shrinking-window diagnostic for the finite-variation hypothesis.
double window_variation(const BivariateMap& f, const NormedTarget& target,
                        double x, int k, std::size_t grid_points = 257);

}  // namespace acdiag::extraction
