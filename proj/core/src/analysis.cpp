#include "acdiag/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "acdiag/parallel.hpp"

namespace acdiag::analysis {

namespace {

void require_compact(const Interval& itv, const char* who) {
    if (!itv.bounded()) throw Error(std::string(who) + ": interval must be bounded");
}

}  // namespace

VariationReport variation(const ContinuousMap& f, const NormedTarget& target,
                          const Interval& interval, std::size_t points,
                          int threads) {
    require_compact(interval, "variation");
    if (points < 2) throw Error("variation: need at least two points");
    auto grid = grids::uniform(interval.lo, interval.hi, points);

    std::vector<double> partial(par::kChunks, 0.0);
    par::for_chunks(points - 1, threads,
                    [&](std::size_t chunk, std::size_t b, std::size_t e) {
                        double s = 0.0;
                        Vec prev = f(grid[b]);
                        for (std::size_t i = b; i < e; ++i) {
                            Vec cur = f(grid[i + 1]);
                            s += target.distance(cur, prev);
                            prev = std::move(cur);
                        }
                        partial[chunk] = s;
                    });

    VariationReport rep;
    rep.interval = interval;
    rep.partition = grid;
    rep.total = std::accumulate(partial.begin(), partial.end(), 0.0);
    double len = interval.length();
    for (double frac : {0.1, 0.01, 0.001, 0.0001}) {
        double delta = len * frac;
        std::size_t cells = std::min<std::size_t>(points - 1, 100'000);
        rep.modulus_table.emplace_back(
            delta, ac_modulus(f, target, interval, delta, cells, threads));
    }
    return rep;
}

double ac_modulus(const ContinuousMap& f, const NormedTarget& target,
                  const Interval& interval, double delta,
                  std::size_t grid_cells, int threads) {
    require_compact(interval, "ac_modulus");
    if (!(delta > 0.0)) throw Error("ac_modulus: delta must be positive");
    if (grid_cells < 1) throw Error("ac_modulus: need at least one cell");
    auto grid = grids::uniform(interval.lo, interval.hi, grid_cells + 1);
    double width = interval.length() / static_cast<double>(grid_cells);

    std::vector<double> inc(grid_cells, 0.0);
    par::for_chunks(grid_cells, threads,
                    [&](std::size_t, std::size_t b, std::size_t e) {
                        Vec prev = f(grid[b]);
                        for (std::size_t i = b; i < e; ++i) {
                            Vec cur = f(grid[i + 1]);
                            inc[i] = target.distance(cur, prev);
                            prev = std::move(cur);
                        }
                    });

    std::vector<std::size_t> order(grid_cells);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (inc[a] != inc[b]) return inc[a] > inc[b];
        return a < b;
    });

    double budget = delta;
    double value = 0.0;
    for (std::size_t i : order) {
        if (budget <= 0.0) break;
        if (width <= budget) {
            value += inc[i];
            budget -= width;
        } else {
            value += inc[i] * (budget / width);
            budget = 0.0;
        }
    }
    return value;
}

double lipschitz_estimate(const ContinuousMap& f, const NormedTarget& target,
                          const Interval& interval, std::size_t grid_points,
                          int threads) {
    require_compact(interval, "lipschitz_estimate");
    if (grid_points < 2) throw Error("lipschitz_estimate: need >= 2 points");
    auto grid = grids::uniform(interval.lo, interval.hi, grid_points);

    std::vector<double> partial(par::kChunks, 0.0);
    par::for_chunks(grid_points - 1, threads,
                    [&](std::size_t chunk, std::size_t b, std::size_t e) {
                        double best = 0.0;
                        Vec prev = f(grid[b]);
                        for (std::size_t i = b; i < e; ++i) {
                            Vec cur = f(grid[i + 1]);
                            best = std::max(best,
                                            target.distance(cur, prev) /
                                                (grid[i + 1] - grid[i]));
                            prev = std::move(cur);
                        }
                        partial[chunk] = best;
                    });
    return *std::max_element(partial.begin(), partial.end());
}

BlendCheck check_blend_constant(const LipschitzMap& g, const LipschitzMap& h,
                                const LipschitzMap& phi,
                                std::optional<double> sup_diff,
                                std::size_t grid_points) {
    if (phi.target.dim != 1)
        throw Error("check_blend_constant: phi must be scalar");
    const Interval& dom = g.domain;
    require_compact(dom, "check_blend_constant");
    auto grid = grids::uniform(dom.lo, dom.hi, grid_points);

    double measured_sup_diff = 0.0;
    for (double x : grid) {
        double w = phi.eval(x)[0];
        if (w < -1e-12 || w > 1.0 + 1e-12)
            throw Error("check_blend_constant: phi leaves [0,1]");
        measured_sup_diff =
            std::max(measured_sup_diff, g.target.distance(g.eval(x), h.eval(x)));
    }

    BlendCheck out;
    out.K = std::max(g.constant, h.constant);
    out.L = phi.constant;
    out.M = sup_diff.value_or(measured_sup_diff);

    ContinuousMap blend = [&g, &h, &phi](double x) {
        double w = phi.eval(x)[0];
        Vec a = g.eval(x);
        Vec b = h.eval(x);
        Vec r(a.size());
        for (std::size_t k = 0; k < r.size(); ++k)
            r[k] = w * a[k] + (1.0 - w) * b[k];
        return r;
    };
    out.measured = lipschitz_estimate(blend, g.target, dom, grid_points);
    out.bound = (out.K + out.L * out.M) * (1.0 + 1e-6);
    out.pass = out.measured <= out.bound;
    return out;
}

double ACCertificate::delta_for_eps(double eps) const {
    if (!(eps > 0.0)) throw Error("delta_for_eps: eps must be positive");
    std::size_t pieces = constants.size();
    // piece sums from each index onward
    std::vector<double> suffix(pieces + 1, 0.0);
    for (std::size_t n = pieces; n-- > 0;)
        suffix[n] = suffix[n + 1] +
                    constants[n] * (breakpoints[n + 1] - breakpoints[n]);
    // suffix[pieces] == 0, so a valid split always exists for finite lists
    std::size_t m = pieces;
    for (std::size_t cand = 0; cand <= pieces; ++cand) {
        if (suffix[cand] < 0.5 * eps) {
            m = cand;
            break;
        }
    }
    double max_c = 0.0;
    for (std::size_t n = 0; n < m; ++n) max_c = std::max(max_c, constants[n]);
    if (max_c <= 0.0) return std::numeric_limits<double>::infinity();
    return eps / (2.0 * max_c);
}

ACCertificate piecewise_ac_certificate(std::span<const double> breakpoints,
                                       std::span<const double> constants) {
    if (breakpoints.size() < 2 || constants.size() + 1 != breakpoints.size())
        throw Error("ac certificate: need k+1 breakpoints for k constants");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
        if (!(breakpoints[i - 1] < breakpoints[i]))
            throw Error("ac certificate: breakpoints must increase strictly");
    for (double c : constants)
        if (!(c >= 0.0)) throw Error("ac certificate: constants must be >= 0");

    ACCertificate cert;
    cert.breakpoints.assign(breakpoints.begin(), breakpoints.end());
    cert.constants.assign(constants.begin(), constants.end());
    cert.tail = 0.0;
    for (std::size_t n = 0; n < constants.size(); ++n)
        cert.tail += constants[n] * (breakpoints[n + 1] - breakpoints[n]);
    return cert;
}

double SectionCertificate::tail_term(int m) const {
    int n_bands = static_cast<int>(band_constants.size());
    double s = 0.0;
    for (int n = std::max(1, m); n <= n_bands; ++n)
        s += band_constants[static_cast<std::size_t>(n - 1)] *
             (deltas[static_cast<std::size_t>(n - 1)] -
              deltas[static_cast<std::size_t>(n)]);
    s += inner_constant * inner_radius;
    return 2.0 * s + 2.0 * jump;
}

double SectionCertificate::delta_for_eps(double eps) const {
    if (!(eps > 0.0)) throw Error("delta_for_eps: eps must be positive");
    int n_bands = static_cast<int>(band_constants.size());
    int m = -1;
    for (int cand = 1; cand <= n_bands + 1; ++cand) {
        if (tail_term(cand) < 0.5 * eps) {
            m = cand;
            break;
        }
    }
    if (m < 0)
        throw NumericError("section certificate: band sums do not drop below "
                           "eps/2");
    double max_c = 0.0;  // far field is constant zero
    for (int n = 1; n < m; ++n)
        max_c = std::max(max_c, band_constants[static_cast<std::size_t>(n - 1)]);
    if (m == n_bands + 1) max_c = std::max(max_c, inner_constant);
    double cap = domain_length;
    if (max_c <= 0.0) return cap;
    return std::min(cap, eps / (2.0 * max_c));
}

SectionCertificate section_ac_certificate(const extension::ExtensionSurface& s,
                                          double x0, double tol) {
    if (!s.domain.contains(x0))
        throw Error("section certificate: x0 outside the domain");
    SectionCertificate cert;
    cert.x0 = x0;
    cert.deltas = s.scheme.delta;
    cert.band_constants = s.scheme.C;
    cert.far_radius = s.scheme.delta_n(1);
    cert.inner_radius = s.scheme.delta_n(s.n_max() + 1);
    cert.inner_constant = s.stage(s.n_max()).constant;
    // discontinuity of the evaluated surface at the diagonal point: the
    // diagonal branch vs. the innermost band limit
    cert.jump = s.target.distance(extension::eval_surface(s, x0, x0, tol).value,
                                  s.stage(s.n_max()).eval(x0));
    cert.declared_residual = s.truncation_residual();
    cert.domain_length = s.domain.bounded()
                             ? s.domain.length()
                             : std::numeric_limits<double>::infinity();
    return cert;
}

std::vector<std::pair<double, double>> pseudo_norm_obstruction(
    double p, std::span<const double> scales) {
    if (!(p > 0.0 && p < 1.0))
        throw Error("pseudo_norm_obstruction: p must lie in (0,1)");
    std::vector<std::pair<double, double>> table;
    for (double h : scales) {
        if (!(h > 0.0))
            throw Error("pseudo_norm_obstruction: scales must be positive");
        table.emplace_back(h, std::pow(h, p - 1.0));
    }
    return table;
}

}  // namespace acdiag::analysis
