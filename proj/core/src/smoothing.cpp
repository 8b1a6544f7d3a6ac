#include "acdiag/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace acdiag::smoothing {

namespace {

// Probe fractions for oscillation sampling: a uniform comb plus a few
// irrational offsets that do not resonate with periodic features.
constexpr double kOscFractions[] = {
    0.0,    0.0625, 0.125,  0.1875, 0.25,   0.3125, 0.375,  0.4375,
    0.5,    0.5625, 0.625,  0.6875, 0.75,   0.8125, 0.875,  0.9375,
    1.0,    0.06180339887498949, 0.13456314590459036, 0.38196601125010515,
    0.61803398874989485, 0.86543685409540964, 0.93819660112501051,
};

// Interior probe fractions for chord-error sampling; 0.5 doubles as the
// split point so its value is reused by the children.
constexpr double kChordFractions[] = {
    0.14594357142390272, 0.30901699437494742, 0.5,
    0.69098300562505258, 0.85405642857609728,
};
constexpr std::size_t kChordMidIndex = 2;

// Upper bound on the diameter of f over [lo, hi] from sampled values:
// the target norm of the per-coordinate ranges (valid for the monotone
// L1/L2/Linf kinds, conservative in general).
double sampled_osc(const ContinuousMap& f, const NormedTarget& target,
                   double lo, double hi) {
    int d = target.dim;
    Vec mins(static_cast<std::size_t>(d),
             std::numeric_limits<double>::infinity());
    Vec maxs(static_cast<std::size_t>(d),
             -std::numeric_limits<double>::infinity());
    double w = hi - lo;
    for (double frac : kOscFractions) {
        Vec v = f(lo + frac * w);
        if (static_cast<int>(v.size()) != d)
            throw DimensionError("mollifier: evaluator dimension mismatch");
        for (int k = 0; k < d; ++k) {
            mins[static_cast<std::size_t>(k)] =
                std::min(mins[static_cast<std::size_t>(k)],
                         v[static_cast<std::size_t>(k)]);
            maxs[static_cast<std::size_t>(k)] =
                std::max(maxs[static_cast<std::size_t>(k)],
                         v[static_cast<std::size_t>(k)]);
        }
    }
    Vec range(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k)
        range[static_cast<std::size_t>(k)] =
            maxs[static_cast<std::size_t>(k)] - mins[static_cast<std::size_t>(k)];
    return target.norm(range);
}

void require_compact(const Interval& dom, const char* who) {
    if (!dom.bounded() || !dom.closed_lo || !dom.closed_hi)
        throw Error(std::string(who) + " requires a compact [a,b] domain");
}

struct OscRefiner {
    const ContinuousMap& f;
    const NormedTarget& target;
    const Interval& dom;
    double eps;
    double min_width;
    std::size_t max_cells;
    std::size_t leaves = 0;
    std::vector<double> cuts;

    void run() {
        cuts.clear();
        cuts.push_back(dom.lo);
        descend(dom.lo, dom.hi);
    }

    void descend(double lo, double hi) {
        double w = hi - lo;
        double ext_lo = std::max(dom.lo, lo - 0.25 * w);
        double ext_hi = std::min(dom.hi, hi + 0.25 * w);
        if (sampled_osc(f, target, ext_lo, ext_hi) < 0.5 * eps) {
            if (++leaves > max_cells)
                throw NumericError("mollifier refinement budget exhausted");
            cuts.push_back(hi);
            return;
        }
        if (w <= min_width)
            throw NumericError(
                "mollifier refinement: oscillation persists below resolution");
        double mid = lo + 0.5 * w;
        descend(lo, mid);
        descend(mid, hi);
    }
};

std::size_t base_cell_index(const std::vector<double>& cuts, double x) {
    auto it = std::upper_bound(cuts.begin(), cuts.end(), x);
    std::size_t j = it == cuts.begin()
                        ? 0
                        : static_cast<std::size_t>(it - cuts.begin()) - 1;
    std::size_t m = cuts.size() - 1;
    return std::min(j, m - 1);
}

void assemble_cells(MollifierCover& cover, const ContinuousMap& f) {
    const auto& cuts = cover.cuts;
    std::size_t m = cuts.size() - 1;
    cover.cells.clear();
    cover.cells.reserve(m);
    auto width = [&](std::size_t j) { return cuts[j + 1] - cuts[j]; };
    for (std::size_t j = 0; j < m; ++j) {
        double lo = j == 0 ? cover.domain.lo - 0.25 * width(0)
                           : cuts[j] - 0.25 * std::min(width(j - 1), width(j));
        double hi = j == m - 1
                        ? cover.domain.hi + 0.25 * width(m - 1)
                        : cuts[j + 1] + 0.25 * std::min(width(j), width(j + 1));
        Vec anchor = f(cover.domain.clamp(0.5 * (lo + hi)));
        cover.cells.push_back({lo, hi, std::move(anchor)});
    }
}

// Splits the base cells containing the given points, then rebuilds the
// widened cells and anchors. Returns false if nothing was split.
bool split_cells_at(MollifierCover& cover, const ContinuousMap& f,
                    const std::vector<double>& points, double min_width) {
    std::vector<double> mids;
    for (double x : points) {
        std::size_t j = base_cell_index(cover.cuts, x);
        double w = cover.cuts[j + 1] - cover.cuts[j];
        if (w <= min_width)
            throw NumericError(
                "mollifier repair: oscillation persists below resolution");
        mids.push_back(cover.cuts[j] + 0.5 * w);
    }
    if (mids.empty()) return false;
    cover.cuts.insert(cover.cuts.end(), mids.begin(), mids.end());
    std::sort(cover.cuts.begin(), cover.cuts.end());
    cover.cuts.erase(std::unique(cover.cuts.begin(), cover.cuts.end()),
                     cover.cuts.end());
    assemble_cells(cover, f);
    return true;
}

std::vector<double> verify_sup(const ContinuousMap& f, const PiecewiseLinear& g,
                               const NormedTarget& target, const Interval& dom,
                               double eps, int per_unit) {
    std::size_t n = grids::scaled_points(dom.length(), per_unit);
    std::vector<double> bad;
    auto grid = grids::uniform(dom.lo, dom.hi, n);
    for (double x : grid)
        if (target.distance(f(x), g.eval(x)) > eps) bad.push_back(x);
    return bad;
}

}  // namespace

std::vector<std::size_t> MollifierCover::cells_at(double x) const {
    std::vector<std::size_t> out;
    if (cells.empty()) return out;
    std::size_t j = base_cell_index(cuts, x);
    for (std::size_t c : {j == 0 ? j : j - 1, j, j + 1}) {
        if (c >= cells.size()) continue;
        if (cells[c].lo < x && x < cells[c].hi) {
            if (out.empty() || out.back() != c) out.push_back(c);
        }
    }
    return out;
}

double MollifierCover::psi(std::size_t j, double x) const {
    const Cell& c = cells.at(j);
    if (!(c.lo < x && x < c.hi)) return 0.0;
    double dl = c.lo <= domain.lo ? std::numeric_limits<double>::infinity()
                                  : x - c.lo;
    double dr = c.hi >= domain.hi ? std::numeric_limits<double>::infinity()
                                  : c.hi - x;
    double r = std::min(dl, dr);
    return std::isinf(r) ? 1.0 : r;
}

std::vector<std::pair<std::size_t, double>> MollifierCover::weights(double x) const {
    auto active = cells_at(x);
    if (active.empty())
        throw Error("mollifier cover: point not covered by any cell");
    double sum = 0.0;
    std::vector<std::pair<std::size_t, double>> w;
    for (std::size_t j : active) {
        double p = psi(j, x);
        sum += p;
        w.emplace_back(j, p);
    }
    for (auto& [j, p] : w) p /= sum;
    return w;
}

Vec MollifierCover::eval(double x) const {
    auto w = weights(x);
    Vec r = zero_vec(target.dim);
    for (const auto& [j, p] : w)
        for (std::size_t k = 0; k < r.size(); ++k)
            r[k] += p * cells[j].anchor[k];
    return r;
}

PiecewiseLinear MollifierCover::to_piecewise_linear() const {
    PiecewiseLinear pl;
    pl.dim = target.dim;
    std::size_t m = cells.size();
    pl.push_knot(domain.lo, cells.front().anchor);
    for (std::size_t j = 0; j + 1 < m; ++j) {
        // overlap radius around the shared cut
        double q = 0.25 * std::min(cuts[j + 1] - cuts[j], cuts[j + 2] - cuts[j + 1]);
        pl.push_knot(cuts[j + 1] - q, cells[j].anchor);
        pl.push_knot(cuts[j + 1] + q, cells[j + 1].anchor);
    }
    pl.push_knot(domain.hi, cells.back().anchor);
    pl.validate();
    return pl;
}

MollifierCover build_mollifier_cover(const ContinuousMap& f, const Interval& dom,
                                     const NormedTarget& target, double eps,
                                     const MollifyOptions& opts) {
    require_compact(dom, "build_mollifier_cover");
    if (!(eps > 0.0)) throw Error("mollifier: eps must be positive");
    if (!target.is_norm())
        throw Error("mollifier requires a homogeneous norm target");

    double min_width = std::max(dom.length() * opts.min_width_factor,
                                std::numeric_limits<double>::min() * 64);
    OscRefiner r{f, target, dom, eps, min_width, opts.max_cells};
    r.run();

    MollifierCover cover;
    cover.domain = dom;
    cover.target = target;
    cover.eps = eps;
    cover.cuts = std::move(r.cuts);
    assemble_cells(cover, f);

    // The oscillation criterion keeps |f - g| <= eps/2 at the sampled
    // points; sweep a fixed grid and force splits where sampling missed.
    for (int round = 0; round <= opts.max_repair_rounds; ++round) {
        auto bad = verify_sup(f, cover.to_piecewise_linear(), target, dom, eps,
                              opts.verify_per_unit);
        if (bad.empty()) return cover;
        if (round == opts.max_repair_rounds)
            throw NumericError("mollifier: approximation target not met after "
                               "repair rounds");
        split_cells_at(cover, f, bad, min_width);
        if (cover.cells.size() > opts.max_cells)
            throw NumericError("mollifier refinement budget exhausted");
    }
    return cover;
}

LipschitzMap lipschitz_approx(const MollifierCover& cover) {
    return LipschitzMap::from_pl(cover.domain, cover.target,
                                 cover.to_piecewise_linear());
}

LipschitzMap lipschitz_approx(const ContinuousMap& f, const Interval& dom,
                              const NormedTarget& target, double eps,
                              const MollifyOptions& opts) {
    return lipschitz_approx(build_mollifier_cover(f, dom, target, eps, opts));
}

namespace {

struct ChordRefiner {
    const ContinuousMap& f;
    const NormedTarget& target;
    double eps;
    double min_width;
    std::size_t max_cells;
    std::size_t leaves = 0;
    PiecewiseLinear out;

    void run(const Interval& dom) {
        out.dim = target.dim;
        out.knots.clear();
        out.flat.clear();
        Vec f_lo = f(dom.lo);
        Vec f_hi = f(dom.hi);
        out.push_knot(dom.lo, f_lo);
        descend(dom.lo, dom.hi, f_lo, f_hi);
    }

    void descend(double lo, double hi, const Vec& f_lo, const Vec& f_hi) {
        double w = hi - lo;
        double worst = 0.0;
        Vec f_mid;
        Vec probe(static_cast<std::size_t>(target.dim));
        for (std::size_t i = 0; i < std::size(kChordFractions); ++i) {
            double frac = kChordFractions[i];
            Vec v = f(lo + frac * w);
            for (std::size_t k = 0; k < probe.size(); ++k)
                probe[k] = v[k] - (f_lo[k] + frac * (f_hi[k] - f_lo[k]));
            worst = std::max(worst, target.norm(probe));
            if (i == kChordMidIndex) f_mid = std::move(v);
        }
        if (worst <= 0.5 * eps) {
            if (++leaves > max_cells)
                throw NumericError("piecewise refinement budget exhausted");
            out.push_knot(hi, f_hi);
            return;
        }
        if (w <= min_width)
            throw NumericError(
                "piecewise refinement: chord error persists below resolution");
        double mid = lo + 0.5 * w;
        descend(lo, mid, f_lo, f_mid);
        descend(mid, hi, f_mid, f_hi);
    }
};

// Batch-inserts midpoints of the segments containing the given points.
void force_split_segments(PiecewiseLinear& pl, const ContinuousMap& f,
                          const std::vector<double>& points, double min_width) {
    std::vector<std::size_t> segs;
    for (double x : points) {
        auto it = std::upper_bound(pl.knots.begin(), pl.knots.end(), x);
        std::size_t i = it == pl.knots.begin()
                            ? 1
                            : static_cast<std::size_t>(it - pl.knots.begin());
        i = std::min(i, pl.knots.size() - 1);
        segs.push_back(i);  // segment (i-1, i)
    }
    std::sort(segs.begin(), segs.end());
    segs.erase(std::unique(segs.begin(), segs.end()), segs.end());

    PiecewiseLinear merged;
    merged.dim = pl.dim;
    std::size_t next = 0;
    for (std::size_t i = 0; i < pl.knots.size(); ++i) {
        if (next < segs.size() && segs[next] == i) {
            double a = pl.knots[i - 1];
            double b = pl.knots[i];
            if (b - a <= min_width)
                throw NumericError(
                    "piecewise repair: chord error persists below resolution");
            double mid = a + 0.5 * (b - a);
            merged.push_knot(mid, f(mid));
            ++next;
        }
        auto v = pl.value(i);
        merged.push_knot(pl.knots[i], Vec(v.begin(), v.end()));
    }
    pl = std::move(merged);
}

}  // namespace

LipschitzMap pl_approx(const ContinuousMap& f, const Interval& dom,
                       const NormedTarget& target, double eps,
                       const MollifyOptions& opts) {
    require_compact(dom, "pl_approx");
    if (!(eps > 0.0)) throw Error("pl_approx: eps must be positive");
    if (!target.is_norm())
        throw Error("pl_approx requires a homogeneous norm target");

    double min_width = std::max(dom.length() * opts.min_width_factor,
                                std::numeric_limits<double>::min() * 64);
    ChordRefiner r{f, target, eps, min_width, opts.max_cells};
    r.run(dom);

    PiecewiseLinear pl = std::move(r.out);
    pl.validate();
    for (int round = 0; round <= opts.max_repair_rounds; ++round) {
        auto bad = verify_sup(f, pl, target, dom, eps, opts.verify_per_unit);
        if (bad.empty()) break;
        if (round == opts.max_repair_rounds)
            throw NumericError("pl_approx: approximation target not met after "
                               "repair rounds");
        force_split_segments(pl, f, bad, min_width);
    }
    return LipschitzMap::from_pl(dom, target, std::move(pl));
}

void EpsSchedule::validate() const {
    if (!(coeff > 0.0)) throw Error("eps schedule: coeff must be positive");
    if (!(ratio > 0.0 && ratio < 1.0))
        throw Error("eps schedule: ratio must lie in (0,1)");
}

double EpsSchedule::eps(int n) const { return coeff * std::pow(ratio, n); }

double EpsSchedule::tail(int n) const {
    // sum_{m>=n} (eps_m + eps_{m+1}) for the geometric schedule
    return coeff * std::pow(ratio, n) * (1.0 + ratio) / (1.0 - ratio);
}

MollifiedSeries mollify_series(const ContinuousMap& f, const Interval& dom,
                               const NormedTarget& target, int n_max,
                               const EpsSchedule& schedule,
                               const SeriesMollifyOptions& opts) {
    if (n_max < 1) throw Error("mollify_series: n_max must be >= 1");
    schedule.validate();
    MollifiedSeries out;
    out.series.domain = dom;
    out.series.target = target;
    for (int n = 1; n <= n_max; ++n) {
        double e = schedule.eps(n);
        LipschitzMap stage;
        if (e >= opts.cover_min_eps) {
            stage = lipschitz_approx(f, dom, target, e, opts.mollify);
        } else {
            MollifyOptions fine = opts.mollify;
            fine.max_cells = opts.max_cells_fine;
            stage = pl_approx(f, dom, target, e, fine);
        }
        out.series.stages.push_back(stage.eval);
        out.series.tail_bounds.push_back(schedule.tail(n));
        out.stage_eps.push_back(e);
        out.stage_maps.push_back(std::move(stage));
    }
    out.series.validate();
    return out;
}

}  // namespace acdiag::smoothing
