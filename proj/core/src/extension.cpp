#include "acdiag/extension.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace acdiag::extension {

namespace {

double end_offset(const Interval& dom, int n) {
    // open bounded ends are approached geometrically
    return dom.bounded() ? 0.5 * dom.length() * std::ldexp(1.0, -n)
                         : std::ldexp(1.0, -n);
}

}  // namespace

Exhaustion Exhaustion::standard(const Interval& dom, int n_max) {
    if (n_max < 1) throw Error("exhaustion needs n_max >= 1");
    // reference point for pushing segments out along infinite ends
    double c;
    if (dom.bounded())
        c = dom.midpoint();
    else if (dom.bounded_below())
        c = dom.lo + 1.0;
    else if (dom.bounded_above())
        c = dom.hi - 1.0;
    else
        c = 0.0;

    Exhaustion e;
    for (int n = 1; n <= n_max; ++n) {
        double lo, hi;
        if (!dom.bounded_below())
            lo = c - n;
        else if (dom.closed_lo)
            lo = dom.lo;
        else
            lo = dom.lo + end_offset(dom, n);
        if (!dom.bounded_above())
            hi = c + n;
        else if (dom.closed_hi)
            hi = dom.hi;
        else
            hi = dom.hi - end_offset(dom, n);
        e.segments.emplace_back(lo, hi);
    }
    e.validate(dom);
    return e;
}

std::pair<double, double> Exhaustion::segment(int n) const {
    if (n < 1 || n > static_cast<int>(segments.size()))
        throw Error("exhaustion segment index out of range");
    return segments[static_cast<std::size_t>(n - 1)];
}

void Exhaustion::validate(const Interval& dom) const {
    if (segments.empty()) throw Error("exhaustion is empty");
    for (std::size_t i = 0; i < segments.size(); ++i) {
        auto [lo, hi] = segments[i];
        if (!(lo < hi)) throw Error("exhaustion segment is degenerate");
        if (lo < dom.lo || hi > dom.hi)
            throw Error("exhaustion segment leaves the domain");
        if (i > 0) {
            auto [plo, phi] = segments[i - 1];
            if (lo > plo || hi < phi)
                throw Error("exhaustion segments must increase");
        }
    }
}

double BandScheme::sum_K_delta() const {
    double s = 0.0;
    for (int n = 1; n <= bands(); ++n)
        s += K[static_cast<std::size_t>(n - 1)] * delta_n(n);
    return s;
}

double BandScheme::tail_C_dd(int m) const {
    double s = 0.0;
    for (int n = std::max(1, m); n <= bands(); ++n)
        s += C[static_cast<std::size_t>(n - 1)] * (delta_n(n) - delta_n(n + 1));
    return s;
}

double BandScheme::tail_certificate_bound(int m) const {
    double s = 0.0;
    for (int n = std::max(1, m); n <= bands(); ++n)
        s += 3.0 * K[static_cast<std::size_t>(n - 1)] * delta_n(n) +
             stage_sup_diff[static_cast<std::size_t>(n - 1)];
    return s;
}

std::vector<double> choose_deltas(std::span<const double> K) {
    if (K.empty()) throw Error("choose_deltas: need at least one constant");
    for (double k : K)
        if (!(k >= 0.0) || !std::isfinite(k))
            throw Error("choose_deltas: constants must be finite and >= 0");
    std::size_t n_bands = K.size();
    std::vector<double> delta(n_bands + 1);
    for (std::size_t i = 0; i < n_bands + 1; ++i) {
        double k = K[std::min(i, n_bands - 1)];
        double cap = std::ldexp(1.0, -static_cast<int>(i) - 1) / std::max(1.0, k);
        delta[i] = i == 0 ? cap : std::min(0.5 * delta[i - 1], cap);
    }
    return delta;
}

double cutoff(int n, double t, const BandScheme& scheme) {
    if (n < 1 || n > scheme.bands()) throw Error("cutoff: band index out of range");
    double outer = scheme.delta_n(n);
    double inner = scheme.delta_n(n + 1);
    double u = std::abs(t);
    if (u > outer) return 1.0;
    if (u < inner) return 0.0;
    return (u - inner) / (outer - inner);
}

LipschitzMap clamp_stage(const LipschitzMap& g, double seg_lo, double seg_hi) {
    if (!(seg_lo < seg_hi)) throw Error("clamp_stage: degenerate segment");
    if (seg_lo < g.domain.lo || seg_hi > g.domain.hi)
        throw Error("clamp_stage: segment leaves the map domain");

    LipschitzMap out;
    out.domain = g.domain;
    out.target = g.target;
    if (g.pl) {
        PiecewiseLinear clamped;
        clamped.dim = g.pl->dim;
        clamped.push_knot(seg_lo, g.pl->eval(seg_lo));
        for (std::size_t i = 0; i < g.pl->size(); ++i) {
            double t = g.pl->knots[i];
            if (t > seg_lo && t < seg_hi) {
                auto v = g.pl->value(i);
                clamped.push_knot(t, Vec(v.begin(), v.end()));
            }
        }
        clamped.push_knot(seg_hi, g.pl->eval(seg_hi));
        return LipschitzMap::from_pl(g.domain, g.target, std::move(clamped));
    }

    ContinuousMap inner = g.eval;
    out.eval = [inner, seg_lo, seg_hi](double x) {
        return inner(std::clamp(x, seg_lo, seg_hi));
    };
    if (g.constant_kind == ConstantKind::Certified) {
        // the global certified bound stays valid for the restriction
        out.constant = g.constant;
        out.constant_kind = ConstantKind::Certified;
    } else {
        std::size_t n = grids::scaled_points(seg_hi - seg_lo,
                                             grids::kLipschitzPerUnit);
        auto grid = grids::uniform(seg_lo, seg_hi, n);
        double best = 0.0;
        Vec prev = inner(grid[0]);
        for (std::size_t i = 1; i < grid.size(); ++i) {
            Vec cur = inner(grid[i]);
            best = std::max(best, g.target.distance(cur, prev) /
                                      (grid[i] - grid[i - 1]));
            prev = std::move(cur);
        }
        out.constant = best;
        out.constant_kind = ConstantKind::GridEstimated;
    }
    return out;
}

namespace {

// sup |g_n - g_{n-1}| over the whole line, exact from the piecewise-linear
// structure (both maps are constant beyond their knots).
double stage_sup_diff_exact(const LipschitzMap& cur, const LipschitzMap* prev,
                            const NormedTarget& target) {
    if (!cur.pl) throw Error("surface stages must be piecewise linear");
    double lo = cur.pl->knots.front();
    double hi = cur.pl->knots.back();
    if (prev) {
        if (!prev->pl) throw Error("surface stages must be piecewise linear");
        lo = std::min(lo, prev->pl->knots.front());
        hi = std::max(hi, prev->pl->knots.back());
        return pl_sup_distance(*cur.pl, *prev->pl, target, lo, hi);
    }
    return cur.pl->sup_norm(target, lo, hi);
}

BandScheme assemble_scheme(const std::vector<LipschitzMap>& stages,
                           const NormedTarget& target) {
    int n_stages = static_cast<int>(stages.size());
    BandScheme scheme;
    scheme.K.resize(static_cast<std::size_t>(n_stages));
    for (int n = 1; n <= n_stages; ++n) {
        double k_prev = n == 1 ? 0.0 : stages[static_cast<std::size_t>(n - 2)].constant;
        double k_cur = stages[static_cast<std::size_t>(n - 1)].constant;
        if (stages[static_cast<std::size_t>(n - 1)].constant_kind !=
            ConstantKind::Certified)
            throw Error("surface stages must carry certified constants");
        scheme.K[static_cast<std::size_t>(n - 1)] = std::max(k_prev, k_cur);
    }
    scheme.delta = choose_deltas(scheme.K);
    scheme.L.resize(scheme.K.size());
    scheme.M.resize(scheme.K.size());
    scheme.C.resize(scheme.K.size());
    scheme.stage_sup_diff.resize(scheme.K.size());
    for (int n = 1; n <= n_stages; ++n) {
        std::size_t i = static_cast<std::size_t>(n - 1);
        scheme.L[i] = 1.0 / (scheme.delta_n(n) - scheme.delta_n(n + 1));
        const LipschitzMap* prev = n == 1 ? nullptr : &stages[i - 1];
        scheme.stage_sup_diff[i] = stage_sup_diff_exact(stages[i], prev, target);
        scheme.M[i] = scheme.stage_sup_diff[i] + 2.0 * scheme.K[i] * scheme.delta_n(n);
        scheme.C[i] = scheme.K[i] + scheme.L[i] * scheme.M[i];
    }
    return scheme;
}

ExtensionSurface finish_surface(Interval dom, NormedTarget target,
                                std::vector<LipschitzMap> unclamped,
                                std::vector<double> tail_bounds,
                                std::vector<double> stage_eps,
                                Exhaustion exhaustion) {
    ExtensionSurface s;
    s.domain = dom;
    s.target = target;
    s.exhaustion = std::move(exhaustion);
    s.stage_eps = std::move(stage_eps);

    s.diagonal_source.domain = dom;
    s.diagonal_source.target = target;
    for (const auto& m : unclamped) s.diagonal_source.stages.push_back(m.eval);
    s.diagonal_source.tail_bounds = std::move(tail_bounds);
    s.diagonal_source.validate();

    s.stages.reserve(unclamped.size());
    for (std::size_t i = 0; i < unclamped.size(); ++i) {
        auto [lo, hi] = s.exhaustion.segment(static_cast<int>(i) + 1);
        s.stages.push_back(clamp_stage(unclamped[i], lo, hi));
    }
    s.scheme = assemble_scheme(s.stages, target);
    return s;
}

}  // namespace

const LipschitzMap& ExtensionSurface::stage(int n) const {
    if (n < 1 || n > n_max()) throw Error("surface stage index out of range");
    return stages[static_cast<std::size_t>(n - 1)];
}

double ExtensionSurface::truncation_residual() const {
    return diagonal_source.tail_bound(diagonal_source.n_max());
}

ExtensionSurface build_surface(const ContinuousMap& g, const Interval& dom,
                               const NormedTarget& target,
                               const SurfaceBuildOptions& opts) {
    if (opts.n_max < 2) throw Error("build_surface: n_max must be >= 2");
    if (!target.is_norm())
        throw Error("build_surface requires a homogeneous norm target");
    opts.eps_schedule.validate();

    Exhaustion exhaustion = Exhaustion::standard(dom, opts.n_max);
    std::vector<LipschitzMap> unclamped;
    std::vector<double> tails, eps;
    for (int n = 1; n <= opts.n_max; ++n) {
        auto [lo, hi] = exhaustion.segment(n);
        Interval seg = Interval::closed(lo, hi);
        double e = opts.eps_schedule.eps(n);
        if (e >= opts.mollify.cover_min_eps) {
            unclamped.push_back(
                smoothing::lipschitz_approx(g, seg, target, e, opts.mollify.mollify));
        } else {
            smoothing::MollifyOptions fine = opts.mollify.mollify;
            fine.max_cells = opts.mollify.max_cells_fine;
            unclamped.push_back(smoothing::pl_approx(g, seg, target, e, fine));
        }
        tails.push_back(opts.eps_schedule.tail(n));
        eps.push_back(e);
    }
    return finish_surface(dom, target, std::move(unclamped), std::move(tails),
                          std::move(eps), std::move(exhaustion));
}

ExtensionSurface build_surface(const BaireSeries& declared,
                               const SurfaceBuildOptions& opts) {
    declared.validate();
    if (declared.n_max() < 2)
        throw Error("build_surface: series needs at least two stages");
    if (!declared.target.is_norm())
        throw Error("build_surface requires a homogeneous norm target");
    opts.eps_schedule.validate();

    int n_stages = declared.n_max();
    Exhaustion exhaustion = Exhaustion::standard(declared.domain, n_stages);
    std::vector<LipschitzMap> unclamped;
    std::vector<double> tails, eps;
    for (int n = 1; n <= n_stages; ++n) {
        auto [lo, hi] = exhaustion.segment(n);
        Interval seg = Interval::closed(lo, hi);
        double eta = opts.declared_stage_eps_factor * opts.eps_schedule.eps(n);
        const ContinuousMap& h = declared.stages[static_cast<std::size_t>(n - 1)];
        if (eta >= opts.mollify.cover_min_eps) {
            unclamped.push_back(
                smoothing::lipschitz_approx(h, seg, declared.target, eta,
                                            opts.mollify.mollify));
        } else {
            smoothing::MollifyOptions fine = opts.mollify.mollify;
            fine.max_cells = opts.mollify.max_cells_fine;
            unclamped.push_back(
                smoothing::pl_approx(h, seg, declared.target, eta, fine));
        }
        // declared increments plus the mollification dust
        tails.push_back(declared.tail_bound(n) +
                        opts.declared_stage_eps_factor *
                            opts.eps_schedule.tail(n));
        eps.push_back(eta + declared.tail_bound(n));
    }
    return finish_surface(declared.domain, declared.target, std::move(unclamped),
                          std::move(tails), std::move(eps),
                          std::move(exhaustion));
}

SurfaceValue eval_surface(const ExtensionSurface& s, double x, double y,
                          double tol) {
    if (!s.domain.contains(x) || !s.domain.contains(y))
        throw Error("eval_surface: point outside the domain square");
    if (x == y) {
        SeriesValue sv = sum_series(s.diagonal_source, x, tol);
        return {std::move(sv.value), sv.residual};
    }
    double dist = std::abs(x - y);
    int n_stages = s.n_max();
    if (dist > s.scheme.delta_n(1)) return {zero_vec(s.target.dim), 0.0};
    if (dist <= s.scheme.delta_n(n_stages + 1))
        return {s.stage(n_stages).eval(x), s.truncation_residual()};

    int n = 1;
    while (n < n_stages && dist <= s.scheme.delta_n(n + 1)) ++n;
    double phi = cutoff(n, x - y, s.scheme);
    Vec cur = s.stage(n).eval(x);
    Vec prev = n == 1 ? zero_vec(s.target.dim) : s.stage(n - 1).eval(x);
    Vec out(cur.size());
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = phi * prev[k] + (1.0 - phi) * cur[k];
    return {std::move(out), 0.0};
}

ContinuousMap section(const ExtensionSurface& s, Axis fixed, double value,
                      double tol) {
    if (!s.domain.contains(value))
        throw Error("section: fixed value outside the domain");
    auto sp = std::make_shared<const ExtensionSurface>(s);
    if (fixed == Axis::Second)
        return [sp, value, tol](double x) {
            return eval_surface(*sp, x, value, tol).value;
        };
    return [sp, value, tol](double y) {
        return eval_surface(*sp, value, y, tol).value;
    };
}

}  // namespace acdiag::extension
