#include "acdiag/extraction.hpp"

#include <algorithm>
#include <cmath>

namespace acdiag::extraction {

LevelGrid LevelGrid::at(int n) {
    if (n < 1 || n > 60) throw Error("extraction level out of range");
    LevelGrid g;
    g.n = n;
    g.alpha = std::ldexp(1.0, -n);
    g.h = 0.25 * g.alpha;
    return g;
}

CellMembership cells_at(const LevelGrid& grid, double x) {
    double t = x / grid.h;
    double fl = std::floor(t);
    long i0 = static_cast<long>(fl);
    double frac = t - fl;  // in [0,1)
    CellMembership m;
    if (frac == 0.0) {
        m.i = m.j = i0;
        m.w_i = 1.0;
        m.w_j = 0.0;
        return m;
    }
    double w_left = 1.0 - frac;
    double w_right = frac;
    if (w_left >= w_right) {  // ties go to the lower index
        m.i = i0;
        m.j = i0 + 1;
        m.w_i = w_left;
        m.w_j = w_right;
    } else {
        m.i = i0 + 1;
        m.j = i0;
        m.w_i = w_right;
        m.w_j = w_left;
    }
    return m;
}

Vec build_g_n(const BivariateMap& f, int n, double x) {
    LevelGrid grid = LevelGrid::at(n);
    CellMembership m = cells_at(grid, x);
    Vec u = f(x, grid.probe(m.i));
    if (m.j == m.i) return u;
    Vec v = f(x, grid.probe(m.j));
    Vec out(u.size());
    for (std::size_t k = 0; k < u.size(); ++k)
        out[k] = m.w_i * u[k] + m.w_j * v[k];
    return out;
}

Prop31Certificate extraction_certificate(const BivariateMap& f,
                                         const NormedTarget& target, int n,
                                         double x) {
    LevelGrid grid = LevelGrid::at(n);
    CellMembership m = cells_at(grid, x);
    double y_i = grid.probe(m.i);
    double y_j = grid.probe(m.j);
    Vec u = f(x, y_i);
    Vec v = m.j == m.i ? u : f(x, y_j);
    Vec g(u.size());
    for (std::size_t k = 0; k < u.size(); ++k)
        g[k] = m.w_i * u[k] + m.w_j * v[k];
    Prop31Certificate c;
    c.beta = y_i - x;
    c.gamma = y_j - x;
    c.lhs = target.distance(g, u);
    c.rhs = target.distance(u, v);
    return c;
}

namespace {

double solve_monotone(const RealMap& fn, double lo, double hi, double t) {
    // fn strictly increasing on (lo, hi) with fn -> -inf / +inf at the ends
    double a = lo, b = hi;
    for (int it = 0; it < 200; ++it) {
        double mid = a + 0.5 * (b - a);
        if (mid <= a || mid >= b) break;  // interval exhausted in doubles
        if (fn(mid) < t)
            a = mid;
        else
            b = mid;
    }
    return a + 0.5 * (b - a);
}

}  // namespace

Transfer transfer_to_line(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b))
        throw Error("transfer_to_line: need a finite interval with a < b");
    Transfer t;
    t.phi = [a, b](double x) {
        if (!(a < x && x < b))
            throw Error("transfer: point outside the open interval");
        return 1.0 / (b - x) - 1.0 / (x - a);
    };
    RealMap phi = t.phi;
    t.phi_inverse = [phi, a, b](double s) {
        return solve_monotone(phi, a, b, s);
    };
    return t;
}

namespace {

// phi for a right-open domain whose left end is infinite:
// (-inf, b) -> R, increasing, locally Lipschitz both ways.
Transfer transfer_left_ray(double b) {
    Transfer t;
    t.phi = [b](double x) {
        if (!(x < b)) throw Error("transfer: point outside the open interval");
        return (x - b) + 1.0 / (b - x);
    };
    RealMap phi = t.phi;
    t.phi_inverse = [phi, b](double s) {
        double lo = b - 1.0;
        while (phi(lo) > s) lo = b - 2.0 * (b - lo);  // expand left
        return solve_monotone(phi, lo, b, s);
    };
    return t;
}

enum class Route { Direct, DirectSplicedRight, TransferRight };

struct Extractor {
    BivariateMap f;  // owned: the returned level evaluators outlive the call
    Interval domain;
    NormedTarget target;
    Route route = Route::Direct;
    Transfer transfer;        // TransferRight only
    double left_closed_at = 0.0;
    bool splice_left = false;  // TransferRight with a closed left end

    static Extractor plan(const BivariateMap& f, const Interval& dom,
                          const NormedTarget& target) {
        Extractor e{f, dom, target};
        if (!dom.bounded_above()) {
            e.route = Route::Direct;
        } else if (dom.closed_hi) {
            e.route = Route::DirectSplicedRight;
        } else {
            e.route = Route::TransferRight;
            e.transfer = dom.bounded_below() ? transfer_to_line(dom.lo, dom.hi)
                                             : transfer_left_ray(dom.hi);
            if (dom.bounded_below() && dom.closed_lo) {
                e.splice_left = true;
                e.left_closed_at = dom.lo;
            }
        }
        return e;
    }

    // Level evaluator; `spliced` reports whether an endpoint bridge was used.
    Vec level_value(int n, double x, bool* spliced) const {
        if (spliced) *spliced = false;
        switch (route) {
            case Route::Direct:
                return build_g_n(f, n, x);
            case Route::DirectSplicedRight: {
                double b = domain.hi;
                double alpha = std::ldexp(1.0, -n);
                double anchor = b - alpha;
                if (x <= anchor) {
                    // probes stay at or below b; clamp away rounding dust
                    BivariateMap g = [this, b](double u, double v) {
                        return f(u, std::min(v, b));
                    };
                    return build_g_n(g, n, x);
                }
                if (spliced) *spliced = true;
                Vec at_b = f(b, b);
                // level too coarse for this domain: constant bridge
                if (anchor <= domain.lo) return at_b;
                BivariateMap g = [this, b](double u, double v) {
                    return f(u, std::min(v, b));
                };
                Vec at_anchor = build_g_n(g, n, anchor);
                double w = (x - anchor) / (b - anchor);
                Vec out(at_b.size());
                for (std::size_t k = 0; k < out.size(); ++k)
                    out[k] = (1.0 - w) * at_anchor[k] + w * at_b[k];
                return out;
            }
            case Route::TransferRight: {
                if (splice_left) {
                    double a = left_closed_at;
                    double len = domain.hi - a;
                    double rho = len * std::min(0.25, std::ldexp(1.0, -n));
                    if (x <= a + rho) {
                        if (spliced) *spliced = true;
                        Vec at_a = f(a, a);
                        if (x == a) return at_a;
                        Vec inner = transfer_value(n, a + rho);
                        double w = (x - a) / rho;
                        Vec out(at_a.size());
                        for (std::size_t k = 0; k < out.size(); ++k)
                            out[k] = (1.0 - w) * at_a[k] + w * inner[k];
                        return out;
                    }
                }
                return transfer_value(n, x);
            }
        }
        throw Error("unreachable extraction route");
    }

    Vec transfer_value(int n, double x) const {
        double s = transfer.phi(x);
        BivariateMap pulled = [this](double u, double v) {
            return f(transfer.phi_inverse(u), transfer.phi_inverse(v));
        };
        return build_g_n(pulled, n, s);
    }

    bool certificate_available(int n, double x) const {
        if (route == Route::Direct) return true;
        if (route == Route::DirectSplicedRight)
            return x <= domain.hi - std::ldexp(1.0, -n);
        double a_guard = splice_left
                             ? left_closed_at +
                                   (domain.hi - left_closed_at) *
                                       std::min(0.25, std::ldexp(1.0, -n))
                             : -Interval::inf();
        return x > a_guard;
    }

    Prop31Certificate certificate(int n, double x) const {
        if (route == Route::TransferRight) {
            BivariateMap pulled = [this](double u, double v) {
                return f(transfer.phi_inverse(u), transfer.phi_inverse(v));
            };
            return extraction_certificate(pulled, target, n, transfer.phi(x));
        }
        double b = domain.hi;
        BivariateMap g = [this, b](double u, double v) {
            return f(u, std::min(v, b));
        };
        return extraction_certificate(g, target, n, x);
    }
};

}  // namespace

ExtractionResult extract_series(const BivariateMap& f, const Interval& domain,
                                const NormedTarget& target, int levels,
                                std::span<const double> samples) {
    if (levels < 1) throw Error("extract_series: need at least one level");
    for (double x : samples)
        if (!domain.contains(x))
            throw Error("extract_series: sample outside the domain");

    Extractor ex = Extractor::plan(f, domain, target);

    ExtractionResult res;
    res.domain = domain;
    res.target = target;
    res.samples.assign(samples.begin(), samples.end());

    auto shared = std::make_shared<Extractor>(ex);
    for (int n = 1; n <= levels; ++n)
        res.levels.push_back(
            [shared, n](double x) { return shared->level_value(n, x, nullptr); });

    std::size_t m = res.samples.size();
    res.values.assign(static_cast<std::size_t>(levels), {});
    res.err.assign(static_cast<std::size_t>(levels),
                   std::vector<double>(m, 0.0));
    res.spliced.assign(static_cast<std::size_t>(levels),
                       std::vector<std::uint8_t>(m, 0));
    if (levels > 1)
        res.increment.assign(static_cast<std::size_t>(levels - 1),
                             std::vector<double>(m, 0.0));
    res.partial_sums.assign(m, 0.0);

    std::vector<Vec> diag(m);
    for (std::size_t k = 0; k < m; ++k)
        diag[k] = f(res.samples[k], res.samples[k]);

    for (int n = 1; n <= levels; ++n) {
        std::size_t row = static_cast<std::size_t>(n - 1);
        res.values[row].resize(m);
        LevelSummary sum;
        sum.n = n;
        bool first_beta = true;
        for (std::size_t k = 0; k < m; ++k) {
            bool spliced = false;
            res.values[row][k] = ex.level_value(n, res.samples[k], &spliced);
            res.spliced[row][k] = spliced ? 1 : 0;
            if (spliced) ++sum.spliced_count;
            res.err[row][k] = target.distance(res.values[row][k], diag[k]);
            sum.max_err = std::max(sum.max_err, res.err[row][k]);
            if (!spliced && ex.certificate_available(n, res.samples[k])) {
                Prop31Certificate c = ex.certificate(n, res.samples[k]);
                sum.max_cert_violation =
                    std::max(sum.max_cert_violation, c.lhs - c.rhs);
                if (first_beta) {
                    sum.beta_min = sum.beta_max = c.beta;
                    first_beta = false;
                } else {
                    sum.beta_min = std::min(sum.beta_min, c.beta);
                    sum.beta_max = std::max(sum.beta_max, c.beta);
                }
            }
        }
        if (n > 1) {
            std::size_t irow = static_cast<std::size_t>(n - 2);
            LevelSummary& prev = res.summary.back();
            for (std::size_t k = 0; k < m; ++k) {
                double inc = target.distance(res.values[row][k],
                                             res.values[row - 1][k]);
                res.increment[irow][k] = inc;
                res.partial_sums[k] += inc;
                prev.max_increment = std::max(prev.max_increment, inc);
            }
        }
        res.summary.push_back(sum);
    }
    return res;
}

double window_variation(const BivariateMap& f, const NormedTarget& target,
                        double x, int k, std::size_t grid_points) {
    double hi = x + std::ldexp(1.0, -k);
    double lo = x + std::ldexp(1.0, -k - 1);
    auto grid = grids::uniform(lo, hi, grid_points);
    double total = 0.0;
    Vec prev = f(x, grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        Vec cur = f(x, grid[i]);
        total += target.distance(cur, prev);
        prev = std::move(cur);
    }
    return total;
}

}  // namespace acdiag::extraction
