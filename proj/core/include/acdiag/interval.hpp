#pragma once

#include <cmath>
#include <limits>

#include "acdiag/errors.hpp"

namespace acdiag {

/// A non-degenerate interval of the real line. Ends may be +-infinity,
/// in which case they are open by construction.
struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    bool closed_lo = true;
    bool closed_hi = true;

    static constexpr double inf() { return std::numeric_limits<double>::infinity(); }

    static Interval closed(double a, double b) { return make(a, b, true, true); }
    static Interval open(double a, double b) { return make(a, b, false, false); }
    static Interval half_open_right(double a, double b) { return make(a, b, true, false); }
    static Interval half_open_left(double a, double b) { return make(a, b, false, true); }
    static Interval whole_line() { return make(-inf(), inf(), false, false); }

    static Interval make(double a, double b, bool ca, bool cb) {
        Interval r{a, b, ca, cb};
        r.validate();
        return r;
    }

    void validate() const {
        if (std::isnan(lo) || std::isnan(hi) || !(lo < hi))
            throw Error("degenerate interval: requires lo < hi");
        if (std::isinf(lo) && closed_lo) throw Error("interval: -inf end must be open");
        if (std::isinf(hi) && closed_hi) throw Error("interval: +inf end must be open");
    }

    bool contains(double x) const {
        if (x < lo || x > hi) return false;
        if (x == lo && !closed_lo) return false;
        if (x == hi && !closed_hi) return false;
        return true;
    }

    bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
    bool bounded_below() const { return std::isfinite(lo); }
    bool bounded_above() const { return std::isfinite(hi); }

    double length() const { return hi - lo; }

    double midpoint() const {
        if (!bounded()) throw Error("midpoint of unbounded interval");
        return lo + 0.5 * (hi - lo);
    }

    double clamp(double x) const {
        if (x < lo) return lo;
        if (x > hi) return hi;
        return x;
    }
};

}  // namespace acdiag
