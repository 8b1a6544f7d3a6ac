#include <doctest.h>

#include <cmath>

#include "acdiag/smoothing.hpp"
#include "support/oracles.hpp"

using namespace acdiag;
using namespace acdiag::smoothing;

namespace {

const Interval kUnit = Interval::closed(0.0, 1.0);
const NormedTarget kScalar = NormedTarget::l2(1);

ContinuousMap scalar(double (*f)(double)) {
    return [f](double x) { return Vec{f(x)}; };
}

}  // namespace

TEST_CASE("constant maps mollify to themselves with constant zero") {
    auto f = [](double) { return Vec{3.25}; };
    LipschitzMap g = lipschitz_approx(f, kUnit, kScalar, 0.5);
    CHECK(g.constant == 0.0);
    CHECK(g.constant_kind == ConstantKind::Certified);
    for (double x : {0.0, 0.1, 0.77, 1.0}) CHECK(g.eval(x)[0] == 3.25);
}

TEST_CASE("sqrt mollifies within eps = 0.1 on a dense grid") {
    auto f = scalar(+[](double x) { return std::sqrt(x); });
    LipschitzMap g = lipschitz_approx(f, kUnit, kScalar, 0.1);
    double sup = oracles::grid_sup_distance(f, g.eval, kScalar, 0.0, 1.0, 10'001);
    CHECK(sup <= 0.1);
    CHECK(g.constant > 0.0);
    CHECK(std::isfinite(g.constant));
}

TEST_CASE("x*sin(1/x) mollifies within eps = 0.05") {
    auto f = oracles::xsin_map();
    LipschitzMap g = lipschitz_approx(f, kUnit, kScalar, 0.05);
    double sup = oracles::grid_sup_distance(f, g.eval, kScalar, 0.0, 1.0, 10'001);
    CHECK(sup <= 0.05);
    CHECK(std::isfinite(g.constant));
    CHECK(g.constant_kind == ConstantKind::Certified);
}

TEST_CASE("cover structure: partition of unity, overlap, oscillation") {
    auto f = scalar(+[](double x) { return std::sin(5.0 * x) + x; });
    double eps = 0.03;
    MollifierCover cover = build_mollifier_cover(f, kUnit, kScalar, eps);
    REQUIRE(cover.cell_count() >= 2);

    for (int i = 0; i <= 2000; ++i) {
        double x = i / 2000.0;
        auto active = cover.cells_at(x);
        REQUIRE(!active.empty());
        REQUIRE(active.size() <= 2);
        double sum = 0.0;
        for (auto [j, w] : cover.weights(x)) sum += w;
        REQUIRE(std::abs(sum - 1.0) <= 1e-12);
    }

    // covered oscillation below eps on every cell
    for (const auto& cell : cover.cells) {
        double lo = std::max(cell.lo, 0.0);
        double hi = std::min(cell.hi, 1.0);
        double mn = 1e300, mx = -1e300;
        for (int i = 0; i <= 200; ++i) {
            double v = f(lo + (hi - lo) * i / 200.0)[0];
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        REQUIRE(mx - mn < eps);
    }

    // the blend formula and its piecewise-linear form agree
    PiecewiseLinear pl = cover.to_piecewise_linear();
    for (int i = 0; i <= 2000; ++i) {
        double x = i / 2000.0;
        REQUIRE(std::abs(cover.eval(x)[0] - pl.eval(x)[0]) <= 1e-12);
    }
}

TEST_CASE("certified constant dominates the grid estimate") {
    auto f = scalar(+[](double x) { return std::cos(7.0 * x); });
    LipschitzMap g = lipschitz_approx(f, kUnit, kScalar, 0.02);
    double grid_est = 0.0;
    for (int i = 0; i < 4096; ++i) {
        double a = i / 4096.0, b = (i + 1) / 4096.0;
        grid_est = std::max(grid_est,
                            std::abs(g.eval(b)[0] - g.eval(a)[0]) / (b - a));
    }
    CHECK(grid_est <= g.constant * (1.0 + 1e-9));
}

TEST_CASE("pl_approx meets tight tolerances with exact constants") {
    auto f = scalar(+[](double x) { return std::sin(5.0 * x); });
    double eps = 1e-4;
    LipschitzMap g = pl_approx(f, kUnit, kScalar, eps);
    double sup = oracles::grid_sup_distance(f, g.eval, kScalar, 0.0, 1.0, 20'001);
    CHECK(sup <= eps);
    CHECK(g.constant <= 5.0 * (1.0 + 1e-3));
    CHECK(g.constant_kind == ConstantKind::Certified);

    // exact on affine input: collapses to a single segment
    auto line = scalar(+[](double x) { return 2.0 * x - 1.0; });
    LipschitzMap l = pl_approx(line, kUnit, kScalar, 1e-9);
    REQUIRE(l.pl);
    CHECK(l.pl->size() == 2);
    CHECK(l.constant == doctest::Approx(2.0));
}

TEST_CASE("refinement reports failure on a jump instead of accepting it") {
    auto jump = scalar(+[](double x) { return x < 0.5 ? 0.0 : 1.0; });
    MollifyOptions opts;
    opts.max_cells = 4096;
    CHECK_THROWS_AS(lipschitz_approx(jump, kUnit, kScalar, 0.125, opts),
                    NumericError);
    CHECK_THROWS_AS(pl_approx(jump, kUnit, kScalar, 0.125, opts), NumericError);
}

TEST_CASE("domain and argument validation") {
    auto f = scalar(+[](double x) { return x; });
    CHECK_THROWS_AS(lipschitz_approx(f, Interval::open(0.0, 1.0), kScalar, 0.1),
                    Error);
    CHECK_THROWS_AS(lipschitz_approx(f, kUnit, kScalar, 0.0), Error);
    CHECK_THROWS_AS(lipschitz_approx(f, kUnit, NormedTarget::pseudo(0.5), 0.1),
                    Error);
}

TEST_CASE("mollified series: stage accuracy and increment bounds") {
    auto f = scalar(+[](double x) { return std::sin(3.0 * x) + x; });
    const int n_max = 8;
    EpsSchedule schedule;  // eps_n = 2^-n
    MollifiedSeries ms = mollify_series(f, kUnit, kScalar, n_max, schedule);
    REQUIRE(ms.series.n_max() == n_max);

    for (int n = 1; n <= n_max; ++n) {
        double sup = oracles::grid_sup_distance(
            f, ms.series.stages[static_cast<std::size_t>(n - 1)], kScalar, 0.0,
            1.0, 4097);
        REQUIRE(sup <= schedule.eps(n));
    }
    for (int n = 1; n < n_max; ++n) {
        double sup = oracles::grid_sup_distance(
            ms.series.stages[static_cast<std::size_t>(n - 1)],
            ms.series.stages[static_cast<std::size_t>(n)], kScalar, 0.0, 1.0,
            4097);
        REQUIRE(sup <= schedule.eps(n) + schedule.eps(n + 1) + 1e-12);
    }
    CHECK(ms.series.tail_bound(n_max) == doctest::Approx(3.0 * schedule.eps(n_max)));
}

TEST_CASE("eps schedule closed forms") {
    EpsSchedule s{1.0, 0.5};
    CHECK(s.eps(3) == doctest::Approx(0.125));
    CHECK(s.tail(3) == doctest::Approx(3.0 * 0.125));
    CHECK_THROWS_AS((EpsSchedule{1.0, 1.0}.validate()), Error);
    CHECK_THROWS_AS((EpsSchedule{0.0, 0.5}.validate()), Error);
}
