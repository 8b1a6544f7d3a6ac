#include <benchmark/benchmark.h>

#include <cmath>

#include "acdiag/analysis.hpp"
#include "acdiag/expr.hpp"
#include "acdiag/extension.hpp"
#include "acdiag/extraction.hpp"
#include "acdiag/smoothing.hpp"

using namespace acdiag;

namespace {

const NormedTarget kScalar = NormedTarget::l2(1);
const Interval kUnit = Interval::closed(0.0, 1.0);

ContinuousMap xsin() {
    return [](double x) {
        return Vec{x == 0.0 ? 0.0 : x * std::sin(1.0 / x)};
    };
}

const extension::ExtensionSurface& shared_surface() {
    static extension::ExtensionSurface s = [] {
        extension::SurfaceBuildOptions opts;
        opts.n_max = 12;
        return extension::build_surface(xsin(), kUnit, kScalar, opts);
    }();
    return s;
}

}  // namespace

static void BM_ExprEval(benchmark::State& state) {
    auto e = expr::Expression::parse("x*sin(1/x)+x^2", 1);
    double x = 0.3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(e(x));
        x += 1e-9;
    }
}
BENCHMARK(BM_ExprEval);

static void BM_MollifyCover(benchmark::State& state) {
    double eps = 1.0 / static_cast<double>(state.range(0));
    auto f = xsin();
    for (auto _ : state)
        benchmark::DoNotOptimize(
            smoothing::lipschitz_approx(f, kUnit, kScalar, eps).constant);
}
BENCHMARK(BM_MollifyCover)->Arg(16)->Arg(64)->Arg(256);

static void BM_PlApprox(benchmark::State& state) {
    double eps = std::ldexp(1.0, -static_cast<int>(state.range(0)));
    auto f = xsin();
    smoothing::MollifyOptions opts;
    opts.max_cells = 8'000'000;  // tight tolerances need the large budget
    for (auto _ : state)
        benchmark::DoNotOptimize(
            smoothing::pl_approx(f, kUnit, kScalar, eps, opts).constant);
}
BENCHMARK(BM_PlApprox)->Arg(10)->Arg(14)->Arg(18);

static void BM_SurfaceEval(benchmark::State& state) {
    const auto& s = shared_surface();
    double x = 0.31, y = 0.31 + 1e-4;
    for (auto _ : state) {
        benchmark::DoNotOptimize(extension::eval_surface(s, x, y, 1e-9).value);
        y += 1e-10;
    }
}
BENCHMARK(BM_SurfaceEval);

static void BM_ExtractLevel(benchmark::State& state) {
    BivariateMap f = [](double x, double y) { return Vec{x * y}; };
    int n = static_cast<int>(state.range(0));
    double x = 0.4;
    for (auto _ : state) {
        benchmark::DoNotOptimize(extraction::build_g_n(f, n, x));
        x += 1e-9;
    }
}
BENCHMARK(BM_ExtractLevel)->Arg(4)->Arg(12)->Arg(20);

static void BM_Variation(benchmark::State& state) {
    auto f = xsin();
    std::size_t points = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(
            analysis::variation(f, kScalar, kUnit, points).total);
}
BENCHMARK(BM_Variation)->Arg(10'000)->Arg(100'000);

BENCHMARK_MAIN();
