#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "acdiag/analysis.hpp"
#include "support/oracles.hpp"

using namespace acdiag;
using namespace acdiag::analysis;

namespace {

const NormedTarget kScalar = NormedTarget::l2(1);

ContinuousMap scalar(double (*f)(double)) {
    return [f](double x) { return Vec{f(x)}; };
}

}  // namespace

TEST_CASE("variation of monotone and oscillating maps") {
    auto id = scalar(+[](double x) { return x; });
    Interval unit = Interval::closed(0.0, 1.0);
    for (std::size_t pts : {2u, 17u, 1001u})
        CHECK(variation(id, kScalar, unit, pts).total == doctest::Approx(1.0));

    auto sine = scalar(+[](double x) { return std::sin(x); });
    Interval two_pi = Interval::closed(0.0, 2.0 * std::numbers::pi);
    VariationReport rep = variation(sine, kScalar, two_pi, 100'000);
    CHECK(rep.total == doctest::Approx(4.0).epsilon(1e-3));
    CHECK(rep.partition_size() == 100'000);
    REQUIRE(rep.modulus_table.size() == 4);
}

TEST_CASE("variation of x*sin(1/x) matches the critical-point oracle") {
    double lo = 1.0 / (100.0 * std::numbers::pi);
    auto f = oracles::xsin_map();
    Interval itv = Interval::closed(lo, 1.0);
    double grid_total = variation(f, kScalar, itv, 1'000'001).total;
    double oracle = oracles::xsin_variation_oracle(lo);
    CHECK(grid_total == doctest::Approx(oracle).epsilon(0.01));
    CHECK(grid_total <= oracle * (1.0 + 1e-12));  // grid sums never exceed
}

TEST_CASE("variation is monotone under partition refinement") {
    std::mt19937_64 rng(71);
    for (int rep = 0; rep < 100; ++rep) {
        PiecewiseLinear pl = oracles::random_pl(rng, 0.0, 1.0, -1.0, 1.0, 12);
        ContinuousMap f = [pl](double x) { return pl.eval(x); };
        Interval unit = Interval::closed(0.0, 1.0);
        double v33 = variation(f, kScalar, unit, 33).total;
        double v65 = variation(f, kScalar, unit, 65).total;
        double v129 = variation(f, kScalar, unit, 129).total;
        REQUIRE(v65 >= v33 - 1e-12);
        REQUIRE(v129 >= v65 - 1e-12);
    }
}

TEST_CASE("ac_modulus examples and monotonicity") {
    Interval unit = Interval::closed(0.0, 1.0);
    auto id = scalar(+[](double x) { return x; });
    CHECK(ac_modulus(id, kScalar, unit, 0.1, 10'000) ==
          doctest::Approx(0.1).epsilon(1e-6));

    // K-Lipschitz map stays under K*delta
    auto lip = scalar(+[](double x) { return 3.0 * std::sin(2.0 * x); });
    double got = ac_modulus(lip, kScalar, unit, 0.05, 20'000);
    CHECK(got <= 6.0 * 0.05 * (1.0 + 1e-9));

    // a ramp of height 1 and width 0.01 is swallowed whole by delta = 0.05
    auto ramp = scalar(+[](double x) {
        if (x <= 0.495) return 0.0;
        if (x >= 0.505) return 1.0;
        return (x - 0.495) / 0.01;
    });
    double captured = ac_modulus(ramp, kScalar, unit, 0.05, 10'000);
    CHECK(captured >= 1.0 - 1e-9);

    // nondecreasing in delta and bounded by the variation
    auto f = scalar(+[](double x) { return std::sin(9.0 * x); });
    double total = variation(f, kScalar, unit, 20'001).total;
    double prev = 0.0;
    for (double delta : {0.01, 0.05, 0.2, 1.0, 2.0}) {
        double v = ac_modulus(f, kScalar, unit, delta, 20'000);
        REQUIRE(v >= prev - 1e-12);
        REQUIRE(v <= total * (1.0 + 1e-12));
        prev = v;
    }
}

TEST_CASE("lipschitz_estimate examples") {
    Interval unit = Interval::closed(0.0, 1.0);
    auto three_x = scalar(+[](double x) { return 3.0 * x; });
    CHECK(lipschitz_estimate(three_x, kScalar, unit, 4097) ==
          doctest::Approx(3.0).epsilon(1e-9));

    auto abs_map = scalar(+[](double x) { return std::abs(x); });
    Interval sym = Interval::closed(-1.0, 1.0);
    CHECK(lipschitz_estimate(abs_map, kScalar, sym, 4097) ==
          doctest::Approx(1.0).epsilon(1e-12));

    auto square = scalar(+[](double x) { return x * x; });
    CHECK(lipschitz_estimate(square, kScalar, unit, 10'000) ==
          doctest::Approx(2.0).epsilon(1e-3));
}

namespace {

LipschitzMap pl_map(PiecewiseLinear pl) {
    Interval dom = Interval::closed(pl.knots.front(), pl.knots.back());
    return LipschitzMap::from_pl(dom, NormedTarget::l2(1), std::move(pl));
}

}  // namespace

TEST_CASE("blend constant: degenerate and closed-form cases") {
    // phi == 1: the blend is g itself
    PiecewiseLinear gpl;
    gpl.dim = 1;
    gpl.push_knot(0.0, {0.0});
    gpl.push_knot(1.0, {2.0});
    PiecewiseLinear one;
    one.dim = 1;
    one.push_knot(0.0, {1.0});
    one.push_knot(1.0, {1.0});
    PiecewiseLinear hpl;
    hpl.dim = 1;
    hpl.push_knot(0.0, {0.5});
    hpl.push_knot(1.0, {0.5});
    BlendCheck bc = check_blend_constant(pl_map(gpl), pl_map(hpl), pl_map(one));
    CHECK(bc.pass);
    CHECK(bc.measured <= 2.0 * (1.0 + 1e-9));

    // g = 0, h = M constant, phi a line of slope L: equality L*M
    double M = 0.7, L = 2.0;
    PiecewiseLinear zero;
    zero.dim = 1;
    zero.push_knot(0.0, {0.0});
    zero.push_knot(1.0, {0.0});
    PiecewiseLinear hM;
    hM.dim = 1;
    hM.push_knot(0.0, {M});
    hM.push_knot(1.0, {M});
    PiecewiseLinear phi;
    phi.dim = 1;
    phi.push_knot(0.0, {0.0});
    phi.push_knot(0.5, {1.0});
    phi.push_knot(1.0, {1.0});
    BlendCheck eq = check_blend_constant(pl_map(zero), pl_map(hM), pl_map(phi));
    CHECK(eq.pass);
    CHECK(eq.measured == doctest::Approx(L * M).epsilon(1e-9));

    // phi escaping [0,1] is rejected
    PiecewiseLinear big;
    big.dim = 1;
    big.push_knot(0.0, {1.5});
    big.push_knot(1.0, {1.5});
    CHECK_THROWS_AS(
        check_blend_constant(pl_map(zero), pl_map(hM), pl_map(big)), Error);
}

TEST_CASE("blend constant passes on 100 random piecewise-linear triples") {
    std::mt19937_64 rng(101);
    for (int rep = 0; rep < 100; ++rep) {
        auto g = pl_map(oracles::random_pl(rng, 0.0, 1.0, -2.0, 2.0, 8));
        auto h = pl_map(oracles::random_pl(rng, 0.0, 1.0, -2.0, 2.0, 5));
        auto phi = pl_map(oracles::random_pl(rng, 0.0, 1.0, 0.0, 1.0, 6));
        BlendCheck bc = check_blend_constant(g, h, phi, {}, 8193);
        CAPTURE(rep);
        REQUIRE(bc.pass);
    }
}

TEST_CASE("piecewise ac certificates") {
    SUBCASE("unit constants telescope to the interval length") {
        std::vector<double> a, c;
        for (int n = 1; n <= 40; ++n)
            a.push_back(1.0 - std::ldexp(1.0, -n + 1));
        a.push_back(1.0 - std::ldexp(1.0, -40));
        c.assign(40, 1.0);
        ACCertificate cert = piecewise_ac_certificate(a, c);
        CHECK(cert.tail == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(cert.delta_for_eps(0.1) == doctest::Approx(0.05));
    }
    SUBCASE("growing constants against a direct summation oracle") {
        // breakpoints 1 - 4^(1-n) collide with 1.0 in doubles past n ~ 27
        std::vector<double> a, c;
        int pieces = 20;
        for (int n = 1; n <= pieces + 1; ++n)
            a.push_back(1.0 - std::pow(4.0, -n + 1.0));
        for (int n = 1; n <= pieces; ++n) c.push_back(std::ldexp(1.0, n));
        double oracle = 0.0;
        for (int n = 1; n <= pieces; ++n)
            oracle += std::ldexp(1.0, n) * (a[static_cast<std::size_t>(n)] -
                                            a[static_cast<std::size_t>(n - 1)]);
        ACCertificate cert = piecewise_ac_certificate(a, c);
        CHECK(cert.tail == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(std::isfinite(cert.tail));
        // the full series sums to 3; the truncation is within 2^-pieces of it
        CHECK(std::abs(cert.tail - 3.0) <= 3.0 * std::ldexp(1.0, -pieces));
    }
    SUBCASE("input validation") {
        std::vector<double> bad{0.0, 0.5, 0.4};
        std::vector<double> c{1.0, 1.0};
        CHECK_THROWS_AS(piecewise_ac_certificate(bad, c), Error);
        std::vector<double> neg{0.0, 0.5, 1.0};
        std::vector<double> cneg{1.0, -1.0};
        CHECK_THROWS_AS(piecewise_ac_certificate(neg, cneg), Error);
    }
    SUBCASE("uniformly heavy constants push delta to eps/(2 max C)") {
        std::vector<double> a{0.0, 0.5, 1.0};
        std::vector<double> c{10.0, 10.0};
        ACCertificate cert = piecewise_ac_certificate(a, c);
        CHECK(cert.delta_for_eps(1e-3) == doctest::Approx(5e-5));
    }
}

TEST_CASE("section certificates make the modulus drop below eps") {
    ContinuousMap g = [](double x) { return Vec{std::sin(3.0 * x) + x}; };
    extension::SurfaceBuildOptions opts;
    opts.n_max = 8;
    auto s = extension::build_surface(g, Interval::closed(0.0, 1.0), kScalar,
                                      opts);
    for (double x0 : {0.25, 0.6, 0.9}) {
        SectionCertificate cert = section_ac_certificate(s, x0);
        CHECK(std::isfinite(cert.tail_term(1)));
        ContinuousMap fx0 =
            extension::section(s, extension::Axis::Second, x0, 1e-9);
        for (double eps : {0.5, 0.1, 0.02}) {
            double delta = cert.delta_for_eps(eps);
            double mod = ac_modulus(fx0, kScalar, Interval::closed(0.0, 1.0),
                                    delta, 20'000);
            CAPTURE(x0);
            CAPTURE(eps);
            REQUIRE(mod < eps);
        }
    }
}

TEST_CASE("pseudo-norm obstruction table is the exact power law") {
    std::vector<double> scales{1e-2, 1e-4};
    auto table = pseudo_norm_obstruction(0.5, scales);
    REQUIRE(table.size() == 2);
    CHECK(table[0].second == std::pow(1e-2, -0.5));
    CHECK(table[0].second == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(table[1].second == doctest::Approx(100.0).epsilon(1e-12));

    auto t9 = pseudo_norm_obstruction(0.9, std::vector<double>{1e-4});
    CHECK(t9[0].second == doctest::Approx(std::pow(10.0, 0.4)).epsilon(1e-12));

    CHECK_THROWS_AS(pseudo_norm_obstruction(1.2, scales), Error);
    CHECK_THROWS_AS(pseudo_norm_obstruction(0.5, std::vector<double>{-1.0}),
                    Error);
}

TEST_CASE("grid scans are reproducible across thread counts") {
    auto f = scalar(+[](double x) { return std::sin(40.0 * x) * x; });
    Interval unit = Interval::closed(0.0, 1.0);
    double v1 = variation(f, kScalar, unit, 50'001, 1).total;
    double v4 = variation(f, kScalar, unit, 50'001, 4).total;
    CHECK(v1 == v4);
    double l1 = lipschitz_estimate(f, kScalar, unit, 50'001, 1);
    double l4 = lipschitz_estimate(f, kScalar, unit, 50'001, 4);
    CHECK(l1 == l4);
    double m1 = ac_modulus(f, kScalar, unit, 0.03, 50'000, 1);
    double m4 = ac_modulus(f, kScalar, unit, 0.03, 50'000, 4);
    CHECK(m1 == m4);
}
