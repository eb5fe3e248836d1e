#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <random>

#include "perfhom/weaklimit.hpp"

using namespace perfhom;

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// single-hole configuration: one tile, one centered hole
PerforatedDomain single_hole(int dim, double a_target, double guard_c) {
    const TilingSpec t = TilingSpec::make(dim, make_point(1, 1, 1));
    const Region cell = dim == 2 ? Region::box(make_point(0, 0), make_point(1, 1), 2)
                                 : Region::box(make_point(0, 0, 0), make_point(1, 1, 1), 3);
    const double mu = dim == 2 ? 1.0 / (-std::log(a_target)) : std::pow(a_target, dim - 2);
    HoleFamily fam{cell, 1, mu,
                   {dim == 2 ? make_point(0.5, 0.5) : make_point(0.5, 0.5, 0.5)},
                   "single"};
    auto dom = instantiate_holes({fam}, t, cell, 1.0, guard_c);
    REQUIRE(dom.holes.size() == 1);
    REQUIRE(dom.family_radius[0] == Catch::Approx(a_target).epsilon(1e-12));
    return dom;
}

PerforatedDomain cube_battery_domain(double eps, double density = 0.0) {
    const TilingSpec t = TilingSpec::make(2, make_point(1, 1));
    const Region unit = Region::box(make_point(0, 0), make_point(1, 1), 2);
    HoleFamily fam{unit, 1, density, {make_point(0.5, 0.5)}, "f1"};
    return instantiate_holes({fam}, t, unit, eps, 0.25);
}

BoxShape cube2(double lo0, double lo1, double hi0, double hi1) {
    BoxShape b;
    b.dim = 2;
    b.lo = make_point(lo0, lo1);
    b.hi = make_point(hi0, hi1);
    return b;
}

}  // namespace

TEST_CASE("indicator_pairing: aligned cube battery hits the limit exactly") {
    const BoxShape e = cube2(0.25, 0.25, 0.75, 0.75);
    const double limit = (M_PI / 16.0) * 0.25;  // N |B(0,C)| / |A| * |E cap F|
    CHECK(limit == Catch::Approx(M_PI / 64.0));
    for (double eps : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
        const auto dom = cube_battery_domain(eps);
        CHECK(indicator_pairing(dom, 0, e) == Catch::Approx(limit).epsilon(1e-12));
    }
}

TEST_CASE("indicator_pairing: offset cube converges and matches Monte-Carlo") {
    const BoxShape e = cube2(0.3, 0.3, 0.7, 0.7);
    const double limit = (M_PI / 16.0) * 0.16;
    double prev_gap = 1e300;
    for (double eps : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
        const auto dom = cube_battery_domain(eps);
        const double got = indicator_pairing(dom, 0, e);
        const double gap = std::abs(got - limit);
        CHECK(gap <= prev_gap);
        prev_gap = gap;
    }
    // final relative gap below 5%
    CHECK(prev_gap <= 0.05 * limit);

    // Monte-Carlo area-fraction oracle at eps = 1/8
    const auto dom = cube_battery_domain(1.0 / 8);
    const double got = indicator_pairing(dom, 0, e);
    std::mt19937_64 rng(20240818);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r_guard = dom.guard_radius();
    long hits = 0;
    const long n = 2'000'000;
    for (long i = 0; i < n; ++i) {
        Point x{0.3 + 0.4 * u(rng), 0.3 + 0.4 * u(rng), 0};
        for (const Point& c : dom.guard_centers[0])
            if (dist2(x, c, 2) < r_guard * r_guard) {
                ++hits;
                break;
            }
    }
    const double mc = 0.16 * static_cast<double>(hits) / n;
    CHECK(got == Catch::Approx(mc).epsilon(1e-2));
}

TEST_CASE("indicator_pairing: disjoint cube and hole-count linearity") {
    const auto dom = cube_battery_domain(1.0 / 8);
    CHECK(indicator_pairing(dom, 0, cube2(2.0, 2.0, 3.0, 3.0)) == 0.0);

    // doubling holes per tile doubles the value
    const TilingSpec t = TilingSpec::make(2, make_point(1, 1));
    const Region unit = Region::box(make_point(0, 0), make_point(1, 1), 2);
    HoleFamily two{unit, 2, 0.0, {make_point(0.3, 0.5), make_point(0.7, 0.5)}, "two"};
    const auto dom2 = instantiate_holes({two}, t, unit, 1.0 / 8, 0.15);
    HoleFamily one{unit, 1, 0.0, {make_point(0.3, 0.5)}, "one"};
    const auto dom1 = instantiate_holes({one}, t, unit, 1.0 / 8, 0.15);
    const BoxShape all = cube2(0, 0, 1, 1);
    CHECK(indicator_pairing(dom2, 0, all) ==
          Catch::Approx(2.0 * indicator_pairing(dom1, 0, all)).epsilon(1e-12));
}

TEST_CASE("w_deficit_l2: zero without holes, decreasing in eps") {
    CHECK(w_deficit_l2(cube_battery_domain(0.25, 0.0)) == 0.0);

    const TilingSpec t = TilingSpec::make(3, make_point(1, 1, 1));
    const Region cube = Region::box(make_point(0, 0, 0), make_point(1, 1, 1), 3);
    HoleFamily fam{cube, 1, 1.0, {make_point(0.5, 0.5, 0.5)}, "f"};
    double prev = 1e300;
    for (double eps : {0.2, 0.1, 0.05}) {
        const auto dom = instantiate_holes({fam}, t, cube, eps, 0.25);
        const double v = w_deficit_l2(dom);
        CHECK(v > 0.0);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("w_deficit_l2 matches ball Monte-Carlo on a single hole") {
    const auto dom = single_hole(3, 0.01, 0.1);
    const double got = w_deficit_l2(dom);

    // MC over the guard ball (w == 1 elsewhere, zero contribution)
    const double r_guard = dom.guard_radius();
    const Point c = dom.holes[0].center;
    std::mt19937_64 rng(5150);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const long n = 4'000'000;
    double acc = 0.0;
    long kept = 0;
    while (kept < n) {
        Point x{u(rng), u(rng), u(rng)};
        if (dist2(x, Point{0, 0, 0}, 3) > 1.0) continue;
        ++kept;
        Point y = c;
        for (int k = 0; k < 3; ++k) y[k] += r_guard * x[k];
        const double d = 1.0 - w_eval(y, dom);
        acc += d * d;
    }
    const double ball_vol = unit_ball_volume(3) * std::pow(r_guard, 3);
    const double mc = std::sqrt(ball_vol * acc / static_cast<double>(n));
    CHECK(got == Catch::Approx(mc).epsilon(1e-2));
}

TEST_CASE("pairing_direct: far bump gives zero, linearity holds") {
    const auto dom = single_hole(3, 0.01, 0.25);
    const TestFunction far = TestFunction::bump(make_point(8, 8, 8), 0.5, 3);
    CHECK(pairing_direct(dom, far) == 0.0);

    const TestFunction f1 = TestFunction::bump(make_point(0.45, 0.5, 0.5), 0.4, 3);
    const TestFunction f2 =
        TestFunction::poly_bump(make_point(0.55, 0.5, 0.5), 0.35, {1.0, 0.3, -0.2, 0.1}, 3);
    const double p1 = pairing_direct(dom, f1);
    const double p2 = pairing_direct(dom, f2);
    // linearity via the decomposed route on the sum is exercised in the
    // identity test; here check scaling through a poly factor of 2
    const TestFunction f2x2 =
        TestFunction::poly_bump(make_point(0.55, 0.5, 0.5), 0.35, {2.0, 0.6, -0.4, 0.2}, 3);
    CHECK(pairing_direct(dom, f2x2) == Catch::Approx(2.0 * p2).epsilon(1e-10));
    CHECK(p1 != 0.0);
}

TEST_CASE("pairing_direct equals the boundary-flux oracle (divergence theorem)") {
    for (int dim : {2, 3}) {
        const auto dom = single_hole(dim, dim == 2 ? 0.05 : 0.01, 0.25);
        const double r_guard = dom.guard_radius();
        const Point c = dom.holes[0].center;
        const double a = dom.holes[0].radius;

        // wide bump: nearly constant over the guard ball (plateau reading)
        const TestFunction wide = TestFunction::bump(c, 10.0, dim);
        const double got = pairing_direct(dom, wide, 1e-10);

        // oracle: w0'(R) * surface integral of φ over the guard sphere, by a
        // dense trapezoid/product grid independent of the implementation
        const double slope_r = w0_grad(r_guard, a, r_guard, dim);
        double surf = 0.0;
        if (dim == 2) {
            const int n = 4096;
            for (int i = 0; i < n; ++i) {
                const double th = 2.0 * M_PI * i / n;
                Point x = c;
                x[0] += r_guard * std::cos(th);
                x[1] += r_guard * std::sin(th);
                surf += wide.eval(x) * (2.0 * M_PI / n) * r_guard;
            }
        } else {
            const int nt = 512, np = 1024;
            for (int i = 0; i < nt; ++i) {
                const double ct = -1.0 + (i + 0.5) * 2.0 / nt;
                const double st = std::sqrt(1.0 - ct * ct);
                for (int j = 0; j < np; ++j) {
                    const double ph = 2.0 * M_PI * j / np;
                    Point x = c;
                    x[0] += r_guard * st * std::cos(ph);
                    x[1] += r_guard * st * std::sin(ph);
                    x[2] += r_guard * ct;
                    surf += wide.eval(x) * (2.0 / nt) * (2.0 * M_PI / np) * r_guard * r_guard;
                }
            }
        }
        CHECK(got == Catch::Approx(slope_r * surf).epsilon(1e-6));
        // plateau value: flux * φ(center), loose because φ varies slightly
        const double flux = annulus_energy(a, r_guard, dim);
        CHECK(got == Catch::Approx(flux * wide.eval(c)).epsilon(2e-3));
    }
}

TEST_CASE("pairing identity: direct vs decomposed on mixed configurations") {
    // battery of single- and multi-hole domains and bumps, d = 2 and 3
    std::vector<std::pair<PerforatedDomain, TestFunction>> cases;

    {
        const TilingSpec t = TilingSpec::make(3, make_point(1, 1, 1));
        const Region cube = Region::box(make_point(0, 0, 0), make_point(1, 1, 1), 3);
        HoleFamily fam{cube, 1, 1.0, {make_point(0.5, 0.5, 0.5)}, "f"};
        for (double eps : {0.2, 0.1}) {
            auto dom = instantiate_holes({fam}, t, cube, eps, 0.25);
            cases.emplace_back(dom, TestFunction::bump(make_point(0.5, 0.5, 0.5), 0.3, 3));
            cases.emplace_back(dom, TestFunction::poly_bump(make_point(0.45, 0.55, 0.5), 0.25,
                                                            {1.0, 0.5, -0.25, 0.0}, 3));
        }
    }
    {
        const TilingSpec t = TilingSpec::make(2, make_point(1, 1));
        const Region unit = Region::box(make_point(0, 0), make_point(1, 1), 2);
        HoleFamily fam{unit, 1, 2.0, {make_point(0.5, 0.5)}, "f"};
        for (double eps : {0.5, 0.4}) {
            auto dom = instantiate_holes({fam}, t, unit, eps, 0.35);
            cases.emplace_back(dom, TestFunction::bump(make_point(0.5, 0.5), 0.35, 2));
            cases.emplace_back(dom,
                               TestFunction::poly_bump(make_point(0.4, 0.6), 0.3, {1.0, -0.3, 0.2}, 2));
        }
    }
    for (const auto& [dom, phi] : cases) {
        const double direct = pairing_direct(dom, phi, 1e-8);
        const double decomposed = pairing_decomposed(dom, phi, 1e-8);
        CHECK(std::abs(direct - decomposed) <= 1e-6 * std::max(1.0, std::abs(direct)));
    }
}

TEST_CASE("pairing identity: radial 1d reduction oracle on a single hole") {
    const auto dom = single_hole(3, 0.01, 0.25);
    const Point c = dom.holes[0].center;
    const double a = dom.holes[0].radius, r_guard = dom.guard_radius();
    const double rho = 0.2;
    const TestFunction phi = TestFunction::bump(c, rho, 3);

    auto bump1 = [&](double r) {
        const double s = r * r / (rho * rho);
        return s >= 1.0 ? 0.0 : std::exp(-1.0 / (1.0 - s));
    };
    auto bump1g = [&](double r) {
        const double s = r * r / (rho * rho);
        if (s >= 1.0) return 0.0;
        const double t = 1.0 - s;
        return std::exp(-1.0 / t) * (-2.0 * r / (rho * rho * t * t));
    };
    const double s3 = sphere_area(3);
    const double direct_oracle =
        s3 * simpson(
                 [&](double r) {
                     const double w = w0_eval(r, a, r_guard, 3);
                     const double wg = w0_grad(r, a, r_guard, 3);
                     return wg * (w * bump1g(r) + bump1(r) * wg) * r * r;
                 },
                 a, r_guard, 1e-14);
    const double slope = boundary_slope_ratio(a, r_guard, 3);
    const double decomposed_oracle =
        slope * s3 *
        simpson([&](double r) { return (r * bump1g(r) + 3.0 * bump1(r)) * r * r; }, 0.0, r_guard,
                1e-14);

    const double direct = pairing_direct(dom, phi, 1e-9);
    const double decomposed = pairing_decomposed(dom, phi, 1e-9);
    CHECK(direct == Catch::Approx(direct_oracle).epsilon(1e-8));
    CHECK(decomposed == Catch::Approx(decomposed_oracle).epsilon(1e-8));
    CHECK(direct == Catch::Approx(decomposed).epsilon(1e-8));
}

TEST_CASE("pairing_limit: zero potential, bump integral oracle, additivity") {
    const TestFunction phi = TestFunction::bump(make_point(0.5, 0.5), 0.3, 2);
    PotentialV zero;
    zero.dim = 2;
    CHECK(pairing_limit(zero, phi, 1e-9) == 0.0);

    // V = c on F containing supp φ: c * S_2 * int_0^rho bump r dr
    const double c = 3.7;
    PotentialV v;
    v.dim = 2;
    v.terms.push_back({Region::box(make_point(0, 0), make_point(1, 1), 2), c});
    const double rho = 0.3;
    auto bump1 = [&](double r) {
        const double s = r * r / (rho * rho);
        return s >= 1.0 ? 0.0 : std::exp(-1.0 / (1.0 - s));
    };
    const double oracle = c * sphere_area(2) * simpson([&](double r) { return bump1(r) * r; }, 0.0,
                                                       rho, 1e-14);
    const double got = pairing_limit(v, phi, 1e-9);
    CHECK(got == Catch::Approx(oracle).epsilon(1e-7));

    // additivity over families
    PotentialV v2 = v;
    v2.terms.push_back({Region::ball(make_point(0.5, 0.5), 0.45, 2), 1.25});
    const double both = pairing_limit(v2, phi, 1e-9);
    PotentialV only_ball;
    only_ball.dim = 2;
    only_ball.terms.push_back(v2.terms[1]);
    CHECK(both == Catch::Approx(got + pairing_limit(only_ball, phi, 1e-9)).epsilon(1e-9));
}

TEST_CASE("pairing limit convergence preview (d=3, two scales)") {
    const TilingSpec t = TilingSpec::make(3, make_point(1, 1, 1));
    const Region cube = Region::box(make_point(0, 0, 0), make_point(1, 1, 1), 3);
    HoleFamily fam{cube, 1, 1.0, {make_point(0.5, 0.5, 0.5)}, "f"};
    const TestFunction phi = TestFunction::bump(make_point(0.5, 0.5, 0.5), 0.3, 3);
    const PotentialV v = build_potential({fam}, t, 3);
    const double limit = pairing_limit(v, phi, 1e-10);
    REQUIRE(limit > 0.0);
    double prev = 1e300;
    for (double eps : {0.2, 0.1}) {
        const auto dom = instantiate_holes({fam}, t, cube, eps, 0.25);
        const double gap = std::abs(pairing_direct(dom, phi, 1e-8) - limit);
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev / limit < 0.25);  // two scales in: already under 25%
}

TEST_CASE("cube test functions are rejected by the smooth pairings") {
    const auto dom = single_hole(2, 0.05, 0.25);
    const TestFunction cube = TestFunction::cube_indicator(cube2(0, 0, 1, 1));
    CHECK_THROWS_AS(pairing_direct(dom, cube), Error);
    CHECK_THROWS_AS(pairing_decomposed(dom, cube), Error);
}
