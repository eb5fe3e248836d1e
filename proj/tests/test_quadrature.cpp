#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <random>

#include "perfhom/quadrature.hpp"

using namespace perfhom;

namespace {

// test-side Monte-Carlo volume oracle, independent of the quadrature paths
double mc_ball_box_volume(const Point& c, double r, const BoxShape& box, int dim, long n,
                          unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    long hits = 0;
    for (long i = 0; i < n; ++i) {
        Point x{0, 0, 0};
        for (int k = 0; k < dim; ++k) x[k] = box.lo[k] + u(rng) * (box.hi[k] - box.lo[k]);
        if (dist2(x, c, dim) < r * r) ++hits;
    }
    return box.volume() * static_cast<double>(hits) / static_cast<double>(n);
}

// test-side adaptive Simpson, independent of the Gauss-based implementation
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
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

TEST_CASE("gauss rules integrate polynomials exactly") {
    for (int n : {2, 5, 8, 16, 32}) {
        // GL(n) is exact through degree 2n-1
        const int deg = 2 * n - 1;
        auto f = [&](double x) { return std::pow(x, deg) + 3.0 * x * x; };
        const double got = integrate_gl(f, -1.0, 1.0, n);
        CHECK(got == Catch::Approx(2.0).margin(1e-12));  // odd power cancels
        const auto& rule = gauss_legendre(n);
        double wsum = 0.0;
        for (double w : rule.weights) wsum += w;
        CHECK(wsum == Catch::Approx(2.0).epsilon(1e-14));
    }
}

TEST_CASE("adaptive quadrature handles sqrt endpoints") {
    // int_0^1 sqrt(x) dx = 2/3 against the independent Simpson oracle
    auto f = [](double x) { return std::sqrt(x); };
    const double got = integrate_adaptive(f, 0.0, 1.0, 1e-10);
    CHECK(got == Catch::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(got == Catch::Approx(simpson(f, 0.0, 1.0, 1e-12)).epsilon(1e-9));
}

TEST_CASE("sphere rules have exact total weight and correct moments") {
    for (int dim : {2, 3}) {
        const SphereRule r = sphere_rule(dim, 12);
        double wsum = 0.0;
        Point m{0, 0, 0};
        for (std::size_t i = 0; i < r.dirs.size(); ++i) {
            wsum += r.weights[i];
            for (int k = 0; k < dim; ++k) m[k] += r.weights[i] * r.dirs[i][k];
        }
        CHECK(wsum == Catch::Approx(sphere_area(dim)).epsilon(1e-12));
        for (int k = 0; k < dim; ++k) CHECK(m[k] == Catch::Approx(0.0).margin(1e-12));
        double m2 = 0.0;  // int u_0^2 dS = S_d / d
        for (std::size_t i = 0; i < r.dirs.size(); ++i)
            m2 += r.weights[i] * r.dirs[i][0] * r.dirs[i][0];
        CHECK(m2 == Catch::Approx(sphere_area(dim) / dim).epsilon(1e-10));
    }
}

TEST_CASE("circle_box_area exact cases") {
    BoxShape square;
    square.dim = 2;
    square.lo = make_point(-2, -2);
    square.hi = make_point(2, 2);
    CHECK(circle_box_area(make_point(0.3, -0.2), 1.0, square) == Catch::Approx(M_PI).epsilon(1e-13));

    BoxShape small;
    small.dim = 2;
    small.lo = make_point(-0.1, -0.2);
    small.hi = make_point(0.3, 0.1);
    CHECK(circle_box_area(make_point(0, 0), 5.0, small) ==
          Catch::Approx(small.volume()).epsilon(1e-13));

    BoxShape half;
    half.dim = 2;
    half.lo = make_point(0.0, -10.0);
    half.hi = make_point(10.0, 10.0);
    CHECK(circle_box_area(make_point(0, 0), 1.0, half) == Catch::Approx(M_PI / 2).epsilon(1e-12));

    BoxShape quarter;
    quarter.dim = 2;
    quarter.lo = make_point(0.0, 0.0);
    quarter.hi = make_point(10.0, 10.0);
    CHECK(circle_box_area(make_point(0, 0), 1.0, quarter) == Catch::Approx(M_PI / 4).epsilon(1e-12));

    BoxShape far;
    far.dim = 2;
    far.lo = make_point(5, 5);
    far.hi = make_point(6, 6);
    CHECK(circle_box_area(make_point(0, 0), 1.0, far) == 0.0);
}

TEST_CASE("ball_box_volume agrees with seeded Monte-Carlo") {
    BoxShape box2;
    box2.dim = 2;
    box2.lo = make_point(0.1, -0.3);
    box2.hi = make_point(1.4, 0.9);
    const Point c2 = make_point(0.55, 0.2);
    const double v2 = ball_box_volume(c2, 0.7, box2, 2);
    const double mc2 = mc_ball_box_volume(c2, 0.7, box2, 2, 4'000'000, 12345);
    CHECK(v2 == Catch::Approx(mc2).epsilon(5e-3));

    BoxShape box3;
    box3.dim = 3;
    box3.lo = make_point(-0.2, -0.1, 0.0);
    box3.hi = make_point(0.8, 0.9, 1.1);
    const Point c3 = make_point(0.3, 0.35, 0.4);
    const double v3 = ball_box_volume(c3, 0.5, box3, 3);
    const double mc3 = mc_ball_box_volume(c3, 0.5, box3, 3, 4'000'000, 777);
    CHECK(v3 == Catch::Approx(mc3).epsilon(5e-3));

    BoxShape big;
    big.dim = 3;
    big.lo = make_point(-2, -2, -2);
    big.hi = make_point(2, 2, 2);
    CHECK(ball_box_volume(make_point(0.1, 0, -0.2), 1.0, big, 3) ==
          Catch::Approx(4.0 * M_PI / 3.0).epsilon(1e-9));
}

TEST_CASE("ball_box_volume additivity across a splitting plane") {
    BoxShape whole, left, right;
    whole.dim = 2;
    whole.lo = make_point(-1, -1);
    whole.hi = make_point(1, 1);
    left = whole;
    left.hi[0] = 0.13;
    right = whole;
    right.lo[0] = 0.13;
    const Point c = make_point(0.2, -0.35);
    const double r = 0.8;
    CHECK(circle_box_area(c, r, left) + circle_box_area(c, r, right) ==
          Catch::Approx(circle_box_area(c, r, whole)).epsilon(1e-12));
}

TEST_CASE("integrate_over_region: smooth integrand over a disk") {
    const Region disk = Region::ball(make_point(0, 0), 1.0, 2);
    BoxShape supp;
    supp.dim = 2;
    supp.lo = make_point(-1, -1);
    supp.hi = make_point(1, 1);
    auto f = [](const Point& x) { return x[0] * x[0] + x[1] * x[1]; };
    // int over the unit disk of r^2 = pi/2
    const double got = integrate_over_region(f, disk, supp, 1e-6, 1.0);
    CHECK(got == Catch::Approx(M_PI / 2.0).margin(2e-6));
}

TEST_CASE("integrate_over_region: region covering the support is a plain integral") {
    const Region big = Region::box(make_point(-5, -5), make_point(5, 5), 2);
    BoxShape supp;
    supp.dim = 2;
    supp.lo = make_point(0, 0);
    supp.hi = make_point(1, 2);
    auto f = [](const Point& x) { return std::sin(x[0]) * x[1]; };
    const double exact = (1.0 - std::cos(1.0)) * 2.0;
    CHECK(integrate_over_region(f, big, supp, 1e-9, 1.0) == Catch::Approx(exact).epsilon(1e-9));
}
