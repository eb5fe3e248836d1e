// Quadrature kernels: Gauss-Legendre rules of arbitrary order (cached),
// sphere product rules, adaptive interval quadrature, exact circle/axis-box
// intersection area, ball/box volumes, and an adaptive cell integrator over
// regions of the algebra.
#pragma once

#include <functional>
#include <mutex>
#include <queue>
#include <unordered_map>

#include "perfhom/region.hpp"

namespace perfhom {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;  // sum to 2
};

/// Gauss-Legendre nodes/weights by Newton iteration on P_n; cached per order.
inline const GaussRule& gauss_legendre(int n) {
    static std::unordered_map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev-based initial guess
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

template <typename F>
double integrate_gl(F&& f, double a, double b, int order) {
    const GaussRule& g = gauss_legendre(order);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < order; ++i) s += g.weights[i] * f(mid + half * g.nodes[i]);
    return s * half;
}

/// Adaptive bisection with a GL(10)/GL(20) error estimate per panel.
template <typename F>
double integrate_adaptive(F&& f, double a, double b, double tol, int max_depth = 48) {
    struct Panel {
        double a, b, coarse;
        int depth;
    };
    std::vector<Panel> stack{{a, b, integrate_gl(f, a, b, 10), 0}};
    double total = 0.0;
    while (!stack.empty()) {
        const Panel p = stack.back();
        stack.pop_back();
        const double fine = integrate_gl(f, p.a, p.b, 20);
        if (std::abs(fine - p.coarse) <= tol * std::max(1.0, std::abs(fine)) * 0.5) {
            total += fine;
            continue;
        }
        if (p.depth >= max_depth)
            throw QuadratureError("integrate_adaptive: max refinement depth reached");
        const double m = 0.5 * (p.a + p.b);
        stack.push_back({p.a, m, integrate_gl(f, p.a, m, 10), p.depth + 1});
        stack.push_back({m, p.b, integrate_gl(f, m, p.b, 10), p.depth + 1});
    }
    return total;
}

/// Unit-sphere product rule: directions and weights with sum(weights) = S_d.
/// d=2 uses the uniform (trapezoidal) angle rule, spectrally accurate for
/// periodic integrands; d=3 uses Gauss-Legendre in cos(theta) x uniform phi.
struct SphereRule {
    std::vector<Point> dirs;
    std::vector<double> weights;
};

inline SphereRule sphere_rule(int dim, int resolution) {
    require_dim(dim);
    SphereRule r;
    if (dim == 2) {
        const int n = std::max(4, 2 * resolution);
        const double w = 2.0 * M_PI / n;
        for (int i = 0; i < n; ++i) {
            const double th = w * i;
            r.dirs.push_back(make_point(std::cos(th), std::sin(th)));
            r.weights.push_back(w);
        }
    } else {
        const int nt = std::max(2, resolution);
        const int np = 2 * nt;
        const GaussRule& g = gauss_legendre(nt);
        const double wp = 2.0 * M_PI / np;
        for (int i = 0; i < nt; ++i) {
            const double ct = g.nodes[i];
            const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
            for (int j = 0; j < np; ++j) {
                const double ph = wp * j;
                r.dirs.push_back(make_point(st * std::cos(ph), st * std::sin(ph), ct));
                r.weights.push_back(g.weights[i] * wp);
            }
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Exact area of circle  {|x - c| < r}  intersected with an axis box (d = 2).
// Classic signed edge walk: each directed polygon edge contributes a chord
// triangle for the part inside the circle and a circular sector for the part
// outside; summing over a counter-clockwise boundary yields the area.
// ---------------------------------------------------------------------------
namespace detail {

inline double cross2(const Point& a, const Point& b) { return a[0] * b[1] - a[1] * b[0]; }
inline double dot2(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1]; }

inline double circle_edge_area(Point p, Point q, double r) {
    // p, q relative to the circle center
    auto sector = [&](const Point& u, const Point& v) {
        return 0.5 * r * r * std::atan2(cross2(u, v), dot2(u, v));
    };
    auto triangle = [&](const Point& u, const Point& v) { return 0.5 * cross2(u, v); };

    const Point dvec{q[0] - p[0], q[1] - p[1], 0};
    const double A = dot2(dvec, dvec);
    if (A == 0.0) return 0.0;
    const double B = 2.0 * dot2(p, dvec);
    const double C = dot2(p, p) - r * r;
    const double disc = B * B - 4.0 * A * C;

    double t1 = 2.0, t2 = 2.0;  // no crossing by default
    if (disc > 0.0) {
        const double sq = std::sqrt(disc);
        t1 = (-B - sq) / (2.0 * A);
        t2 = (-B + sq) / (2.0 * A);
    }
    auto at = [&](double t) { return Point{p[0] + t * dvec[0], p[1] + t * dvec[1], 0}; };

    std::array<double, 4> cuts{0.0, std::clamp(t1, 0.0, 1.0), std::clamp(t2, 0.0, 1.0), 1.0};
    std::sort(cuts.begin(), cuts.end());
    double area = 0.0;
    for (int s = 0; s < 3; ++s) {
        if (cuts[s + 1] <= cuts[s]) continue;
        const Point u = at(cuts[s]), v = at(cuts[s + 1]);
        const Point m = at(0.5 * (cuts[s] + cuts[s + 1]));
        if (dot2(m, m) < r * r)
            area += triangle(u, v);
        else
            area += sector(u, v);
    }
    return area;
}

}  // namespace detail

/// |B(c, r) ∩ box| in d = 2, exact up to round-off.
inline double circle_box_area(const Point& c, double r, const BoxShape& box) {
    const Point p0{box.lo[0] - c[0], box.lo[1] - c[1], 0};
    const Point p1{box.hi[0] - c[0], box.lo[1] - c[1], 0};
    const Point p2{box.hi[0] - c[0], box.hi[1] - c[1], 0};
    const Point p3{box.lo[0] - c[0], box.hi[1] - c[1], 0};
    const double a = detail::circle_edge_area(p0, p1, r) + detail::circle_edge_area(p1, p2, r) +
                     detail::circle_edge_area(p2, p3, r) + detail::circle_edge_area(p3, p0, r);
    return std::max(0.0, a);
}

/// |B(c, r) ∩ box| for d in {1, 2, 3}. d=3 integrates exact 2-d slices
/// adaptively over the last axis.
inline double ball_box_volume(const Point& c, double r, const BoxShape& box, int dim,
                              double rtol = 1e-10) {
    if (dim == 1) {
        const double lo = std::max(box.lo[0], c[0] - r);
        const double hi = std::min(box.hi[0], c[0] + r);
        return std::max(0.0, hi - lo);
    }
    if (dim == 2) return circle_box_area(c, r, box);

    const double zlo = std::max(box.lo[2], c[2] - r);
    const double zhi = std::min(box.hi[2], c[2] + r);
    if (zhi <= zlo) return 0.0;
    BoxShape slab = box;
    slab.dim = 2;
    auto slice = [&](double z) {
        const double rr = r * r - (z - c[2]) * (z - c[2]);
        if (rr <= 0.0) return 0.0;
        return circle_box_area(c, std::sqrt(rr), slab);
    };
    // integrate_adaptive treats tol as absolute for integrals below 1
    const double scale = unit_ball_volume(3) * r * r * r;
    return integrate_adaptive(slice, zlo, zhi, rtol * scale);
}

// ---------------------------------------------------------------------------
// Adaptive integral of a smooth function over a region: breadth-first cell
// subdivision; covered cells use a GL(6)/GL(10) tensor check, straddling
// cells are split until their worst-case contribution fits the budget.
// ---------------------------------------------------------------------------
namespace detail {

template <typename F>
double gl_cell(F&& f, const BoxShape& cell, int order) {
    const GaussRule& g = gauss_legendre(order);
    double total = 0.0;
    if (cell.dim == 2) {
        for (int i = 0; i < order; ++i)
            for (int j = 0; j < order; ++j) {
                Point x{0.5 * (cell.lo[0] + cell.hi[0]) + 0.5 * (cell.hi[0] - cell.lo[0]) * g.nodes[i],
                        0.5 * (cell.lo[1] + cell.hi[1]) + 0.5 * (cell.hi[1] - cell.lo[1]) * g.nodes[j],
                        0};
                total += g.weights[i] * g.weights[j] * f(x);
            }
        return total * cell.volume() / 4.0;
    }
    for (int i = 0; i < order; ++i)
        for (int j = 0; j < order; ++j)
            for (int k = 0; k < order; ++k) {
                Point x{0.5 * (cell.lo[0] + cell.hi[0]) + 0.5 * (cell.hi[0] - cell.lo[0]) * g.nodes[i],
                        0.5 * (cell.lo[1] + cell.hi[1]) + 0.5 * (cell.hi[1] - cell.lo[1]) * g.nodes[j],
                        0.5 * (cell.lo[2] + cell.hi[2]) + 0.5 * (cell.hi[2] - cell.lo[2]) * g.nodes[k]};
                total += g.weights[i] * g.weights[j] * g.weights[k] * f(x);
            }
    return total * cell.volume() / 8.0;
}

}  // namespace detail

/// ∫_E f dx to absolute accuracy ~tol for smooth f with |f| <= f_bound.
/// The support box limits integration (pass the support of f). Half the
/// tolerance is spread over covered cells by volume share; the other half is
/// a global pot consumed by boundary cells, which are integrated with a
/// pointwise indicator once small enough.
template <typename F>
double integrate_over_region(F&& f, const Region& e, const BoxShape& support, double tol,
                             double f_bound, std::size_t max_cells = 8'000'000) {
    if (!(tol > 0)) throw Error("integrate_over_region: tol must be positive");
    double total = 0.0;
    std::size_t processed = 0;
    const double support_vol = support.volume();
    auto split = [](const BoxShape& box, std::vector<BoxShape>& out) {
        const int ax = box.widest_axis();
        const double mid = 0.5 * (box.lo[ax] + box.hi[ax]);
        BoxShape a = box, b = box;
        a.hi[ax] = mid;
        b.lo[ax] = mid;
        out.push_back(a);
        out.push_back(b);
    };

    // covered cells: per-cell refinement against a volume-share budget
    std::vector<BoxShape> covered;
    auto drain_covered = [&]() {
        while (!covered.empty()) {
            const BoxShape cell = covered.back();
            covered.pop_back();
            if (++processed > max_cells)
                throw QuadratureError("integrate_over_region: cell budget exhausted");
            const double coarse = detail::gl_cell(f, cell, 6);
            const double fine = detail::gl_cell(f, cell, 10);
            if (std::abs(fine - coarse) <= 0.5 * tol * (cell.volume() / support_vol)) {
                total += fine;
                continue;
            }
            split(cell, covered);
        }
    };

    // boundary cells: worst-first refinement with a two-level pointwise
    // indicator estimate; the first-level worst-case bound vol*f_bound is
    // hopeless for curved boundaries, the Richardson gap is not
    auto gl_ind = [&](const BoxShape& cell) {
        return detail::gl_cell(
            [&](const Point& x) { return e.contains_interior(x) ? f(x) : 0.0; }, cell, 4);
    };
    struct SCell {
        BoxShape box;
        double value;  // finer (two-subcell) estimate
        double est;    // coarse-vs-fine gap
        std::size_t seq;
        bool operator<(const SCell& o) const {
            return est != o.est ? est < o.est : seq > o.seq;  // deterministic order
        }
    };
    std::size_t seq = 0;
    std::priority_queue<SCell> frontier;
    double straddle_total = 0.0, straddle_err = 0.0;
    auto push_straddle = [&](const BoxShape& cell) {
        if (++processed > max_cells)
            throw QuadratureError("integrate_over_region: cell budget exhausted");
        if (cell.volume() == 0.0) return;
        if (e.avoids_box(cell) == Tri::Yes) return;
        if (e.covers_box(cell) == Tri::Yes) {
            covered.push_back(cell);
            return;
        }
        const double coarse = gl_ind(cell);
        std::vector<BoxShape> kids;
        split(cell, kids);
        const double fine = gl_ind(kids[0]) + gl_ind(kids[1]);
        const double est =
            std::max(std::abs(fine - coarse), 1e-3 * cell.volume() * f_bound);
        frontier.push({cell, fine, est, seq++});
        straddle_total += fine;
        straddle_err += est;
    };
    push_straddle(support);
    drain_covered();
    while (!frontier.empty() && straddle_err > 0.45 * tol) {
        const SCell worst = frontier.top();
        frontier.pop();
        straddle_total -= worst.value;
        straddle_err -= worst.est;
        std::vector<BoxShape> kids;
        split(worst.box, kids);
        push_straddle(kids[0]);
        push_straddle(kids[1]);
        drain_covered();
    }
    return total + straddle_total;
}

}  // namespace perfhom
