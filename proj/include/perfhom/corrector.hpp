// Closed-form radial correctors and the limit potential.
//
// The corrector profile rises from 0 at the hole radius a to 1 at the guard
// radius R, harmonically in between:
//   d = 2:   w0(r) = (log a - log r) / (log a - log R)
//   d >= 3:  w0(r) = (a^{2-d} - r^{2-d}) / (a^{2-d} - R^{2-d})
// The auxiliary profile q0(r) = (r^2 - R^2)/2 has radial Laplacian d and
// vanishes at R. The global fields piece these together over the hole list.
#pragma once

#include "perfhom/holes.hpp"
#include "perfhom/region.hpp"

namespace perfhom {

inline void check_annulus(double a, double r_outer) {
    if (!(0 < a && a < r_outer))
        throw GeometryError("corrector profile needs 0 < a < R");
}

inline double w0_eval(double r, double a, double r_outer, int d) {
    check_annulus(a, r_outer);
    if (!(a <= r && r <= r_outer))
        throw GeometryError("w0_eval: r outside [a, R]; use the piecewise global field");
    if (d == 2) return (std::log(a) - std::log(r)) / (std::log(a) - std::log(r_outer));
    const double p = 2.0 - d;
    return (std::pow(a, p) - std::pow(r, p)) / (std::pow(a, p) - std::pow(r_outer, p));
}

inline double w0_grad(double r, double a, double r_outer, int d) {
    check_annulus(a, r_outer);
    if (!(a <= r && r <= r_outer))
        throw GeometryError("w0_grad: r outside [a, R]");
    if (d == 2) return 1.0 / (r * (std::log(r_outer) - std::log(a)));
    const double p = 2.0 - d;
    return (d - 2.0) * std::pow(r, 1.0 - d) / (std::pow(a, p) - std::pow(r_outer, p));
}

inline double q0_eval(double r, double r_outer) {
    if (!(0.0 <= r && r <= r_outer)) throw GeometryError("q0_eval: r outside [0, R]");
    return 0.5 * (r * r - r_outer * r_outer);
}

inline double q0_grad(double r, double r_outer) {
    if (!(0.0 <= r && r <= r_outer)) throw GeometryError("q0_grad: r outside [0, R]");
    return r;
}

/// Global corrector: 0 on the closed holes, the radial profile on each
/// annulus, 1 outside every guard ball. Total and continuous.
inline double w_eval(const Point& x, const PerforatedDomain& dom) {
    const auto [begin, end] = dom.holes_near(x);
    const double r_outer = dom.guard_radius();
    for (const Hole* h = begin; h != end; ++h) {
        const double r = dist(x, h->center, dom.tiling.dim);
        if (r <= h->radius) return 0.0;
        if (r < r_outer) return w0_eval(r, h->radius, r_outer, dom.tiling.dim);
    }
    return 1.0;
}

/// Global auxiliary field: q0(|x - center|) on each guard ball (any family),
/// 0 outside. Guard centers exist for zero-density families too.
inline double q_eval(const Point& x, const PerforatedDomain& dom) {
    const double r_outer = dom.guard_radius();
    const auto it = dom.tile_guards.find(dom.tiling.tile_of(x, dom.eps));
    if (it == dom.tile_guards.end()) return 0.0;
    const auto& centers = dom.guard_centers[it->second.family];
    for (std::size_t i = it->second.begin; i < it->second.end; ++i) {
        const double r = dist(x, centers[i], dom.tiling.dim);
        if (r < r_outer) return q0_eval(r, r_outer);
    }
    return 0.0;
}

/// Squared gradient norm of the corrector over the N annuli of one tile:
///   d = 2:   N * S_2 / (log R - log a)
///   d >= 3:  N * S_d (d-2) / (a^{2-d} - R^{2-d})
inline double annulus_energy(double a, double r_outer, int d, int holes = 1) {
    check_annulus(a, r_outer);
    if (d == 2) return holes * sphere_area(2) / (std::log(r_outer) - std::log(a));
    const double p = 2.0 - d;
    return holes * sphere_area(d) * (d - 2.0) / (std::pow(a, p) - std::pow(r_outer, p));
}

/// d w0/dr at the guard radius divided by the guard radius.
inline double boundary_slope_ratio(double a, double r_outer, int d) {
    return w0_grad(r_outer, a, r_outer, d) / r_outer;
}

/// Limit of boundary_slope_ratio along the critical schedule:
/// mu/C^d for d = 2, mu (d-2)/C^d for d >= 3.
inline double limit_constant(double mu, double guard_c, int d) {
    if (mu < 0) throw GeometryError("limit_constant: density must be >= 0");
    const double base = mu / std::pow(guard_c, d);
    return d == 2 ? base : base * (d - 2.0);
}

/// The simple-function potential V(x) = sum_k v_k 1_{F_k}(x).
struct PotentialV {
    struct Term {
        Region region;
        double coefficient;
    };
    std::vector<Term> terms;
    int dim = 2;

    double operator()(const Point& x) const {
        double v = 0.0;
        for (const auto& t : terms)
            if (t.region.contains_interior(x)) v += t.coefficient;
        return v;
    }
    bool is_zero() const {
        for (const auto& t : terms)
            if (t.coefficient != 0.0) return false;
        return true;
    }
};

/// mu_d = S_d/|A| * (1 for d=2, d-2 for d>=3).
inline double mu_factor(int d, double cell_measure) {
    if (!(cell_measure > 0)) throw GeometryError("mu_factor: |A| must be positive");
    const double base = sphere_area(d) / cell_measure;
    return d == 2 ? base : base * (d - 2.0);
}

/// Potential of a family set: v_k = mu_d * density_k * holes_per_tile_k.
inline PotentialV build_potential(const std::vector<HoleFamily>& families,
                                  const TilingSpec& tiling, int d) {
    const double mu_d = mu_factor(d, tiling.cell_measure());
    PotentialV v;
    v.dim = d;
    for (const auto& fam : families)
        v.terms.push_back({fam.region, mu_d * fam.density * fam.holes_per_tile});
    return v;
}

}  // namespace perfhom
