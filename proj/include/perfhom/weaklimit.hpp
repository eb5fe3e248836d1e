// Numerical verification kernels for the convergence statements: guard-ball
// indicator pairings against cubes, the L2 deficit of the corrector, and the
// distributional pairing <-Δ w, ·> computed along two independent routes
// plus its limit against the potential V.
//
// Smooth test functions φ do not vanish on the holes, so the pairing is
// evaluated against the admissible representative φ·w (which vanishes on
// every hole and converges weakly to φ):
//   direct route:      ∫_annuli  ∇w · ∇(φ w) dx
//   decomposed route:  Σ_k (w0'(R)/R) ( ∫_{guard balls} ∇q·∇φ + d ∫ φ )
// Both equal the outer-sphere flux term Σ w0'(R) ∮ φ dS exactly, which is
// what converges to <V, φ>.
#pragma once

#include "perfhom/corrector.hpp"
#include "perfhom/quadrature.hpp"

namespace perfhom {

struct TestFunction {
    enum class Kind { Bump, PolyBump, CubeIndicator };

    Kind kind = Kind::Bump;
    int dim = 2;
    Point center{0, 0, 0};
    double radius = 0.0;          // bump support radius
    std::vector<double> affine;   // PolyBump: a0 + sum_j a_j (x_j - c_j)
    BoxShape cube;                // CubeIndicator bounds
    std::string name;

    static TestFunction bump(const Point& c, double rho, int dim, std::string name = "bump") {
        if (!(rho > 0)) throw Error("bump radius must be positive");
        TestFunction f;
        f.kind = Kind::Bump;
        f.dim = dim;
        f.center = c;
        f.radius = rho;
        f.name = std::move(name);
        return f;
    }
    static TestFunction poly_bump(const Point& c, double rho, std::vector<double> affine, int dim,
                                  std::string name = "poly_bump") {
        if (affine.size() != static_cast<std::size_t>(dim) + 1)
            throw Error("poly_bump needs 1 + dim affine coefficients");
        TestFunction f = bump(c, rho, dim, std::move(name));
        f.kind = Kind::PolyBump;
        f.affine = std::move(affine);
        return f;
    }
    static TestFunction cube_indicator(const BoxShape& box, std::string name = "cube") {
        TestFunction f;
        f.kind = Kind::CubeIndicator;
        f.dim = box.dim;
        f.cube = box;
        f.name = std::move(name);
        return f;
    }

    bool smooth() const { return kind != Kind::CubeIndicator; }

    double eval(const Point& x) const {
        if (kind == Kind::CubeIndicator) return cube.contains(x) ? 1.0 : 0.0;
        const double s = dist2(x, center, dim) / (radius * radius);
        if (s >= 1.0) return 0.0;
        const double b = std::exp(-1.0 / (1.0 - s));
        if (kind == Kind::Bump) return b;
        double p = affine[0];
        for (int k = 0; k < dim; ++k) p += affine[k + 1] * (x[k] - center[k]);
        return p * b;
    }

    Point grad(const Point& x) const {
        if (kind == Kind::CubeIndicator)
            throw Error("cube indicator test functions have no gradient");
        Point g{0, 0, 0};
        const double s = dist2(x, center, dim) / (radius * radius);
        if (s >= 1.0) return g;
        const double t = 1.0 - s;
        const double b = std::exp(-1.0 / t);
        const double chain = -2.0 * b / (radius * radius * t * t);
        for (int k = 0; k < dim; ++k) g[k] = chain * (x[k] - center[k]);
        if (kind == Kind::Bump) return g;
        double p = affine[0];
        for (int k = 0; k < dim; ++k) p += affine[k + 1] * (x[k] - center[k]);
        for (int k = 0; k < dim; ++k) g[k] = p * g[k] + affine[k + 1] * b;
        return g;
    }

    /// sup |φ| over the support (a bound, not the exact sup).
    double sup_bound() const {
        if (kind == Kind::CubeIndicator) return 1.0;
        double p = std::abs(affine.empty() ? 1.0 : affine[0]);
        for (std::size_t k = 1; k < affine.size(); ++k) p += std::abs(affine[k]) * radius;
        return (kind == Kind::Bump ? 1.0 : p) * std::exp(-1.0);
    }

    BoxShape support_box() const {
        if (kind == Kind::CubeIndicator) return cube;
        BoxShape b;
        b.dim = dim;
        for (int k = 0; k < dim; ++k) {
            b.lo[k] = center[k] - radius;
            b.hi[k] = center[k] + radius;
        }
        return b;
    }
};

namespace detail {

inline void require_smooth(const TestFunction& f, const char* op) {
    if (!f.smooth()) throw Error(std::string(op) + ": needs a smooth test function");
}

/// True when the guard ball around c cannot meet the support of f.
inline bool guard_ball_misses(const Point& c, double guard_r, const TestFunction& f, int dim) {
    return dist(c, f.center, dim) >= guard_r + f.radius;
}

inline const int kLadder[] = {6, 10, 14, 20, 28, 40, 56, 80, 112};

/// Escalates a (radial order, angular resolution) evaluation until two
/// successive ladder steps agree to rtol (or atol absolute).
template <typename Eval>
double converge_ladder(Eval&& eval, double rtol, double atol, const char* what) {
    double prev = 0.0;
    bool have_prev = false;
    for (int res : kLadder) {
        const double cur = eval(res);
        if (have_prev &&
            std::abs(cur - prev) <= std::max(atol, rtol * std::abs(cur))) {
            return cur;
        }
        prev = cur;
        have_prev = true;
    }
    throw QuadratureError(std::string(what) + ": quadrature ladder did not converge");
}

}  // namespace detail

/// |B_{eps,k} ∩ E|: total guard-ball volume of family k inside the cube E.
/// Balls that avoid the cube boundary use closed forms; straddling balls use
/// the exact slice volume to rtol * |ball|.
inline double indicator_pairing(const PerforatedDomain& dom, int family, const BoxShape& cube,
                                double rtol = 1e-8) {
    if (family < 0 || family >= static_cast<int>(dom.guard_centers.size()))
        throw Error("indicator_pairing: family index out of range");
    const int d = dom.tiling.dim;
    const double r_guard = dom.guard_radius();
    const double full = unit_ball_volume(d) * std::pow(r_guard, d);
    double total = 0.0;
    for (const Point& c : dom.guard_centers[family]) {
        bool inside = true;
        for (int k = 0; k < d; ++k)
            inside = inside && (cube.lo[k] <= c[k] - r_guard) && (c[k] + r_guard <= cube.hi[k]);
        if (inside) {
            total += full;
            continue;
        }
        if (cube.dist2_to(c) >= r_guard * r_guard) continue;
        total += ball_box_volume(c, r_guard, cube, d, rtol);
    }
    return total;
}

/// || w - 1 ||_{L2}: per hole, the full hole volume plus the radial integral
/// of (1 - w0)^2 over the annulus; zero outside the guard balls.
inline double w_deficit_l2(const PerforatedDomain& dom) {
    const int d = dom.tiling.dim;
    const double r_guard = dom.guard_radius();
    double sq = 0.0;
    for (const Hole& h : dom.holes) {
        const double hole_vol = unit_ball_volume(d) * std::pow(h.radius, d);
        auto radial = [&](int res) {
            return integrate_gl(
                [&](double r) {
                    const double one_minus = 1.0 - w0_eval(r, h.radius, r_guard, d);
                    return one_minus * one_minus * std::pow(r, d - 1);
                },
                h.radius, r_guard, res);
        };
        const double annulus =
            sphere_area(d) * detail::converge_ladder(radial, 1e-11, 1e-300, "w_deficit_l2");
        sq += hole_vol + annulus;
    }
    return std::sqrt(sq);
}

/// <-Δ w, φ w> by direct annulus quadrature. Per hole the integrand splits
/// into a smooth radial part (Gauss in r) and a capacity part that is Gauss
/// in the w0-linearizing coordinate (log r for d=2, r^{2-d} for d>=3).
inline double pairing_direct(const PerforatedDomain& dom, const TestFunction& phi,
                             double rtol = 1e-8) {
    detail::require_smooth(phi, "pairing_direct");
    const int d = dom.tiling.dim;
    const double r_guard = dom.guard_radius();
    double total = 0.0;
    for (std::size_t hi = 0; hi < dom.holes.size(); ++hi) {
        const Hole& h = dom.holes[hi];
        if (detail::guard_ball_misses(h.center, r_guard, phi, d)) continue;
        const double a = h.radius;
        const double flux_scale = annulus_energy(a, r_guard, d);

        auto eval = [&](int res) {
            const SphereRule sph = sphere_rule(d, res);
            const GaussRule& gl = gauss_legendre(res);
            // radial transform bounds for the capacity part
            const double t_lo = d == 2 ? std::log(a) : std::pow(r_guard, 2.0 - d);
            const double t_hi = d == 2 ? std::log(r_guard) : std::pow(a, 2.0 - d);
            const double cap_weight =
                d == 2 ? 1.0 / std::pow(std::log(r_guard) - std::log(a), 2)
                       : (d - 2.0) / std::pow(std::pow(a, 2.0 - d) - std::pow(r_guard, 2.0 - d), 2);
            double acc = 0.0;
            for (std::size_t ui = 0; ui < sph.dirs.size(); ++ui) {
                const Point& u = sph.dirs[ui];
                double smooth_part = 0.0;  // ∫ w0 w0' (u·∇φ) r^{d-1} dr
                double cap_part = 0.0;     // ∫ φ w0'^2 r^{d-1} dr in t coords
                for (int i = 0; i < res; ++i) {
                    {
                        const double r = 0.5 * (a + r_guard) + 0.5 * (r_guard - a) * gl.nodes[i];
                        Point x = h.center;
                        for (int k = 0; k < d; ++k) x[k] += r * u[k];
                        const Point g = phi.grad(x);
                        double ug = 0.0;
                        for (int k = 0; k < d; ++k) ug += u[k] * g[k];
                        smooth_part += 0.5 * (r_guard - a) * gl.weights[i] *
                                       w0_eval(r, a, r_guard, d) * w0_grad(r, a, r_guard, d) *
                                       std::pow(r, d - 1) * ug;
                    }
                    {
                        const double t = 0.5 * (t_lo + t_hi) + 0.5 * (t_hi - t_lo) * gl.nodes[i];
                        const double r = d == 2 ? std::exp(t) : std::pow(t, 1.0 / (2.0 - d));
                        Point x = h.center;
                        for (int k = 0; k < d; ++k) x[k] += r * u[k];
                        cap_part += 0.5 * (t_hi - t_lo) * gl.weights[i] * cap_weight * phi.eval(x);
                    }
                }
                acc += sph.weights[ui] * (smooth_part + cap_part);
            }
            return acc;
        };
        total += detail::converge_ladder(eval, rtol, 1e-13 * flux_scale,
                                         "pairing_direct hole quadrature");
    }
    return total;
}

/// The flux decomposition route: Σ_k (w0'(R)/R) Σ_{holes of k}
/// ∫_{guard ball} ( (x-c)·∇φ + d φ ) dx, with ∇q = (x-c) on the ball.
inline double pairing_decomposed(const PerforatedDomain& dom, const TestFunction& phi,
                                 double rtol = 1e-8) {
    detail::require_smooth(phi, "pairing_decomposed");
    const int d = dom.tiling.dim;
    const double r_guard = dom.guard_radius();
    double total = 0.0;
    for (std::size_t k = 0; k < dom.families.size(); ++k) {
        if (!(dom.families[k].density > 0.0)) continue;
        const double a = dom.family_radius[k];
        const double slope = boundary_slope_ratio(a, r_guard, d);
        const double ball_vol = unit_ball_volume(d) * std::pow(r_guard, d);
        double family_sum = 0.0;
        for (const Point& c : dom.guard_centers[k]) {
            if (detail::guard_ball_misses(c, r_guard, phi, d)) continue;
            auto eval = [&](int res) {
                const SphereRule sph = sphere_rule(d, res);
                const GaussRule& gl = gauss_legendre(res);
                double acc = 0.0;
                for (std::size_t ui = 0; ui < sph.dirs.size(); ++ui) {
                    const Point& u = sph.dirs[ui];
                    double radial = 0.0;
                    for (int i = 0; i < res; ++i) {
                        const double r = 0.5 * r_guard * (1.0 + gl.nodes[i]);
                        Point x = c;
                        for (int kk = 0; kk < d; ++kk) x[kk] += r * u[kk];
                        const Point g = phi.grad(x);
                        double rg = 0.0;
                        for (int kk = 0; kk < d; ++kk) rg += r * u[kk] * g[kk];
                        radial += 0.5 * r_guard * gl.weights[i] * (rg + d * phi.eval(x)) *
                                  std::pow(r, d - 1);
                    }
                    acc += sph.weights[ui] * radial;
                }
                return acc;
            };
            family_sum += detail::converge_ladder(eval, rtol, 1e-13 * d * ball_vol,
                                                  "pairing_decomposed ball quadrature");
        }
        total += slope * family_sum;
    }
    return total;
}

/// <V, φ> = Σ_k v_k ∫_{F_k} φ dx, each term by region quadrature to tol.
inline double pairing_limit(const PotentialV& v, const TestFunction& phi, double tol) {
    detail::require_smooth(phi, "pairing_limit");
    if (!(tol > 0)) throw Error("pairing_limit: tol must be positive");
    if (v.terms.empty()) return 0.0;
    const BoxShape supp = phi.support_box();
    double total = 0.0;
    const double share = tol / static_cast<double>(v.terms.size());
    for (const auto& term : v.terms) {
        if (term.coefficient == 0.0) continue;
        const double term_tol = share / std::max(1.0, std::abs(term.coefficient));
        total += term.coefficient *
                 integrate_over_region([&](const Point& x) { return phi.eval(x); }, term.region,
                                       supp, term_tol, phi.sup_bound());
    }
    return total;
}

}  // namespace perfhom
