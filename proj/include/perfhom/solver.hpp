// Uniform-grid finite differences for the perforated and homogenized Poisson
// problems: Dirichlet masking (outer boundary, outside-domain nodes, hole
// nodes), the matrix-free 2d+1-point operator with an optional zero-order
// potential, Jacobi-preconditioned conjugate gradients, discrete norms and
// field export. All loops run in fixed order; results are bit-reproducible.
#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "perfhom/corrector.hpp"

namespace perfhom {

struct Grid {
    BoxShape box;
    double h = 0.0;
    std::array<int, kMaxDim> nodes{1, 1, 1};  // nodes per axis, including boundary
    int dim = 2;

    /// Node spacing must divide every box edge to 1e-12 relative.
    static Grid make(const BoxShape& box, double h) {
        if (!(h > 0)) throw SolverError("grid spacing must be positive");
        Grid g;
        g.box = box;
        g.h = h;
        g.dim = box.dim;
        for (int i = 0; i < box.dim; ++i) {
            const double len = box.hi[i] - box.lo[i];
            const double n = len / h;
            const long nr = std::lround(n);
            if (nr < 2 || std::abs(n - static_cast<double>(nr)) > 1e-12 * n)
                throw SolverError("grid spacing does not divide the box length on axis " +
                                  std::to_string(i));
            g.nodes[i] = static_cast<int>(nr) + 1;
        }
        return g;
    }

    std::size_t total() const {
        std::size_t t = 1;
        for (int i = 0; i < dim; ++i) t *= static_cast<std::size_t>(nodes[i]);
        return t;
    }
    /// Flat index, last axis fastest.
    std::size_t index(int i, int j, int k = 0) const {
        if (dim == 2) return static_cast<std::size_t>(i) * nodes[1] + j;
        return (static_cast<std::size_t>(i) * nodes[1] + j) * nodes[2] + k;
    }
    Point point(int i, int j, int k = 0) const {
        Point p{box.lo[0] + i * h, box.lo[1] + j * h, 0};
        if (dim == 3) p[2] = box.lo[2] + k * h;
        return p;
    }
    bool same_as(const Grid& o) const {
        if (dim != o.dim || h != o.h) return false;
        for (int i = 0; i < dim; ++i)
            if (nodes[i] != o.nodes[i] || box.lo[i] != o.box.lo[i] || box.hi[i] != o.box.hi[i])
                return false;
        return true;
    }
};

enum class NodeState : std::uint8_t {
    Free = 0,
    FixedBoundary = 1,  // on the grid box boundary
    FixedOutside = 2,   // outside the domain region
    FixedHole = 3,      // inside a closed hole
};

struct DirichletMask {
    std::vector<NodeState> state;
    std::size_t free_count = 0;
    double min_hole_cells = std::numeric_limits<double>::infinity();  // min a/h over holes
    bool is_free(std::size_t idx) const { return state[idx] == NodeState::Free; }
};

using GridField = std::vector<double>;  // full node vector; exactly 0 at fixed nodes

namespace detail {

template <typename Fn>
void for_each_node(const Grid& g, Fn&& fn) {
    if (g.dim == 2) {
        for (int i = 0; i < g.nodes[0]; ++i)
            for (int j = 0; j < g.nodes[1]; ++j) fn(i, j, 0, g.index(i, j));
    } else {
        for (int i = 0; i < g.nodes[0]; ++i)
            for (int j = 0; j < g.nodes[1]; ++j)
                for (int k = 0; k < g.nodes[2]; ++k) fn(i, j, k, g.index(i, j, k));
    }
}

}  // namespace detail

/// Flags boundary / outside-domain / hole nodes; free nodes remain. Fails if
/// any hole is thinner than rho_min cells (it would vanish from the grid).
inline DirichletMask build_mask(const Grid& grid, const Region& omega,
                                const PerforatedDomain* dom, int rho_min = 3) {
    DirichletMask m;
    m.state.assign(grid.total(), NodeState::Free);
    if (dom != nullptr) {
        for (std::size_t k = 0; k < dom->families.size(); ++k) {
            if (!(dom->families[k].density > 0.0) || dom->guard_centers[k].empty()) continue;
            const double ratio = dom->family_radius[k] / grid.h;
            m.min_hole_cells = std::min(m.min_hole_cells, ratio);
            if (ratio < rho_min)
                throw SolverError("build_mask: hole radius of family " + std::to_string(k) +
                                  " spans only " + std::to_string(ratio) +
                                  " cells (< " + std::to_string(rho_min) +
                                  "); raise the grid resolution");
        }
    }
    detail::for_each_node(grid, [&](int i, int j, int k, std::size_t idx) {
        bool on_boundary = (i == 0 || i == grid.nodes[0] - 1 || j == 0 || j == grid.nodes[1] - 1);
        if (grid.dim == 3) on_boundary = on_boundary || k == 0 || k == grid.nodes[2] - 1;
        if (on_boundary) {
            m.state[idx] = NodeState::FixedBoundary;
            return;
        }
        const Point x = grid.point(i, j, k);
        if (!omega.contains_interior(x)) {
            m.state[idx] = NodeState::FixedOutside;
            return;
        }
        if (dom != nullptr) {
            const auto [begin, end] = dom->holes_near(x);
            for (const Hole* h = begin; h != end; ++h) {
                if (dist2(x, h->center, grid.dim) <= h->radius * h->radius) {
                    m.state[idx] = NodeState::FixedHole;
                    return;
                }
            }
        }
    });
    for (const NodeState s : m.state)
        if (s == NodeState::Free) ++m.free_count;
    return m;
}

/// Potential sampled at free nodes (0 elsewhere); nullptr V means no term.
inline std::vector<double> sample_potential(const Grid& grid, const DirichletMask& mask,
                                            const PotentialV& v) {
    std::vector<double> out(grid.total(), 0.0);
    detail::for_each_node(grid, [&](int i, int j, int k, std::size_t idx) {
        if (mask.is_free(idx)) out[idx] = v(grid.point(i, j, k));
    });
    return out;
}

/// out = (-Δ_h + V) in on free nodes; fixed nodes stay 0 (homogeneous
/// Dirichlet). Matrix-free 2d+1-point stencil.
inline void apply_operator(const Grid& grid, const DirichletMask& mask,
                           const std::vector<double>* v_node, const GridField& in,
                           GridField& out) {
    if (in.size() != grid.total()) throw SolverError("apply_operator: field/grid size mismatch");
    out.assign(grid.total(), 0.0);
    const double inv_h2 = 1.0 / (grid.h * grid.h);
    const int d = grid.dim;
    const std::size_t stride_k = 1;
    const std::size_t stride_j = (d == 3) ? static_cast<std::size_t>(grid.nodes[2]) : 1;
    const std::size_t stride_i = static_cast<std::size_t>(grid.nodes[1]) * stride_j;
    detail::for_each_node(grid, [&](int, int, int, std::size_t idx) {
        if (!mask.is_free(idx)) return;
        // free nodes are strictly interior, all neighbors exist
        double acc = 2.0 * d * in[idx];
        acc -= in[idx - stride_i] + in[idx + stride_i];
        acc -= in[idx - stride_j] + in[idx + stride_j];
        if (d == 3) acc -= in[idx - stride_k] + in[idx + stride_k];
        acc *= inv_h2;
        if (v_node) acc += (*v_node)[idx] * in[idx];
        out[idx] = acc;
    });
}

struct CgResult {
    GridField u;
    int iterations = 0;
    double rel_residual = 0.0;
    bool converged = false;
    std::vector<double> residual_history;  // relative residual per iteration
};

/// Jacobi-preconditioned conjugate gradients on the free nodes.
/// Returns u with ||Au - rhs|| <= rel_tol ||rhs||; deterministic reductions.
inline CgResult cg_solve(const Grid& grid, const DirichletMask& mask,
                         const std::vector<double>* v_node, const GridField& rhs, double rel_tol,
                         int max_iter) {
    const std::size_t n = grid.total();
    if (rhs.size() != n) throw SolverError("cg_solve: rhs/grid size mismatch");
    CgResult res;
    res.u.assign(n, 0.0);

    auto dot = [&](const GridField& a, const GridField& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask.is_free(i)) s += a[i] * b[i];
        return s;
    };

    const double rhs_norm = std::sqrt(dot(rhs, rhs));
    if (rhs_norm == 0.0) {
        res.converged = true;
        return res;
    }
    const double diag_lap = 2.0 * grid.dim / (grid.h * grid.h);
    GridField r = rhs, z(n, 0.0), p(n, 0.0), ap(n, 0.0);
    auto precondition = [&](const GridField& src, GridField& dst) {
        for (std::size_t i = 0; i < n; ++i)
            dst[i] = mask.is_free(i) ? src[i] / (diag_lap + (v_node ? (*v_node)[i] : 0.0)) : 0.0;
    };
    precondition(r, z);
    p = z;
    double rz = dot(r, z);
    for (int it = 0; it < max_iter; ++it) {
        apply_operator(grid, mask, v_node, p, ap);
        const double p_ap = dot(p, ap);
        if (p_ap <= 0.0) throw SolverError("cg_solve: operator lost positive definiteness");
        const double alpha = rz / p_ap;
        for (std::size_t i = 0; i < n; ++i)
            if (mask.is_free(i)) {
                res.u[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
        res.iterations = it + 1;
        const double rel = std::sqrt(dot(r, r)) / rhs_norm;
        res.residual_history.push_back(rel);
        if (rel <= rel_tol) {
            res.converged = true;
            res.rel_residual = rel;
            return res;
        }
        precondition(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i)
            if (mask.is_free(i)) p[i] = z[i] + beta * p[i];
    }
    res.rel_residual = res.residual_history.empty() ? 1.0 : res.residual_history.back();
    return res;  // caller inspects converged/residual_history
}

enum class RhsKind { Constant, SineProduct, GaussianBump };

struct RhsSpec {
    RhsKind kind = RhsKind::Constant;
    double amplitude = 1.0;
    Point center{0.5, 0.5, 0.5};  // GaussianBump only
    double width = 0.1;

    static RhsSpec parse(const std::string& name, double amplitude = 1.0) {
        RhsSpec r;
        r.amplitude = amplitude;
        if (name == "constant")
            r.kind = RhsKind::Constant;
        else if (name == "sine_product")
            r.kind = RhsKind::SineProduct;
        else if (name == "gaussian")
            r.kind = RhsKind::GaussianBump;
        else
            throw ConfigError("unknown rhs '" + name + "' (catalog: constant, sine_product, gaussian)");
        return r;
    }
};

/// Samples the catalog right-hand side at free nodes. sine_product uses the
/// box-normalized coordinates, so it vanishes on the outer boundary.
inline GridField sample_rhs(const Grid& grid, const DirichletMask& mask, const RhsSpec& rhs) {
    GridField f(grid.total(), 0.0);
    detail::for_each_node(grid, [&](int i, int j, int k, std::size_t idx) {
        if (!mask.is_free(idx)) return;
        const Point x = grid.point(i, j, k);
        switch (rhs.kind) {
            case RhsKind::Constant:
                f[idx] = rhs.amplitude;
                break;
            case RhsKind::SineProduct: {
                double v = rhs.amplitude;
                for (int ax = 0; ax < grid.dim; ++ax)
                    v *= std::sin(M_PI * (x[ax] - grid.box.lo[ax]) /
                                  (grid.box.hi[ax] - grid.box.lo[ax]));
                f[idx] = v;
                break;
            }
            case RhsKind::GaussianBump: {
                const double s = dist2(x, rhs.center, grid.dim) / (rhs.width * rhs.width);
                f[idx] = rhs.amplitude * std::exp(-s);
                break;
            }
        }
    });
    return f;
}

struct SolveOutput {
    Grid grid;
    DirichletMask mask;
    CgResult cg;
};

/// Poisson solve on omega minus the holes (homogeneous Dirichlet on both).
inline SolveOutput solve_perforated(const PerforatedDomain& dom, const RhsSpec& rhs, double h,
                                    double rel_tol = 1e-10, int rho_min = 3, int max_iter = 100000) {
    const Grid grid = Grid::make(dom.omega.bounding_box(), h);
    SolveOutput out{grid, build_mask(grid, dom.omega, &dom, rho_min), {}};
    const GridField f = sample_rhs(grid, out.mask, rhs);
    out.cg = cg_solve(grid, out.mask, nullptr, f, rel_tol, max_iter);
    if (!out.cg.converged) throw SolverError("solve_perforated: cg did not converge");
    return out;
}

/// (-Δ + V) solve on omega without holes; a zero potential takes the plain
/// Poisson path (bit-identical operator).
inline SolveOutput solve_homogenized(const Region& omega, const PotentialV* v, const RhsSpec& rhs,
                                     double h, double rel_tol = 1e-10, int max_iter = 100000) {
    const Grid grid = Grid::make(omega.bounding_box(), h);
    SolveOutput out{grid, build_mask(grid, omega, nullptr), {}};
    const GridField f = sample_rhs(grid, out.mask, rhs);
    if (v != nullptr && !v->is_zero()) {
        const std::vector<double> v_node = sample_potential(grid, out.mask, *v);
        out.cg = cg_solve(grid, out.mask, &v_node, f, rel_tol, max_iter);
    } else {
        out.cg = cg_solve(grid, out.mask, nullptr, f, rel_tol, max_iter);
    }
    if (!out.cg.converged) throw SolverError("solve_homogenized: cg did not converge");
    return out;
}

/// (L2 distance, forward-difference H1 seminorm distance) of two fields on
/// the same grid. Masks may differ; fixed nodes carry exact zeros.
inline std::pair<double, double> error_norms(const GridField& u1, const GridField& u2,
                                             const Grid& grid) {
    if (u1.size() != grid.total() || u2.size() != grid.total())
        throw SolverError("error_norms: field/grid size mismatch");
    const double cell = std::pow(grid.h, grid.dim);
    double l2 = 0.0, h1 = 0.0;
    const int d = grid.dim;
    const std::size_t stride_j = (d == 3) ? static_cast<std::size_t>(grid.nodes[2]) : 1;
    const std::size_t stride_i = static_cast<std::size_t>(grid.nodes[1]) * stride_j;
    detail::for_each_node(grid, [&](int i, int j, int k, std::size_t idx) {
        const double e = u1[idx] - u2[idx];
        l2 += e * e;
        const std::size_t strides[3] = {stride_i, stride_j, 1};
        const int pos[3] = {i, j, k};
        for (int ax = 0; ax < d; ++ax) {
            if (pos[ax] + 1 >= grid.nodes[ax]) continue;
            const double df = (u1[idx + strides[ax]] - u2[idx + strides[ax]]) - e;
            h1 += df * df;
        }
    });
    return {std::sqrt(cell * l2), std::sqrt(cell * h1) / grid.h};
}

/// Flat little-endian export: int32 dim, int64 node counts, float64 h, then
/// all node values (last axis fastest).
inline void write_field_binary(const std::string& path, const Grid& grid, const GridField& u) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("write_field_binary: cannot open " + path);
    const std::int32_t d = grid.dim;
    out.write(reinterpret_cast<const char*>(&d), sizeof d);
    for (int i = 0; i < grid.dim; ++i) {
        const std::int64_t n = grid.nodes[i];
        out.write(reinterpret_cast<const char*>(&n), sizeof n);
    }
    out.write(reinterpret_cast<const char*>(&grid.h), sizeof grid.h);
    out.write(reinterpret_cast<const char*>(u.data()),
              static_cast<std::streamsize>(u.size() * sizeof(double)));
}

inline void write_field_csv(const std::string& path, const Grid& grid, const GridField& u) {
    std::ofstream out(path);
    if (!out) throw Error("write_field_csv: cannot open " + path);
    out << "# perfhom field v1\n";
    out << (grid.dim == 2 ? "x,y,value\n" : "x,y,z,value\n");
    char buf[128];
    detail::for_each_node(grid, [&](int i, int j, int k, std::size_t idx) {
        const Point x = grid.point(i, j, k);
        if (grid.dim == 2)
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x[0], x[1], u[idx]);
        else
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", x[0], x[1], x[2], u[idx]);
        out << buf;
    });
}

}  // namespace perfhom
