// Scaled lattice tilings of R^d by half-open boxes, and the inner/outer tile
// index families of a region: lambda_minus collects tiles contained in E,
// lambda_plus collects tiles meeting E. Containment is decided by the exact
// box predicates of the region algebra; an undecidable tile raises the
// unsupported-region error instead of being approximated.
#pragma once

#include <cmath>
#include <vector>

#include "perfhom/region.hpp"

namespace perfhom {

/// The cell A = [0,L_1) x ... x [0,L_d) together with the matching lattice
/// {(n_1 L_1, ..., n_d L_d) : n in Z^d}; the scaled tile for index n at scale
/// eps is eps*([0,L)+n.L).
struct TilingSpec {
    int dim = 2;
    Point cell_lengths{1.0, 1.0, 1.0};

    static TilingSpec make(int dim, const Point& lengths) {
        require_dim(dim);
        for (int i = 0; i < dim; ++i)
            if (!(lengths[i] > 0)) throw GeometryError("tiling cell lengths must be positive");
        return TilingSpec{dim, lengths};
    }

    double cell_measure() const {
        double m = 1.0;
        for (int i = 0; i < dim; ++i) m *= cell_lengths[i];
        return m;
    }

    BoxShape tile_box(const TileIndex& n, double eps) const {
        BoxShape b;
        b.dim = dim;
        for (int i = 0; i < dim; ++i) {
            b.lo[i] = eps * static_cast<double>(n[i]) * cell_lengths[i];
            b.hi[i] = eps * static_cast<double>(n[i] + 1) * cell_lengths[i];
        }
        return b;
    }

    /// Index of the tile containing x (half-open convention).
    TileIndex tile_of(const Point& x, double eps) const {
        TileIndex n{0, 0, 0};
        for (int i = 0; i < dim; ++i)
            n[i] = static_cast<long>(std::floor(x[i] / (eps * cell_lengths[i])));
        return n;
    }
};

namespace detail {

struct IndexRange {
    long lo[kMaxDim] = {0, 0, 0};
    long hi[kMaxDim] = {0, 0, 0};  // inclusive
};

inline IndexRange index_window(const TilingSpec& t, double eps, const BoxShape& window) {
    // Superset of the tiles meeting the window; the exact predicates filter.
    IndexRange r;
    for (int i = 0; i < t.dim; ++i) {
        const double step = eps * t.cell_lengths[i];
        r.lo[i] = static_cast<long>(std::floor(window.lo[i] / step)) - 1;
        r.hi[i] = static_cast<long>(std::floor(window.hi[i] / step)) + 1;
    }
    return r;
}

template <typename Keep>
std::vector<TileIndex> enumerate_tiles(const TilingSpec& t, double eps, const BoxShape& window,
                                       Keep&& keep) {
    if (!(eps > 0)) throw GeometryError("tiling scale eps must be positive");
    const IndexRange r = index_window(t, eps, window);
    std::vector<TileIndex> out;
    TileIndex n{0, 0, 0};
    if (t.dim == 2) {
        for (n[0] = r.lo[0]; n[0] <= r.hi[0]; ++n[0])
            for (n[1] = r.lo[1]; n[1] <= r.hi[1]; ++n[1])
                if (keep(t.tile_box(n, eps))) out.push_back(n);
    } else {
        for (n[0] = r.lo[0]; n[0] <= r.hi[0]; ++n[0])
            for (n[1] = r.lo[1]; n[1] <= r.hi[1]; ++n[1])
                for (n[2] = r.lo[2]; n[2] <= r.hi[2]; ++n[2])
                    if (keep(t.tile_box(n, eps))) out.push_back(n);
    }
    return out;  // lexicographic by construction
}

}  // namespace detail

/// Indices of tiles contained in E, enumerated inside the window.
/// The window must contain E's support for the result to be complete.
inline std::vector<TileIndex> lambda_minus(const Region& e, const TilingSpec& t, double eps,
                                           const BoxShape& window) {
    return detail::enumerate_tiles(t, eps, window, [&](const BoxShape& tile) {
        switch (e.covers_box(tile)) {
            case Tri::Yes: return true;
            case Tri::No: return false;
            case Tri::Maybe:
                throw UnsupportedRegionError(
                    "lambda_minus: tile containment undecidable for this region expression");
        }
        return false;
    });
}

/// Indices of tiles meeting E, enumerated inside the window.
inline std::vector<TileIndex> lambda_plus(const Region& e, const TilingSpec& t, double eps,
                                          const BoxShape& window) {
    return detail::enumerate_tiles(t, eps, window, [&](const BoxShape& tile) {
        switch (e.avoids_box(tile)) {
            case Tri::Yes: return false;
            case Tri::No: return true;
            case Tri::Maybe:
                throw UnsupportedRegionError(
                    "lambda_plus: tile intersection undecidable for this region expression");
        }
        return false;
    });
}

/// Measure of a union of (#count) disjoint tiles at scale eps:
/// count * eps^d * |A|, exact, no quadrature.
inline double tile_union_measure(std::size_t count, const TilingSpec& t, double eps) {
    if (!(eps > 0)) throw GeometryError("tile_union_measure: eps must be positive");
    return static_cast<double>(count) * std::pow(eps, t.dim) * t.cell_measure();
}

}  // namespace perfhom
