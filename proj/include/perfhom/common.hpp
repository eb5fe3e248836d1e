// Shared primitives: small fixed-capacity points, error types, unit-sphere
// constants. Spatial containers support dimensions 2 and 3; purely radial or
// per-dimension formulas accept any d >= 2.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace perfhom {

inline constexpr int kMaxDim = 3;

using Point = std::array<double, kMaxDim>;
using TileIndex = std::array<long, kMaxDim>;

inline Point make_point(double x, double y, double z = 0.0) { return {x, y, z}; }

inline Point point_from(const std::vector<double>& v) {
    Point p{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < v.size() && i < kMaxDim; ++i) p[i] = v[i];
    return p;
}

inline double dist2(const Point& a, const Point& b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double dist(const Point& a, const Point& b, int dim) { return std::sqrt(dist2(a, b, dim)); }

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Region expression trees outside the exact predicate algebra.
struct UnsupportedRegionError : Error {
    using Error::Error;
};

/// Subdivision or order-escalation budget exhausted before the tolerance.
struct QuadratureError : Error {
    using Error::Error;
};

/// Domain construction violating the hole-placement assumptions.
struct GeometryError : Error {
    using Error::Error;
};

struct SolverError : Error {
    using Error::Error;
};

/// Configuration parse/validation failure; carries every violation found.
struct ConfigError : Error {
    std::vector<std::string> violations;
    explicit ConfigError(const std::string& what, std::vector<std::string> v = {})
        : Error(what), violations(std::move(v)) {}
};

inline void require_dim(int dim) {
    if (dim < 2 || dim > kMaxDim)
        throw Error("spatial dimension must be 2 or " + std::to_string(kMaxDim) +
                    ", got " + std::to_string(dim));
}

/// Volume of the unit ball in R^d.
inline double unit_ball_volume(int d) {
    if (d < 1) throw Error("unit_ball_volume: d must be >= 1");
    return std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

/// Surface area of the unit sphere boundary in R^d (2*pi for d=2, 4*pi for d=3).
inline double sphere_area(int d) {
    if (d < 2) throw Error("sphere_area: d must be >= 2");
    return d * unit_ball_volume(d);
}

}  // namespace perfhom
