// Hole families concentrated on regions, the critical radius schedule, and
// the fully instantiated perforated domain: one ball of the critical radius
// per pattern point per tile fully contained in the family's region, each
// wrapped in a guard ball of radius C*eps that stays inside its tile.
#pragma once

#include <map>
#include <utility>
#include <vector>

#include "perfhom/tiling.hpp"

namespace perfhom {

/// Hole radius a(eps) solving the density identity exactly at this eps:
///   d = 2:   eps^-2 * (-log a)^-1 = mu   =>  a = exp(-1/(mu eps^2))
///   d >= 3:  eps^-d * a^(d-2)     = mu   =>  a = (mu eps^d)^(1/(d-2))
/// mu = 0 yields 0 (the family contributes no holes).
inline double critical_radius(double mu, double eps, int d) {
    if (!(eps > 0)) throw GeometryError("critical_radius: eps must be positive");
    if (d < 2) throw GeometryError("critical_radius: d must be >= 2");
    if (mu < 0) throw GeometryError("critical_radius: density must be >= 0");
    if (mu == 0.0) return 0.0;
    if (d == 2) return std::exp(-1.0 / (mu * eps * eps));
    return std::pow(mu * std::pow(eps, d), 1.0 / (d - 2));
}

/// Re-evaluates the density expression at radius a (the inverse direction of
/// critical_radius); used for round-trip checks and diagnostics.
inline double density_of_radius(double a, double eps, int d) {
    if (!(eps > 0)) throw GeometryError("density_of_radius: eps must be positive");
    if (a <= 0.0) return 0.0;
    if (d == 2) return std::pow(eps, -2) / (-std::log(a));
    return std::pow(eps, -d) * std::pow(a, d - 2);
}

/// critical_radius plus a non-fatal feasibility diagnostic against the guard
/// radius C*eps; warnings are appended, the radius is still returned.
inline double critical_radius_checked(double mu, double eps, int d, double guard_c,
                                      std::vector<std::string>* warnings) {
    const double a = critical_radius(mu, eps, d);
    if (mu > 0.0 && a >= guard_c * eps && warnings) {
        warnings->push_back("critical radius a=" + std::to_string(a) + " >= C*eps=" +
                            std::to_string(guard_c * eps) + " at eps=" + std::to_string(eps) +
                            "; hole construction infeasible at this scale");
    }
    return a;
}

/// A family of holes concentrated on `region`: `holes_per_tile` holes per
/// fully-contained tile, placed at the tile-relative pattern points
/// (coordinates in the open unit cell), with density parameter `density`.
struct HoleFamily {
    Region region;
    int holes_per_tile = 1;
    double density = 0.0;
    std::vector<Point> pattern;  // size == holes_per_tile, entries in (0,1)^d
    std::string name;            // optional label for reports
};

struct Hole {
    Point center{0, 0, 0};
    double radius = 0.0;
    int family = 0;
    TileIndex tile{0, 0, 0};
};

/// Validates Eq.-style placement preconditions that do not depend on eps:
/// the cell is large enough for the guard balls, and the pattern's guard
/// balls have pairwise disjoint closures strictly inside the open tile.
inline void validate_family_pattern(const HoleFamily& fam, const TilingSpec& tiling, double guard_c,
                                    std::vector<std::string>& violations) {
    const int d = tiling.dim;
    const std::string label = fam.name.empty() ? "family" : fam.name;
    if (fam.holes_per_tile < 1)
        violations.push_back(label + ": holes_per_tile must be >= 1");
    if (fam.density < 0) violations.push_back(label + ": density must be >= 0");
    if (static_cast<int>(fam.pattern.size()) != fam.holes_per_tile)
        violations.push_back(label + ": pattern size must equal holes_per_tile");
    const double cell = tiling.cell_measure();
    const double guard_ball = unit_ball_volume(d) * std::pow(guard_c, d);
    if (!(cell > fam.holes_per_tile * guard_ball))
        violations.push_back(label + ": cell measure |A| must exceed N*|B(0,C)| (got |A|=" +
                             std::to_string(cell) + ", N*|B(0,C)|=" +
                             std::to_string(fam.holes_per_tile * guard_ball) + ")");
    for (std::size_t j = 0; j < fam.pattern.size(); ++j) {
        for (int i = 0; i < d; ++i) {
            const double c = fam.pattern[j][i] * tiling.cell_lengths[i];
            if (!(c > guard_c && c < tiling.cell_lengths[i] - guard_c)) {
                violations.push_back(label + ": pattern point " + std::to_string(j) +
                                     " guard ball escapes the open tile on axis " +
                                     std::to_string(i));
                break;
            }
        }
        for (std::size_t l = j + 1; l < fam.pattern.size(); ++l) {
            Point pj{0, 0, 0}, pl{0, 0, 0};
            for (int i = 0; i < d; ++i) {
                pj[i] = fam.pattern[j][i] * tiling.cell_lengths[i];
                pl[i] = fam.pattern[l][i] * tiling.cell_lengths[i];
            }
            if (!(dist(pj, pl, d) > 2.0 * guard_c))
                violations.push_back(label + ": guard balls of pattern points " +
                                     std::to_string(j) + " and " + std::to_string(l) +
                                     " are not disjoint");
        }
    }
}

/// A perforated configuration at a fixed scale: the outer region, the tiling,
/// the families, the instantiated holes (families with positive density), and
/// the guard-ball centers of every family (defined for density 0 as well).
struct PerforatedDomain {
    Region omega;
    TilingSpec tiling;
    std::vector<HoleFamily> families;
    double eps = 0.0;
    double guard_c = 0.0;

    std::vector<Hole> holes;                         // lexicographic (family, tile, pattern)
    std::vector<std::vector<Point>> guard_centers;   // per family, all guard centers
    std::vector<double> family_radius;               // a_k per family (0 if density 0)
    std::map<TileIndex, std::pair<std::size_t, std::size_t>> tile_holes;  // index range into holes
    struct GuardSpan {
        int family;
        std::size_t begin, end;  // range into guard_centers[family]
    };
    std::map<TileIndex, GuardSpan> tile_guards;  // at most one family per tile

    double guard_radius() const { return guard_c * eps; }

    /// Holes living in the tile that contains x (guard balls never cross
    /// tile boundaries, so these are the only candidates near x).
    std::pair<const Hole*, const Hole*> holes_near(const Point& x) const {
        const TileIndex n = tiling.tile_of(x, eps);
        const auto it = tile_holes.find(n);
        if (it == tile_holes.end()) return {nullptr, nullptr};
        return {holes.data() + it->second.first, holes.data() + it->second.second};
    }
};

/// Builds the perforated domain at scale eps with guard constant C.
/// Rejects cell/guard-ball violations, overlapping patterns and radii past
/// the guard radius. Tiles are enumerated inside omega's bounding box.
inline PerforatedDomain instantiate_holes(std::vector<HoleFamily> families,
                                          const TilingSpec& tiling, Region omega, double eps,
                                          double guard_c) {
    if (!(eps > 0)) throw GeometryError("instantiate_holes: eps must be positive");
    if (!(guard_c > 0)) throw GeometryError("instantiate_holes: guard constant must be positive");
    std::vector<std::string> violations;
    for (const auto& fam : families) validate_family_pattern(fam, tiling, guard_c, violations);
    if (!violations.empty()) {
        std::string msg = "instantiate_holes: invalid hole family configuration:";
        for (const auto& v : violations) msg += "\n  - " + v;
        throw GeometryError(msg);
    }

    PerforatedDomain dom;
    dom.omega = std::move(omega);
    dom.tiling = tiling;
    dom.families = std::move(families);
    dom.eps = eps;
    dom.guard_c = guard_c;
    const BoxShape window = dom.omega.bounding_box();
    const int d = tiling.dim;

    for (std::size_t k = 0; k < dom.families.size(); ++k) {
        const HoleFamily& fam = dom.families[k];
        const double a = critical_radius(fam.density, eps, d);
        if (fam.density > 0 && !(a < guard_c * eps))
            throw GeometryError("instantiate_holes: critical radius " + std::to_string(a) +
                                " reaches the guard radius " + std::to_string(guard_c * eps) +
                                " for family " + std::to_string(k));
        dom.family_radius.push_back(a);
        const auto tiles = lambda_minus(fam.region, tiling, eps, window);
        std::vector<Point> centers;
        centers.reserve(tiles.size() * fam.pattern.size());
        for (const TileIndex& n : tiles) {
            const std::size_t begin = dom.holes.size();
            const std::size_t guard_begin = centers.size();
            for (const Point& p : fam.pattern) {
                Point c{0, 0, 0};
                for (int i = 0; i < d; ++i)
                    c[i] = eps * (static_cast<double>(n[i]) + p[i]) * tiling.cell_lengths[i];
                centers.push_back(c);
                if (fam.density > 0)
                    dom.holes.push_back(Hole{c, a, static_cast<int>(k), n});
            }
            auto [it, fresh] = dom.tile_guards.try_emplace(
                n, PerforatedDomain::GuardSpan{static_cast<int>(k), guard_begin, centers.size()});
            (void)it;
            if (!fresh) {
                // two families claim the same tile: their regions overlap
                throw GeometryError(
                    "instantiate_holes: tile claimed by two families; family regions must have "
                    "disjoint closures");
            }
            if (fam.density > 0)
                dom.tile_holes.emplace(n, std::make_pair(begin, dom.holes.size()));
        }
        dom.guard_centers.push_back(std::move(centers));
    }
    return dom;
}

}  // namespace perfhom
