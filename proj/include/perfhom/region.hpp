// Region algebra over null-boundary primitives (open balls, open axis boxes)
// closed under finite union, intersection, difference and complement. Every
// region built here has Lebesgue-null topological boundary, so containment
// and disjointness of axis boxes can be decided exactly up to null sets.
//
// Box queries are tri-state: Yes / No / Undecidable. The reduction rules are
// measure-exact (e.g. Q subset of A\B  iff  Q subset of A and |Q cap B| = 0);
// a query the algebra cannot decide is reported, never approximated.
#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "perfhom/common.hpp"

namespace perfhom {

enum class Tri { No, Yes, Maybe };

inline Tri tri_and(Tri a, Tri b) {
    if (a == Tri::No || b == Tri::No) return Tri::No;
    if (a == Tri::Yes && b == Tri::Yes) return Tri::Yes;
    return Tri::Maybe;
}

inline Tri tri_or(Tri a, Tri b) {
    if (a == Tri::Yes || b == Tri::Yes) return Tri::Yes;
    if (a == Tri::No && b == Tri::No) return Tri::No;
    return Tri::Maybe;
}

/// Closed axis-aligned box used as the query shape for tile predicates and
/// as the cell shape for subdivision quadrature.
struct BoxShape {
    Point lo{0, 0, 0};
    Point hi{0, 0, 0};
    int dim = 2;

    double volume() const {
        double v = 1.0;
        for (int i = 0; i < dim; ++i) v *= hi[i] - lo[i];
        return v;
    }
    Point center() const {
        Point c{0, 0, 0};
        for (int i = 0; i < dim; ++i) c[i] = 0.5 * (lo[i] + hi[i]);
        return c;
    }
    int widest_axis() const {
        int ax = 0;
        double w = hi[0] - lo[0];
        for (int i = 1; i < dim; ++i)
            if (hi[i] - lo[i] > w) w = hi[i] - lo[i], ax = i;
        return ax;
    }
    bool contains(const Point& p) const {
        for (int i = 0; i < dim; ++i)
            if (p[i] < lo[i] || p[i] > hi[i]) return false;
        return true;
    }
    /// Squared distance from p to the closed box.
    double dist2_to(const Point& p) const {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double d = std::max({lo[i] - p[i], 0.0, p[i] - hi[i]});
            s += d * d;
        }
        return s;
    }
    /// Squared distance from p to the farthest point of the box.
    double max_dist2_to(const Point& p) const {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double d = std::max(std::abs(p[i] - lo[i]), std::abs(p[i] - hi[i]));
            s += d * d;
        }
        return s;
    }
};

inline BoxShape intersect_boxes(const BoxShape& a, const BoxShape& b) {
    BoxShape r;
    r.dim = a.dim;
    for (int i = 0; i < a.dim; ++i) {
        r.lo[i] = std::max(a.lo[i], b.lo[i]);
        r.hi[i] = std::min(a.hi[i], b.hi[i]);
        if (r.hi[i] < r.lo[i]) r.hi[i] = r.lo[i];  // empty, zero volume
    }
    return r;
}

inline BoxShape hull_boxes(const BoxShape& a, const BoxShape& b) {
    BoxShape r;
    r.dim = a.dim;
    for (int i = 0; i < a.dim; ++i) {
        r.lo[i] = std::min(a.lo[i], b.lo[i]);
        r.hi[i] = std::max(a.hi[i], b.hi[i]);
    }
    return r;
}

class Region {
  public:
    enum class Kind { Ball, Box, Union, Intersection, Difference, Complement };

    static Region ball(const Point& center, double radius, int dim) {
        require_dim(dim);
        if (!(radius > 0)) throw GeometryError("ball radius must be positive");
        Region r;
        r.kind_ = Kind::Ball;
        r.dim_ = dim;
        r.center_ = center;
        r.radius_ = radius;
        return r;
    }

    static Region box(const Point& lo, const Point& hi, int dim) {
        require_dim(dim);
        for (int i = 0; i < dim; ++i)
            if (!(lo[i] < hi[i])) throw GeometryError("box must have positive extent on every axis");
        Region r;
        r.kind_ = Kind::Box;
        r.dim_ = dim;
        r.lo_ = lo;
        r.hi_ = hi;
        return r;
    }

    static Region union_of(std::vector<Region> parts) {
        return combine(Kind::Union, std::move(parts));
    }
    static Region intersection_of(std::vector<Region> parts) {
        return combine(Kind::Intersection, std::move(parts));
    }
    static Region difference(Region a, Region b) {
        std::vector<Region> parts;
        parts.push_back(std::move(a));
        parts.push_back(std::move(b));
        return combine(Kind::Difference, std::move(parts));
    }
    static Region complement(Region a) {
        std::vector<Region> parts;
        parts.push_back(std::move(a));
        return combine(Kind::Complement, std::move(parts));
    }

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    const Point& ball_center() const { return center_; }
    double ball_radius() const { return radius_; }
    const std::vector<Region>& children() const { return children_; }

    /// Interior membership. Exact for primitives; for combinations it uses
    /// int(A cap B) = int A cap int B and the sound inclusion for unions, so
    /// it may classify a shared-boundary point as non-interior. Consistent
    /// with contains_closure and boundary_gap away from boundaries.
    bool contains_interior(const Point& p) const {
        switch (kind_) {
            case Kind::Ball:
                return dist2(p, center_, dim_) < radius_ * radius_;
            case Kind::Box:
                for (int i = 0; i < dim_; ++i)
                    if (!(lo_[i] < p[i] && p[i] < hi_[i])) return false;
                return true;
            case Kind::Union:
                for (const auto& c : children_)
                    if (c.contains_interior(p)) return true;
                return false;
            case Kind::Intersection:
                for (const auto& c : children_)
                    if (!c.contains_interior(p)) return false;
                return true;
            case Kind::Difference:
                return children_[0].contains_interior(p) && !children_[1].contains_closure(p);
            case Kind::Complement:
                return !children_[0].contains_closure(p);
        }
        return false;
    }

    bool contains_closure(const Point& p) const {
        switch (kind_) {
            case Kind::Ball:
                return dist2(p, center_, dim_) <= radius_ * radius_;
            case Kind::Box:
                for (int i = 0; i < dim_; ++i)
                    if (!(lo_[i] <= p[i] && p[i] <= hi_[i])) return false;
                return true;
            case Kind::Union:
                for (const auto& c : children_)
                    if (c.contains_closure(p)) return true;
                return false;
            case Kind::Intersection:
                for (const auto& c : children_)
                    if (!c.contains_closure(p)) return false;
                return true;
            case Kind::Difference:
                return children_[0].contains_closure(p) && !children_[1].contains_interior(p);
            case Kind::Complement:
                return !children_[0].contains_interior(p);
        }
        return false;
    }

    /// Lower bound for the distance from p to the topological boundary.
    /// A point with a positive bound is decisively interior or exterior.
    double boundary_gap(const Point& p) const {
        switch (kind_) {
            case Kind::Ball:
                return std::abs(radius_ - dist(p, center_, dim_));
            case Kind::Box: {
                BoxShape b{lo_, hi_, dim_};
                if (b.contains(p)) {
                    double g = std::numeric_limits<double>::infinity();
                    for (int i = 0; i < dim_; ++i)
                        g = std::min({g, p[i] - lo_[i], hi_[i] - p[i]});
                    return g;
                }
                return std::sqrt(b.dist2_to(p));
            }
            default: {
                double g = std::numeric_limits<double>::infinity();
                for (const auto& c : children_) g = std::min(g, c.boundary_gap(p));
                return g;
            }
        }
    }

    /// Tri-state: is |Q \ E| = 0 (the closed box covered up to a null set)?
    Tri covers_box(const BoxShape& q) const {
        switch (kind_) {
            case Kind::Ball: {
                const double m = q.max_dist2_to(center_);
                return m <= radius_ * radius_ ? Tri::Yes : Tri::No;
            }
            case Kind::Box: {
                for (int i = 0; i < dim_; ++i)
                    if (!(lo_[i] <= q.lo[i] && q.hi[i] <= hi_[i])) return Tri::No;
                return Tri::Yes;
            }
            case Kind::Union: {
                std::vector<const Region*> live;
                for (const auto& c : children_) {
                    if (c.covers_box(q) == Tri::Yes) return Tri::Yes;
                    switch (c.avoids_box(q)) {
                        case Tri::Yes: break;  // contributes nothing over q
                        case Tri::No: live.push_back(&c); break;
                        case Tri::Maybe: return Tri::Maybe;
                    }
                }
                if (live.empty()) return Tri::No;
                if (live.size() == 1) return live[0]->covers_box(q);
                return Tri::Maybe;  // q may be covered jointly; not decidable here
            }
            case Kind::Intersection: {
                Tri t = Tri::Yes;
                for (const auto& c : children_) t = tri_and(t, c.covers_box(q));
                return t;
            }
            case Kind::Difference:
                return tri_and(children_[0].covers_box(q), children_[1].avoids_box(q));
            case Kind::Complement:
                return children_[0].avoids_box(q);
        }
        return Tri::Maybe;
    }

    /// Tri-state: is |Q cap E| = 0?
    Tri avoids_box(const BoxShape& q) const {
        switch (kind_) {
            case Kind::Ball:
                return q.dist2_to(center_) >= radius_ * radius_ ? Tri::Yes : Tri::No;
            case Kind::Box: {
                for (int i = 0; i < dim_; ++i)
                    if (q.hi[i] <= lo_[i] || hi_[i] <= q.lo[i]) return Tri::Yes;
                return Tri::No;
            }
            case Kind::Union: {
                Tri t = Tri::Yes;
                for (const auto& c : children_) t = tri_and(t, c.avoids_box(q));
                return t;
            }
            case Kind::Intersection: {
                // Children covering q are transparent over q; if one child
                // remains, its answer is exact.
                std::vector<const Region*> live;
                for (const auto& c : children_) {
                    switch (c.avoids_box(q)) {
                        case Tri::Yes: return Tri::Yes;
                        default: break;
                    }
                    if (c.covers_box(q) != Tri::Yes) live.push_back(&c);
                }
                if (live.empty()) return Tri::No;  // q inside every child
                if (live.size() == 1) return live[0]->avoids_box(q);
                return Tri::Maybe;
            }
            case Kind::Difference: {
                const Region& a = children_[0];
                const Region& b = children_[1];
                if (a.avoids_box(q) == Tri::Yes) return Tri::Yes;
                if (b.covers_box(q) == Tri::Yes) return Tri::Yes;
                if (a.covers_box(q) == Tri::Yes) return b.covers_box(q);
                if (b.avoids_box(q) == Tri::Yes) return a.avoids_box(q);
                return Tri::Maybe;
            }
            case Kind::Complement:
                return children_[0].covers_box(q);
        }
        return Tri::Maybe;
    }

    bool bounded() const {
        switch (kind_) {
            case Kind::Ball:
            case Kind::Box:
                return true;
            case Kind::Union:
                return std::all_of(children_.begin(), children_.end(),
                                   [](const Region& c) { return c.bounded(); });
            case Kind::Intersection:
                return std::any_of(children_.begin(), children_.end(),
                                   [](const Region& c) { return c.bounded(); });
            case Kind::Difference:
                return children_[0].bounded();
            case Kind::Complement:
                return false;
        }
        return false;
    }

    /// Axis-aligned bounding box (a superset). Throws for unbounded regions.
    BoxShape bounding_box() const {
        switch (kind_) {
            case Kind::Ball: {
                BoxShape b;
                b.dim = dim_;
                for (int i = 0; i < dim_; ++i) {
                    b.lo[i] = center_[i] - radius_;
                    b.hi[i] = center_[i] + radius_;
                }
                return b;
            }
            case Kind::Box:
                return BoxShape{lo_, hi_, dim_};
            case Kind::Union: {
                BoxShape b = children_[0].bounding_box();
                for (std::size_t i = 1; i < children_.size(); ++i)
                    b = hull_boxes(b, children_[i].bounding_box());
                return b;
            }
            case Kind::Intersection: {
                std::optional<BoxShape> b;
                for (const auto& c : children_)
                    if (c.bounded()) {
                        const BoxShape cb = c.bounding_box();
                        b = b ? intersect_boxes(*b, cb) : cb;
                    }
                if (!b) throw UnsupportedRegionError("bounding_box of unbounded intersection");
                return *b;
            }
            case Kind::Difference:
                return children_[0].bounding_box();
            case Kind::Complement:
                throw UnsupportedRegionError("bounding_box of complement region");
        }
        throw UnsupportedRegionError("bounding_box: unknown region kind");
    }

    /// Exact measure for isolated primitives, nullopt otherwise.
    std::optional<double> primitive_measure() const {
        switch (kind_) {
            case Kind::Ball:
                return unit_ball_volume(dim_) * std::pow(radius_, dim_);
            case Kind::Box: {
                double v = 1.0;
                for (int i = 0; i < dim_; ++i) v *= hi_[i] - lo_[i];
                return v;
            }
            default:
                return std::nullopt;
        }
    }

  private:
    static Region combine(Kind k, std::vector<Region> parts) {
        if (parts.empty()) throw GeometryError("region combination needs at least one operand");
        if (k == Kind::Difference && parts.size() != 2)
            throw GeometryError("difference takes exactly two operands");
        if (k == Kind::Complement && parts.size() != 1)
            throw GeometryError("complement takes exactly one operand");
        const int d = parts[0].dim_;
        for (const auto& p : parts)
            if (p.dim_ != d) throw GeometryError("region operands must share a dimension");
        Region r;
        r.kind_ = k;
        r.dim_ = d;
        r.children_ = std::move(parts);
        return r;
    }

    Kind kind_ = Kind::Box;
    int dim_ = 2;
    Point center_{0, 0, 0};
    double radius_ = 0.0;
    Point lo_{0, 0, 0};
    Point hi_{0, 0, 0};
    std::vector<Region> children_;
};

/// |E| to absolute accuracy tol. Isolated primitives use closed forms;
/// combinations use breadth-first cell subdivision where fully-inside /
/// fully-outside cells are classified exactly and only straddling cells are
/// split. Fails (throws) if the cell budget is exhausted before reaching tol.
inline double region_measure(const Region& e, double tol, std::size_t max_cells = 30'000'000) {
    if (!(tol > 0)) throw Error("region_measure: tol must be positive");
    if (auto m = e.primitive_measure()) return *m;
    if (!e.bounded()) throw UnsupportedRegionError("region_measure: region must be bounded");

    std::vector<BoxShape> pending{e.bounding_box()};
    double inside = 0.0;
    std::size_t processed = 0;
    while (!pending.empty()) {
        double unresolved = 0.0;
        for (const auto& c : pending) unresolved += c.volume();
        if (unresolved <= 2.0 * tol) {
            return inside + 0.5 * unresolved;
        }
        std::vector<BoxShape> next;
        next.reserve(pending.size() * 2);
        for (const auto& cell : pending) {
            processed++;
            if (processed > max_cells)
                throw QuadratureError("region_measure: subdivision budget exhausted before tol");
            switch (e.covers_box(cell)) {
                case Tri::Yes:
                    inside += cell.volume();
                    continue;
                case Tri::No:
                case Tri::Maybe:
                    break;
            }
            if (e.avoids_box(cell) == Tri::Yes) continue;
            const int ax = cell.widest_axis();
            const double mid = 0.5 * (cell.lo[ax] + cell.hi[ax]);
            BoxShape a = cell, b = cell;
            a.hi[ax] = mid;
            b.lo[ax] = mid;
            next.push_back(a);
            next.push_back(b);
        }
        pending = std::move(next);
    }
    return inside;
}

}  // namespace perfhom
