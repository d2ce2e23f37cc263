#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "mosaic/errors.hpp"
#include "mosaic/pose.hpp"

namespace mosaic {

/// Closed axis-aligned rectangle.
struct Rect {
    Vec2 min;
    Vec2 max;

    [[nodiscard]] double width() const noexcept { return max.x - min.x; }
    [[nodiscard]] double height() const noexcept { return max.y - min.y; }
    [[nodiscard]] double area() const noexcept { return width() * height(); }
    [[nodiscard]] Vec2 center() const noexcept { return 0.5 * (min + max); }
    [[nodiscard]] bool contains(Vec2 p) const noexcept {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    }
    [[nodiscard]] bool intersects(const Rect& o) const noexcept {
        return min.x < o.max.x && o.min.x < max.x && min.y < o.max.y && o.min.y < max.y;
    }
    [[nodiscard]] std::vector<Vec2> corners() const {
        return {min, {max.x, min.y}, max, {min.x, max.y}};
    }
    /// Euclidean distance from p to the rectangle (0 inside).
    [[nodiscard]] double distance_to(Vec2 p) const noexcept {
        const double dx = std::max({min.x - p.x, 0.0, p.x - max.x});
        const double dy = std::max({min.y - p.y, 0.0, p.y - max.y});
        return std::hypot(dx, dy);
    }
};

struct Disc {
    double radius{0};
};

/// Convex polygon, body-frame vertices in counter-clockwise order.
struct Polygon {
    std::vector<Vec2> vertices;
};

using Shape = std::variant<Disc, Polygon>;

[[nodiscard]] inline double polygon_area(std::span<const Vec2> pts) noexcept {
    double a = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) a += cross(pts[i], pts[(i + 1) % pts.size()]);
    return 0.5 * a;
}

/// Throws InputError unless the polygon is convex, counter-clockwise, with >= 3 vertices.
inline void check_convex_ccw(std::span<const Vec2> pts) {
    if (pts.size() < 3) throw InputError("polygon needs at least 3 vertices");
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec2 a = pts[i];
        const Vec2 b = pts[(i + 1) % pts.size()];
        const Vec2 c = pts[(i + 2) % pts.size()];
        if (cross(b - a, c - b) <= 0) throw InputError("polygon is not strictly convex and counter-clockwise");
    }
}

inline void check_shape(const Shape& s) {
    if (const auto* d = std::get_if<Disc>(&s)) {
        if (!(d->radius > 0)) throw InputError("disc radius must be positive");
    } else {
        check_convex_ccw(std::get<Polygon>(s).vertices);
    }
}

[[nodiscard]] inline std::vector<Vec2> world_vertices(const Polygon& poly, const Pose2& pose) {
    std::vector<Vec2> out;
    out.reserve(poly.vertices.size());
    for (const Vec2& v : poly.vertices) out.push_back(pose.apply(v));
    return out;
}

/// Regular polygon approximation of a disc (used for rendering only).
[[nodiscard]] inline std::vector<Vec2> disc_outline(Vec2 c, double r, int n = 24) {
    std::vector<Vec2> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(c + r * unit_from_angle(2.0 * std::numbers::pi * i / n));
    return out;
}

/// Support value max_{p in shape} (p - center) . u for a unit direction u.
[[nodiscard]] inline double support_extent(const Shape& s, double theta, Vec2 u) {
    if (const auto* d = std::get_if<Disc>(&s)) return d->radius;
    double best = -std::numeric_limits<double>::infinity();
    for (const Vec2& v : std::get<Polygon>(s).vertices) best = std::max(best, dot(rotate(v, theta), u));
    return best;
}

/// Radius of the smallest origin-centered circle containing the shape.
[[nodiscard]] inline double bounding_radius(const Shape& s) {
    if (const auto* d = std::get_if<Disc>(&s)) return d->radius;
    double r = 0;
    for (const Vec2& v : std::get<Polygon>(s).vertices) r = std::max(r, norm(v));
    return r;
}

namespace detail {

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) noexcept {
    const Vec2 d = b - a;
    const double len2 = dot(d, d);
    double t = len2 > 0 ? dot(p - a, d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return norm(p - (a + t * d));
}

inline bool inside_convex(Vec2 p, std::span<const Vec2> pts) noexcept {
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (cross(pts[(i + 1) % pts.size()] - pts[i], p - pts[i]) < 0) return false;
    }
    return true;
}

inline double boundary_distance(Vec2 p, std::span<const Vec2> pts) noexcept {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i)
        best = std::min(best, point_segment_distance(p, pts[i], pts[(i + 1) % pts.size()]));
    return best;
}

inline void project(std::span<const Vec2> pts, Vec2 axis, double& lo, double& hi) noexcept {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (const Vec2& p : pts) {
        const double v = dot(p, axis);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
}

// Signed area of circle(0, r) intersected with triangle (0, a, b).
inline double circle_triangle_area(Vec2 a, Vec2 b, double r) noexcept {
    const auto sector = [r](Vec2 u, Vec2 v) { return 0.5 * r * r * std::atan2(cross(u, v), dot(u, v)); };
    const double r2 = r * r;
    const double da2 = dot(a, a);
    const double db2 = dot(b, b);
    if (da2 <= r2 && db2 <= r2) return 0.5 * cross(a, b);
    const Vec2 d = b - a;
    const double qa = dot(d, d);
    if (qa == 0) return 0.0;
    const double qb = dot(a, d);
    const double qc = da2 - r2;
    const double disc = qb * qb - qa * qc;
    if (disc <= 0) return sector(a, b);
    const double s = std::sqrt(disc);
    const double t1 = (-qb - s) / qa;
    const double t2 = (-qb + s) / qa;
    if (t2 <= 0 || t1 >= 1) return sector(a, b);
    const Vec2 p1 = a + std::max(t1, 0.0) * d;
    const Vec2 p2 = a + std::min(t2, 1.0) * d;
    double area = 0.5 * cross(p1, p2);
    if (t1 > 0) area += sector(a, p1);
    if (t2 < 1) area += sector(p2, b);
    return area;
}

inline std::vector<Vec2> clip_half_plane(const std::vector<Vec2>& in, Vec2 n, double offset) {
    // keeps points with dot(p, n) <= offset
    std::vector<Vec2> out;
    if (in.empty()) return out;
    for (std::size_t i = 0; i < in.size(); ++i) {
        const Vec2 p = in[i];
        const Vec2 q = in[(i + 1) % in.size()];
        const double dp = dot(p, n) - offset;
        const double dq = dot(q, n) - offset;
        if (dp <= 0) out.push_back(p);
        if ((dp < 0 && dq > 0) || (dp > 0 && dq < 0)) out.push_back(p + (dp / (dp - dq)) * (q - p));
    }
    return out;
}

}  // namespace detail

/// Area of the disc (c, r) that lies inside the rectangle.
[[nodiscard]] inline double disc_rect_overlap(Vec2 c, double r, const Rect& rect) {
    const auto corners = rect.corners();
    double area = 0;
    for (std::size_t i = 0; i < 4; ++i) area += detail::circle_triangle_area(corners[i] - c, corners[(i + 1) % 4] - c, r);
    return std::abs(area);
}

[[nodiscard]] inline double polygon_rect_overlap(std::vector<Vec2> pts, const Rect& rect) {
    pts = detail::clip_half_plane(pts, {1, 0}, rect.max.x);
    pts = detail::clip_half_plane(pts, {-1, 0}, -rect.min.x);
    pts = detail::clip_half_plane(pts, {0, 1}, rect.max.y);
    pts = detail::clip_half_plane(pts, {0, -1}, -rect.min.y);
    return pts.size() < 3 ? 0.0 : std::abs(polygon_area(pts));
}

[[nodiscard]] inline double shape_area(const Shape& s) {
    if (const auto* d = std::get_if<Disc>(&s)) return std::numbers::pi * d->radius * d->radius;
    return std::abs(polygon_area(std::get<Polygon>(s).vertices));
}

/// Fraction of the placed shape's footprint that lies on the rectangle.
[[nodiscard]] inline double footprint_fraction_in(const Shape& s, const Pose2& pose, const Rect& rect) {
    if (const auto* d = std::get_if<Disc>(&s)) {
        const Vec2 c = pose.position();
        if (c.x - d->radius >= rect.min.x && c.x + d->radius <= rect.max.x && c.y - d->radius >= rect.min.y &&
            c.y + d->radius <= rect.max.y)
            return 1.0;
        return disc_rect_overlap(c, d->radius, rect) / shape_area(s);
    }
    return polygon_rect_overlap(world_vertices(std::get<Polygon>(s), pose), rect) / shape_area(s);
}

[[nodiscard]] inline bool fully_inside(const Shape& s, const Pose2& pose, const Rect& rect) {
    if (const auto* d = std::get_if<Disc>(&s)) {
        const Vec2 c = pose.position();
        return c.x - d->radius >= rect.min.x && c.x + d->radius <= rect.max.x && c.y - d->radius >= rect.min.y &&
               c.y + d->radius <= rect.max.y;
    }
    const auto pts = world_vertices(std::get<Polygon>(s), pose);
    return std::all_of(pts.begin(), pts.end(), [&](Vec2 p) { return rect.contains(p); });
}

/// Penetration depth of a disc into a convex polygon (world coordinates); 0 when separated.
[[nodiscard]] inline double penetration_disc_polygon(Vec2 c, double r, std::span<const Vec2> pts) {
    const double d = detail::boundary_distance(c, pts);
    if (detail::inside_convex(c, pts)) return r + d;
    return std::max(0.0, r - d);
}

/// Minimum-translation overlap of two convex polygons (separating axis test); 0 when separated.
[[nodiscard]] inline double penetration_polygons(std::span<const Vec2> p, std::span<const Vec2> q) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto poly : {p, q}) {
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const Vec2 e = poly[(i + 1) % poly.size()] - poly[i];
            const double len = norm(e);
            if (len == 0) continue;
            const Vec2 axis = (1.0 / len) * Vec2{e.y, -e.x};
            double plo = 0, phi = 0, qlo = 0, qhi = 0;
            detail::project(p, axis, plo, phi);
            detail::project(q, axis, qlo, qhi);
            const double overlap = std::min(phi, qhi) - std::max(plo, qlo);
            if (overlap <= 0) return 0.0;
            best = std::min(best, overlap);
        }
    }
    return best;
}

/// Penetration depth between two placed shapes.
[[nodiscard]] inline double penetration(const Shape& a, const Pose2& pa, const Shape& b, const Pose2& pb) {
    const auto* da = std::get_if<Disc>(&a);
    const auto* db = std::get_if<Disc>(&b);
    if (da && db) return std::max(0.0, da->radius + db->radius - norm(pa.position() - pb.position()));
    if (da) return penetration_disc_polygon(pa.position(), da->radius, world_vertices(std::get<Polygon>(b), pb));
    if (db) return penetration_disc_polygon(pb.position(), db->radius, world_vertices(std::get<Polygon>(a), pa));
    return penetration_polygons(world_vertices(std::get<Polygon>(a), pa), world_vertices(std::get<Polygon>(b), pb));
}

struct BoundaryHit {
    Vec2 point;
    Vec2 normal;  // outward unit normal at the hit
    double distance{0};
};

/// First boundary crossing of the ray origin + t*u (t >= 0) entering the placed shape.
[[nodiscard]] inline std::optional<BoundaryHit> ray_entry(const Shape& s, const Pose2& pose, Vec2 origin, Vec2 u) {
    if (const auto* d = std::get_if<Disc>(&s)) {
        const Vec2 oc = origin - pose.position();
        const double b = dot(oc, u);
        const double c = dot(oc, oc) - d->radius * d->radius;
        const double disc = b * b - c;
        if (disc < 0) return std::nullopt;
        const double t = -b - std::sqrt(disc);
        if (t < 0) return std::nullopt;
        const Vec2 p = origin + t * u;
        return BoundaryHit{p, (1.0 / d->radius) * (p - pose.position()), t};
    }
    const auto pts = world_vertices(std::get<Polygon>(s), pose);
    std::optional<BoundaryHit> best;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec2 a = pts[i];
        const Vec2 e = pts[(i + 1) % pts.size()] - a;
        const Vec2 n = (1.0 / norm(e)) * Vec2{e.y, -e.x};
        const double denom = dot(u, n);
        if (denom >= 0) continue;  // only front faces
        const double den2 = cross(u, e);
        if (den2 == 0) continue;
        const double t = cross(a - origin, e) / den2;
        const double w = cross(a - origin, u) / den2;
        if (t < 0 || w < 0 || w > 1) continue;
        if (!best || t < best->distance) best = BoundaryHit{origin + t * u, n, t};
    }
    return best;
}

}  // namespace mosaic
