#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "mosaic/errors.hpp"
#include "mosaic/rng.hpp"
#include "mosaic/skills.hpp"
#include "mosaic/world.hpp"

namespace mosaic {

enum class Family { transport, clutter, movables };

inline constexpr std::array<Family, 3> kAllFamilies{Family::transport, Family::clutter, Family::movables};

[[nodiscard]] constexpr std::string_view to_string(Family f) noexcept {
    switch (f) {
        case Family::transport: return "transport";
        case Family::clutter: return "clutter";
        case Family::movables: return "movables";
    }
    return "?";
}

[[nodiscard]] inline Family parse_family(std::string_view s) {
    for (Family f : kAllFamilies)
        if (to_string(f) == s) return f;
    throw InputError("unknown scenario family '" + std::string(s) + "'");
}

namespace layout {
inline constexpr double plate_radius = 0.1;
inline constexpr double can_radius = 0.035;
inline const Rect table{{-0.4, -0.3}, {0.4, 0.3}};
inline const Rect bin{{0.5, -0.15}, {0.8, 0.15}};
}  // namespace layout

[[nodiscard]] inline ObjectSpec make_plate() {
    return {"plate", Disc{layout::plate_radius}, true, false, MassClass::light};
}

[[nodiscard]] inline ObjectSpec make_can() {
    return {"can", Disc{layout::can_radius}, true, true, MassClass::light};
}

[[nodiscard]] inline Polygon square_obstacle(Vec2 c, double half, double theta) {
    Polygon p;
    for (const Vec2 v : {Vec2{-half, -half}, Vec2{half, -half}, Vec2{half, half}, Vec2{-half, half}})
        p.vertices.push_back(c + rotate(v, theta));
    return p;
}

/// No candidate approach heading admits a grasp of `obj` in the start state.
[[nodiscard]] inline bool grasp_infeasible_at_start(const Scenario& sc, std::size_t obj, int headings = 360) {
    const SkillConfig cfg;
    for (int j = 0; j < headings; ++j) {
        const double h = -std::numbers::pi + 2.0 * std::numbers::pi * j / headings;
        if (detail::plan_grasp(sc, cfg, obj, sc.start.objects[obj], h)) return false;
    }
    return true;
}

/// Discretized line search for a push corridor: some direction along which the object, with the
/// pusher behind it, slides from its start pose until it overhangs a table edge by `overhang`,
/// touching no static obstacle (and no other object when `movables_block` is set).
[[nodiscard]] inline bool corridor_exists(const Scenario& sc, std::size_t obj, bool movables_block = true,
                                          int directions = 72, double overhang = 0.03, double step = 0.005) {
    const ObjectSpec& spec = sc.objects[obj];
    const double r = bounding_radius(spec.shape);
    const Vec2 c0 = sc.start.objects[obj].position();
    const auto blocked = [&](Vec2 c, Vec2 dir) {
        const Pose2 pose(c, sc.start.objects[obj].theta);
        const Vec2 pusher = c - (r + sc.robot.gripper_radius) * dir;
        for (const auto& obs : sc.static_obstacles) {
            if (penetration(spec.shape, pose, Polygon{obs.vertices}, Pose2{}) > sc.world.eps_pen) return true;
            if (penetration_disc_polygon(pusher, sc.robot.gripper_radius, obs.vertices) > sc.world.eps_pen) return true;
        }
        if (!movables_block) return false;
        for (std::size_t j = 0; j < sc.objects.size(); ++j) {
            if (j == obj) continue;
            if (penetration(spec.shape, pose, sc.objects[j].shape, sc.start.objects[j]) > sc.world.eps_pen) return true;
            if (penetration(Disc{sc.robot.gripper_radius}, Pose2(pusher, 0), sc.objects[j].shape, sc.start.objects[j]) >
                sc.world.eps_pen)
                return true;
        }
        return false;
    };
    for (int k = 0; k < directions; ++k) {
        const Vec2 dir = unit_from_angle(2.0 * std::numbers::pi * k / directions);
        bool ok = true;
        for (double s = 0;; s += step) {
            const Vec2 c = c0 + s * dir;
            if (blocked(c, dir)) {
                ok = false;
                break;
            }
            const bool out_x = c.x + r * dir.x > sc.table.max.x + overhang || c.x + r * dir.x < sc.table.min.x - overhang;
            const bool out_y = c.y + r * dir.y > sc.table.max.y + overhang || c.y + r * dir.y < sc.table.min.y - overhang;
            if (out_x || out_y) break;
            if (!sc.table.contains(c)) {
                ok = false;
                break;
            }
        }
        if (ok) return true;
    }
    return false;
}

/// Distance from a point to the nearest table edge and the outward direction of that edge.
inline std::pair<double, Vec2> nearest_edge(const Rect& t, Vec2 c) {
    const std::array<std::pair<double, Vec2>, 4> options{{{c.x - t.min.x, {-1, 0}},
                                                          {t.max.x - c.x, {1, 0}},
                                                          {c.y - t.min.y, {0, -1}},
                                                          {t.max.y - c.y, {0, 1}}}};
    auto best = options[0];
    for (const auto& o : options)
        if (o.first < best.first) best = o;
    return best;
}

/// Deterministic scenario of a family; resamples internally until every verification passes.
[[nodiscard]] inline Scenario make_scenario(Family family, std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x5ce7 + static_cast<std::uint64_t>(family)));
    for (int attempt = 0; attempt < 10000; ++attempt) {
        Scenario sc;
        sc.id = std::string(to_string(family)) + "-" + std::to_string(seed);
        sc.table = layout::table;
        sc.bin = layout::bin;
        sc.objects.push_back(make_plate());
        sc.start.gripper = Pose2(0.0, -0.42, std::numbers::pi / 2);
        const Vec2 plate(uniform(rng, -0.2, 0.2), uniform(rng, -0.12, 0.12));
        sc.start.objects.push_back(Pose2(plate, 0.0));
        sc.goal = {0, sc.bin};

        if (family == Family::clutter) {
            const int n = 3 + static_cast<int>(uniform_index(rng, 3));
            for (int i = 0; i < n; ++i) {
                const double ang = uniform(rng, -std::numbers::pi, std::numbers::pi);
                const double dist = uniform(rng, layout::plate_radius + 0.05, layout::plate_radius + 0.12);
                const double half = uniform(rng, 0.02, 0.03);
                const Vec2 c = plate + dist * unit_from_angle(ang);
                sc.static_obstacles.push_back(square_obstacle(c, half, uniform(rng, 0.0, std::numbers::pi / 2)));
            }
        } else if (family == Family::movables) {
            sc.objects.push_back(make_can());
            Vec2 can;
            if (uniform(rng, 0.0, 1.0) < 0.5) {
                const auto [d, out] = nearest_edge(sc.table, plate);
                (void)d;
                const double gap = uniform(rng, 0.01, 0.04);
                can = plate + (layout::plate_radius + layout::can_radius + gap) * out;
            } else {
                can = {uniform(rng, sc.table.min.x + 0.05, sc.table.max.x - 0.05),
                       uniform(rng, sc.table.min.y + 0.05, sc.table.max.y - 0.05)};
            }
            sc.start.objects.push_back(Pose2(can, 0.0));
        }

        if (!is_valid_state(sc, sc.start)) continue;
        if (!grasp_infeasible_at_start(sc, 0)) continue;
        if (family == Family::clutter && !corridor_exists(sc, 0)) continue;
        check_scenario(sc);
        return sc;
    }
    throw InputError("scenario generation did not converge");
}

}  // namespace mosaic
