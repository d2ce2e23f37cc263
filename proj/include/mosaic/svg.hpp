#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "mosaic/snapshot.hpp"

namespace mosaic {

namespace svg_detail {

inline constexpr double kScale = 500.0;  // pixels per meter
inline constexpr double kMargin = 0.1;

struct Frame {
    double min_x, max_y;
    [[nodiscard]] double px(double x) const { return (x - min_x) * kScale; }
    [[nodiscard]] double py(double y) const { return (max_y - y) * kScale; }
};

inline std::string f2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string points(const Frame& fr, const std::vector<Vec2>& pts) {
    std::string out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) out += ' ';
        out += f2(fr.px(pts[i].x)) + "," + f2(fr.py(pts[i].y));
    }
    return out;
}

inline void rect(std::ostringstream& o, const Frame& fr, const Rect& r, const char* cls) {
    o << "<rect class=\"" << cls << "\" x=\"" << f2(fr.px(r.min.x)) << "\" y=\"" << f2(fr.py(r.max.y))
      << "\" width=\"" << f2(r.width() * kScale) << "\" height=\"" << f2(r.height() * kScale) << "\"/>\n";
}

/// Path of the entity that moves farthest along the trajectory (gripper when nothing else moves).
inline std::vector<Vec2> primary_path(const std::vector<WorldState>& states) {
    std::vector<Vec2> out;
    if (states.empty()) return out;
    const std::size_t n_obj = states.front().objects.size();
    std::size_t best = n_obj;  // n_obj denotes the gripper
    double best_len = 0;
    for (std::size_t i = 0; i < n_obj; ++i) {
        double len = 0;
        for (std::size_t k = 1; k < states.size(); ++k)
            len += norm(states[k].objects[i].position() - states[k - 1].objects[i].position());
        if (len > best_len + 1e-12) {
            best_len = len;
            best = i;
        }
    }
    for (const auto& s : states) out.push_back(best == n_obj ? s.gripper.position() : s.objects[best].position());
    return out;
}

inline constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                     "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace svg_detail

/// Renders scene geometry and the snapshot's trajectories. Every node (start and goal singletons
/// included) is drawn as a polyline with a circle marker at its end, connector edges as a polyline with a square marker at the
/// midpoint, and plan steps as polylines color-stepped by index.
[[nodiscard]] inline std::string render_svg(const Snapshot& snap) {
    using namespace svg_detail;
    const Scenario& sc = snap.scenario;
    Rect bounds = sc.table;
    const auto grow = [&](Vec2 p) {
        bounds.min.x = std::min(bounds.min.x, p.x);
        bounds.min.y = std::min(bounds.min.y, p.y);
        bounds.max.x = std::max(bounds.max.x, p.x);
        bounds.max.y = std::max(bounds.max.y, p.y);
    };
    grow(sc.bin.min);
    grow(sc.bin.max);
    grow(sc.start.gripper.position());
    bounds.min.x -= kMargin;
    bounds.min.y -= kMargin;
    bounds.max.x += kMargin;
    bounds.max.y += kMargin;
    const Frame fr{bounds.min.x, bounds.max.y};

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f2(bounds.width() * kScale) << "\" height=\""
      << f2(bounds.height() * kScale) << "\">\n"
      << "<style>.table{fill:#f3ead7;stroke:#8a7a5a}.bin{fill:#dde8f5;stroke:#4a6a8a}.goal{fill:none;stroke:#2a8a2a;"
         "stroke-dasharray:4 3}.obstacle{fill:#777}.object{fill:#c9a;fill-opacity:0.6;stroke:#834}"
         ".node-traj{fill:none;stroke:#1f77b4;stroke-width:1.5}.edge-traj{fill:none;stroke:#ff7f0e;"
         "stroke-width:1.5;stroke-dasharray:3 2}.node-marker{fill:#1f77b4}.edge-marker{fill:#ff7f0e}"
         ".plan-step{fill:none;stroke-width:2.5}</style>\n";
    rect(o, fr, sc.table, "table");
    rect(o, fr, sc.bin, "bin");
    rect(o, fr, sc.goal.region, "goal");
    for (const auto& poly : sc.static_obstacles)
        o << "<polygon class=\"obstacle\" points=\"" << points(fr, poly.vertices) << "\"/>\n";
    for (std::size_t i = 0; i < sc.objects.size(); ++i) {
        const Shape& sh = sc.objects[i].shape;
        const Pose2& p = sc.start.objects[i];
        const auto verts = std::holds_alternative<Disc>(sh) ? disc_outline(p.position(), std::get<Disc>(sh).radius)
                                                            : world_vertices(std::get<Polygon>(sh), p);
        o << "<polygon class=\"object\" points=\"" << points(fr, verts) << "\"/>\n";
    }
    for (const auto& n : snap.nodes) {
        const auto path = primary_path(n.states);
        o << "<polyline class=\"node-traj\" points=\"" << points(fr, path) << "\"/>\n";
        o << "<circle class=\"node-marker\" data-kind=\"" << n.kind << "\" cx=\"" << f2(fr.px(path.back().x)) << "\" cy=\"" << f2(fr.py(path.back().y))
          << "\" r=\"4\"/>\n";
    }
    for (const auto& e : snap.edges) {
        const auto path = primary_path(e.states);
        const Vec2 mid = path[path.size() / 2];
        o << "<polyline class=\"edge-traj\" points=\"" << points(fr, path) << "\"/>\n";
        o << "<rect class=\"edge-marker\" x=\"" << f2(fr.px(mid.x) - 3.5) << "\" y=\"" << f2(fr.py(mid.y) - 3.5)
          << "\" width=\"7\" height=\"7\"/>\n";
    }
    for (std::size_t i = 0; i < snap.steps.size(); ++i) {
        const auto path = primary_path(snap.steps[i].states);
        o << "<polyline class=\"plan-step\" data-step=\"" << i << "\" stroke=\"" << kPalette[i % kPalette.size()]
          << "\" points=\"" << points(fr, path) << "\"/>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace mosaic
