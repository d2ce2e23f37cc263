#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "mosaic/errors.hpp"
#include "mosaic/oracle.hpp"
#include "mosaic/skills.hpp"
#include "mosaic/world.hpp"

namespace mosaic {

using Json = nlohmann::json;

/// A scenario plus the optional per-file overrides of skill and oracle defaults.
struct ScenarioFile {
    Scenario scenario;
    SkillConfig skills;
    OracleConfig oracle;
};

namespace io {

inline Json vec_json(Vec2 v) { return Json::array({v.x, v.y}); }
inline Json pose_json(const Pose2& p) { return Json::array({p.x, p.y, p.theta}); }
inline Json rect_json(const Rect& r) { return Json{{"min", vec_json(r.min)}, {"max", vec_json(r.max)}}; }

inline double num(const Json& j, const char* what) {
    if (!j.is_number()) throw InputError(std::string("expected a number for ") + what);
    return j.get<double>();
}

inline Vec2 vec_from(const Json& j, const char* what) {
    if (!j.is_array() || j.size() != 2) throw InputError(std::string("expected [x, y] for ") + what);
    return {num(j[0], what), num(j[1], what)};
}

inline Pose2 pose_from(const Json& j, const char* what) {
    if (!j.is_array() || j.size() != 3) throw InputError(std::string("expected [x, y, theta] for ") + what);
    return {num(j[0], what), num(j[1], what), num(j[2], what)};
}

inline Rect rect_from(const Json& j, const char* what) {
    if (!j.is_object() || !j.contains("min") || !j.contains("max"))
        throw InputError(std::string("expected {min, max} for ") + what);
    return {vec_from(j["min"], what), vec_from(j["max"], what)};
}

inline const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
    return j[key];
}

template <class T>
void opt(const Json& j, const char* key, T& out) {
    if (j.is_object() && j.contains(key)) {
        try {
            out = j[key].get<T>();
        } catch (const nlohmann::json::exception&) {
            throw InputError(std::string("bad value for '") + key + "'");
        }
    }
}

inline Json shape_json(const Shape& s) {
    if (const auto* d = std::get_if<Disc>(&s)) return Json{{"type", "disc"}, {"radius", d->radius}};
    Json verts = Json::array();
    for (const auto& v : std::get<Polygon>(s).vertices) verts.push_back(vec_json(v));
    return Json{{"type", "polygon"}, {"vertices", verts}};
}

inline Shape shape_from(const Json& j) {
    const std::string type = field(j, "type").get<std::string>();
    if (type == "disc") return Disc{num(field(j, "radius"), "radius")};
    if (type == "polygon") {
        Polygon p;
        for (const auto& v : field(j, "vertices")) p.vertices.push_back(vec_from(v, "vertex"));
        return p;
    }
    throw InputError("unknown shape type '" + type + "'");
}

}  // namespace io

[[nodiscard]] inline Json world_params_json(const WorldParams& w) {
    return Json{{"eps_pen", w.eps_pen},       {"f_sup", w.f_sup},     {"sigma_pos", w.sigma_pos},
                {"sigma_rot", w.sigma_rot},   {"w_theta", w.w_theta}, {"step", w.step},
                {"angle_step", w.angle_step}, {"max_push", w.max_push}};
}

[[nodiscard]] inline Json skill_config_json(const SkillConfig& c) {
    Json enabled = Json::array();
    for (SkillName n : c.enabled) enabled.push_back(std::string(to_string(n)));
    return Json{{"batch", c.batch},
                {"match_pos", c.match.pos},
                {"match_rot", c.match.rot},
                {"lambda", c.lambda},
                {"noise", c.noise},
                {"finger_depth", c.finger_depth},
                {"finger_half_width", c.finger_half_width},
                {"grasp_samples", c.grasp_samples},
                {"grasp_candidates", c.grasp_candidates},
                {"grasp_score_min", c.grasp_score_min},
                {"grasp_jitter", c.grasp_jitter},
                {"pregrasp_offset", c.pregrasp_offset},
                {"retract_distance", c.retract_distance},
                {"context_attempts", c.context_attempts},
                {"enabled", enabled}};
}

[[nodiscard]] inline Json oracle_config_json(const OracleConfig& c) {
    return Json{{"alpha", c.alpha}, {"p_lb", c.p_lb},   {"p_ub", c.p_ub},
                {"p_s", c.p_s},     {"p_g", c.p_g},     {"p_sg", c.p_sg},
                {"p_direct_goal", c.p_direct_goal},     {"gamma", c.gamma},
                {"noise", c.noise}, {"seed", c.seed}};
}

inline void apply_world_params(const Json& j, WorldParams& w) {
    io::opt(j, "eps_pen", w.eps_pen);
    io::opt(j, "f_sup", w.f_sup);
    io::opt(j, "sigma_pos", w.sigma_pos);
    io::opt(j, "sigma_rot", w.sigma_rot);
    io::opt(j, "w_theta", w.w_theta);
    io::opt(j, "step", w.step);
    io::opt(j, "angle_step", w.angle_step);
    io::opt(j, "max_push", w.max_push);
    if (!(w.eps_pen >= 0 && w.f_sup > 0 && w.f_sup <= 1 && w.sigma_pos >= 0 && w.sigma_rot >= 0 && w.w_theta >= 0 &&
          w.step > 0 && w.angle_step > 0 && w.max_push > 0))
        throw InputError("world parameters out of range");
}

inline void apply_skill_config(const Json& j, SkillConfig& c) {
    io::opt(j, "batch", c.batch);
    io::opt(j, "match_pos", c.match.pos);
    io::opt(j, "match_rot", c.match.rot);
    io::opt(j, "lambda", c.lambda);
    io::opt(j, "noise", c.noise);
    io::opt(j, "finger_depth", c.finger_depth);
    io::opt(j, "finger_half_width", c.finger_half_width);
    io::opt(j, "grasp_samples", c.grasp_samples);
    io::opt(j, "grasp_candidates", c.grasp_candidates);
    io::opt(j, "grasp_score_min", c.grasp_score_min);
    io::opt(j, "grasp_jitter", c.grasp_jitter);
    io::opt(j, "pregrasp_offset", c.pregrasp_offset);
    io::opt(j, "retract_distance", c.retract_distance);
    io::opt(j, "context_attempts", c.context_attempts);
    if (j.is_object() && j.contains("enabled")) {
        c.enabled.clear();
        for (const auto& n : j["enabled"]) c.enabled.push_back(parse_skill_name(n.get<std::string>()));
    }
    if (c.batch < 1) throw InputError("skills.batch must be >= 1");
    if (!(c.match.pos > 0 && c.match.rot > 0)) throw InputError("match tolerances must be positive");
    if (!(c.lambda >= 0)) throw InputError("skills.lambda must be >= 0");
    if (c.grasp_samples < 2 || c.grasp_candidates < 1) throw InputError("grasp sampling counts too small");
}

inline void apply_oracle_config(const Json& j, OracleConfig& c) {
    io::opt(j, "alpha", c.alpha);
    io::opt(j, "p_lb", c.p_lb);
    io::opt(j, "p_ub", c.p_ub);
    io::opt(j, "p_s", c.p_s);
    io::opt(j, "p_g", c.p_g);
    io::opt(j, "p_sg", c.p_sg);
    io::opt(j, "p_direct_goal", c.p_direct_goal);
    io::opt(j, "gamma", c.gamma);
    io::opt(j, "noise", c.noise);
    io::opt(j, "seed", c.seed);
    try {
        c.validate();
    } catch (const ParameterError& e) {
        throw InputError(e.what());
    }
}

[[nodiscard]] inline Json scenario_json(const Scenario& sc) {
    Json objs = Json::array();
    Json poses = Json::object();
    for (std::size_t i = 0; i < sc.objects.size(); ++i) {
        const ObjectSpec& o = sc.objects[i];
        objs.push_back(Json{{"id", o.id},
                            {"shape", io::shape_json(o.shape)},
                            {"graspable", o.graspable},
                            {"top_grasp", o.top_grasp},
                            {"mass", o.mass == MassClass::heavy ? "heavy" : "light"}});
        poses[o.id] = io::pose_json(sc.start.objects[i]);
    }
    Json obstacles = Json::array();
    for (const auto& p : sc.static_obstacles) {
        Json verts = Json::array();
        for (const auto& v : p.vertices) verts.push_back(io::vec_json(v));
        obstacles.push_back(verts);
    }
    Json start{{"gripper", io::pose_json(sc.start.gripper)}, {"objects", poses}};
    start["grip"] = sc.start.held ? Json(sc.objects[*sc.start.held].id) : Json(nullptr);
    return Json{{"id", sc.id},
                {"table", io::rect_json(sc.table)},
                {"bin", io::rect_json(sc.bin)},
                {"static_obstacles", obstacles},
                {"objects", objs},
                {"start", start},
                {"goal", Json{{"target", sc.objects[sc.goal.target].id}, {"region", io::rect_json(sc.goal.region)}}},
                {"robot", Json{{"base", io::vec_json(sc.robot.base)},
                               {"reach", sc.robot.reach},
                               {"gripper_radius", sc.robot.gripper_radius}}},
                {"world", world_params_json(sc.world)}};
}

[[nodiscard]] inline Json scenario_file_json(const ScenarioFile& f) {
    Json j = scenario_json(f.scenario);
    j["skills"] = skill_config_json(f.skills);
    j["oracle"] = oracle_config_json(f.oracle);
    return j;
}

/// Parses a scenario document; throws InputError on schema or invariant violations.
[[nodiscard]] inline ScenarioFile scenario_from_json(const Json& j) {
    ScenarioFile f;
    Scenario& sc = f.scenario;
    try {
        sc.id = j.value("id", std::string("scenario"));
        sc.table = io::rect_from(io::field(j, "table"), "table");
        sc.bin = io::rect_from(io::field(j, "bin"), "bin");
        if (j.contains("static_obstacles"))
            for (const auto& poly : j["static_obstacles"]) {
                Polygon p;
                for (const auto& v : poly) p.vertices.push_back(io::vec_from(v, "obstacle vertex"));
                sc.static_obstacles.push_back(std::move(p));
            }
        for (const auto& o : io::field(j, "objects")) {
            ObjectSpec spec;
            spec.id = io::field(o, "id").get<std::string>();
            spec.shape = io::shape_from(io::field(o, "shape"));
            io::opt(o, "graspable", spec.graspable);
            io::opt(o, "top_grasp", spec.top_grasp);
            const std::string mass = o.value("mass", std::string("light"));
            if (mass != "light" && mass != "heavy") throw InputError("mass must be light or heavy");
            spec.mass = mass == "heavy" ? MassClass::heavy : MassClass::light;
            sc.objects.push_back(std::move(spec));
        }
        const Json& start = io::field(j, "start");
        sc.start.gripper = io::pose_from(io::field(start, "gripper"), "start.gripper");
        const Json& poses = io::field(start, "objects");
        for (auto it = poses.begin(); it != poses.end(); ++it) (void)sc.object_index(it.key());
        for (const auto& o : sc.objects) {
            if (!poses.contains(o.id)) throw InputError("start state lacks a pose for '" + o.id + "'");
            sc.start.objects.push_back(io::pose_from(poses[o.id], "start pose"));
        }
        if (start.contains("grip") && !start["grip"].is_null())
            sc.start.held = sc.object_index(start["grip"].get<std::string>());
        const Json& goal = io::field(j, "goal");
        sc.goal.target = sc.object_index(io::field(goal, "target").get<std::string>());
        sc.goal.region = io::rect_from(io::field(goal, "region"), "goal.region");
        if (j.contains("robot")) {
            const Json& r = j["robot"];
            if (r.contains("base")) sc.robot.base = io::vec_from(r["base"], "robot.base");
            io::opt(r, "reach", sc.robot.reach);
            io::opt(r, "gripper_radius", sc.robot.gripper_radius);
        }
        if (j.contains("world")) apply_world_params(j["world"], sc.world);
        if (j.contains("skills")) apply_skill_config(j["skills"], f.skills);
        if (j.contains("oracle")) apply_oracle_config(j["oracle"], f.oracle);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("scenario schema: ") + e.what());
    } catch (const ParameterError& e) {
        throw InputError(e.what());
    }
    check_scenario(sc);
    if (!is_valid_state(sc, sc.start)) throw InputError("scenario start state is not valid");
    return f;
}

[[nodiscard]] inline ScenarioFile load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("scenario file is not valid JSON: " + std::string(e.what()));
    }
    return scenario_from_json(j);
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace mosaic
