#pragma once

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "mosaic/errors.hpp"
#include "mosaic/graph.hpp"
#include "mosaic/planner.hpp"
#include "mosaic/scenario_io.hpp"

namespace mosaic {

// Line-oriented snapshot format:
//   mosaic-snapshot 1
//   scenario <compact scenario JSON>
//   node <id> <start|goal|node> <skill|-> <cost> <terminal>
//   edge <id> <from> <to> <skill> <cost> <terminal>
//   step <index> <generator|connector|conditioned> <skill> <cost> <terminal>
//   traj <sample>;<sample>;...          (belongs to the record above it)
// A state is "gx,gy,gt,held,o0x,o0y,o0t,..." with held = -1 when the gripper is open.

struct SnapshotRecord {
    std::size_t id{0};
    std::string kind;   // node: start|goal|node; step: step kind; edge: "edge"
    std::string skill;  // "-" when none
    double cost{0};
    std::size_t from{0};  // edges only
    std::size_t to{0};
    std::vector<WorldState> states;
};

struct Snapshot {
    Scenario scenario;
    std::vector<SnapshotRecord> nodes;
    std::vector<SnapshotRecord> edges;
    std::vector<SnapshotRecord> steps;
};

namespace snapshot_detail {

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s(buf);
    if (s == "-0.000000") s = "0.000000";
    return s;
}

inline std::string state_text(const WorldState& s) {
    std::string out = fmt(s.gripper.x) + "," + fmt(s.gripper.y) + "," + fmt(s.gripper.theta) + "," +
                      (s.held ? std::to_string(*s.held) : std::string("-1"));
    for (const auto& p : s.objects) out += "," + fmt(p.x) + "," + fmt(p.y) + "," + fmt(p.theta);
    return out;
}

inline std::string traj_line(const Trajectory& t) {
    std::string out = "traj ";
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) out += ';';
        out += state_text(t.samples()[i].state);
    }
    return out + "\n";
}

inline double parse_double(const std::string& tok, std::size_t line) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || end != tok.c_str() + tok.size())
        throw ParseError("snapshot line " + std::to_string(line) + ": bad number '" + tok + "'");
    return v;
}

inline std::size_t parse_index(const std::string& tok, std::size_t line) {
    const double v = parse_double(tok, line);
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
        throw ParseError("snapshot line " + std::to_string(line) + ": bad index '" + tok + "'");
    return static_cast<std::size_t>(v);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline WorldState parse_state(const std::string& text, std::size_t n_objects, std::size_t line) {
    const auto f = split(text, ',');
    if (f.size() != 4 + 3 * n_objects)
        throw ParseError("snapshot line " + std::to_string(line) + ": state has wrong field count");
    WorldState s;
    s.gripper = Pose2(parse_double(f[0], line), parse_double(f[1], line), parse_double(f[2], line));
    const double h = parse_double(f[3], line);
    if (h >= 0) s.held = static_cast<std::size_t>(h);
    for (std::size_t i = 0; i < n_objects; ++i)
        s.objects.push_back(Pose2(parse_double(f[4 + 3 * i], line), parse_double(f[5 + 3 * i], line),
                                  parse_double(f[6 + 3 * i], line)));
    return s;
}

inline std::string header(const Scenario& sc) {
    return "mosaic-snapshot 1\nscenario " + scenario_json(sc).dump() + "\n";
}

}  // namespace snapshot_detail

[[nodiscard]] inline std::string graph_snapshot(const Scenario& sc, const MosaicGraph& g) {
    using namespace snapshot_detail;
    std::ostringstream out;
    out << header(sc);
    for (const auto& n : g.nodes()) {
        const char* kind = n.goal_anchor ? "goal" : (n.skill ? "node" : "start");
        out << "node " << n.id << ' ' << kind << ' ' << (n.skill ? std::string(to_string(*n.skill)) : "-") << ' '
            << fmt(n.cost) << ' ' << state_text(n.terminal()) << '\n'
            << traj_line(n.trajectory);
    }
    for (const auto& e : g.edges()) {
        out << "edge " << e.id << ' ' << e.from << ' ' << e.to << ' ' << to_string(e.skill) << ' ' << fmt(e.cost)
            << ' ' << state_text(e.trajectory.back()) << '\n'
            << traj_line(e.trajectory);
    }
    return out.str();
}

[[nodiscard]] inline std::string plan_snapshot(const Scenario& sc, const Plan& plan) {
    using namespace snapshot_detail;
    std::ostringstream out;
    out << header(sc);
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const PlanStep& s = plan.steps[i];
        out << "step " << i << ' ' << to_string(s.kind) << ' ' << to_string(s.skill) << ' ' << fmt(s.cost) << ' '
            << state_text(s.trajectory.back()) << '\n'
            << traj_line(s.trajectory);
    }
    return out.str();
}

/// Parses either snapshot flavor; throws ParseError on malformed input.
[[nodiscard]] inline Snapshot parse_snapshot(const std::string& text) {
    using namespace snapshot_detail;
    Snapshot snap;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool have_scenario = false;
    SnapshotRecord* last = nullptr;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1) {
            if (line != "mosaic-snapshot 1") throw ParseError("not a snapshot (bad header)");
            continue;
        }
        const auto sp = line.find(' ');
        const std::string tag = line.substr(0, sp);
        const std::string rest = sp == std::string::npos ? "" : line.substr(sp + 1);
        if (tag == "scenario") {
            try {
                snap.scenario = scenario_from_json(Json::parse(rest)).scenario;
            } catch (const std::exception& e) {
                throw ParseError("snapshot scenario: " + std::string(e.what()));
            }
            have_scenario = true;
            continue;
        }
        if (!have_scenario) throw ParseError("snapshot line " + std::to_string(lineno) + ": record before scenario");
        const std::size_t n_obj = snap.scenario.objects.size();
        if (tag == "traj") {
            if (!last) throw ParseError("snapshot line " + std::to_string(lineno) + ": traj without record");
            for (const auto& s : split(rest, ';')) last->states.push_back(parse_state(s, n_obj, lineno));
            last = nullptr;
            continue;
        }
        const auto f = split(rest, ' ');
        SnapshotRecord r;
        if (tag == "node" || tag == "step") {
            if (f.size() != 5) throw ParseError("snapshot line " + std::to_string(lineno) + ": bad " + tag + " record");
            r.id = parse_index(f[0], lineno);
            r.kind = f[1];
            r.skill = f[2];
            r.cost = parse_double(f[3], lineno);
            (void)parse_state(f[4], n_obj, lineno);
            auto& dst = tag == "node" ? snap.nodes : snap.steps;
            dst.push_back(std::move(r));
            last = &dst.back();
        } else if (tag == "edge") {
            if (f.size() != 6) throw ParseError("snapshot line " + std::to_string(lineno) + ": bad edge record");
            r.id = parse_index(f[0], lineno);
            r.kind = "edge";
            r.from = parse_index(f[1], lineno);
            r.to = parse_index(f[2], lineno);
            r.skill = f[3];
            r.cost = parse_double(f[4], lineno);
            (void)parse_state(f[5], n_obj, lineno);
            snap.edges.push_back(std::move(r));
            last = &snap.edges.back();
        } else {
            throw ParseError("snapshot line " + std::to_string(lineno) + ": unknown record '" + tag + "'");
        }
    }
    if (!have_scenario) throw ParseError("snapshot has no scenario record");
    for (const auto* group : {&snap.nodes, &snap.edges, &snap.steps})
        for (const auto& r : *group)
            if (r.states.empty()) throw ParseError("snapshot record without trajectory");
    for (const auto& e : snap.edges)
        if (e.from >= snap.nodes.size() || e.to >= snap.nodes.size())
            throw ParseError("snapshot edge references a missing node");
    return snap;
}

}  // namespace mosaic
