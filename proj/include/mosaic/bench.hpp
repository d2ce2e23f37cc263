#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mosaic/baselines.hpp"
#include "mosaic/planner.hpp"
#include "mosaic/scenario_io.hpp"
#include "mosaic/scenarios.hpp"

namespace mosaic {

enum class PlannerKind { mosaic, options, cem, roadmap, inc_roadmap };

inline constexpr std::array<PlannerKind, 5> kAllPlanners{PlannerKind::mosaic, PlannerKind::options, PlannerKind::cem,
                                                         PlannerKind::roadmap, PlannerKind::inc_roadmap};

[[nodiscard]] constexpr std::string_view to_string(PlannerKind k) noexcept {
    switch (k) {
        case PlannerKind::mosaic: return "mosaic";
        case PlannerKind::options: return "options";
        case PlannerKind::cem: return "cem";
        case PlannerKind::roadmap: return "roadmap";
        case PlannerKind::inc_roadmap: return "inc-roadmap";
    }
    return "?";
}

[[nodiscard]] inline PlannerKind parse_planner(std::string_view s) {
    for (PlannerKind k : kAllPlanners)
        if (to_string(k) == s) return k;
    throw InputError("unknown planner '" + std::string(s) + "'");
}

/// Every tunable of every planner; the seed fields inside are overwritten per run.
struct PlannerSettings {
    PlanBudget budget{10000, 60.0};
    OracleConfig oracle;
    OptionsConfig options;
    CemConfig cem;
    RoadmapConfig roadmap;
    std::optional<SkillConfig> skills;  // family default when absent
};

/// Skill set of a family: rearrange only matters when a second movable object exists.
[[nodiscard]] inline SkillConfig default_skill_config(Family f) {
    SkillConfig c;
    c.enabled = {SkillName::pick, SkillName::push, SkillName::transport};
    if (f == Family::movables) c.enabled.push_back(SkillName::rearrange);
    return c;
}

[[nodiscard]] inline PlanResult run_planner(PlannerKind kind, const Scenario& sc, const SkillLibrary& lib,
                                            const PlannerSettings& s, std::uint64_t seed) {
    switch (kind) {
        case PlannerKind::mosaic: {
            OracleConfig c = s.oracle;
            c.seed = seed;
            return plan_mosaic(sc, lib, c, s.budget);
        }
        case PlannerKind::options: {
            OptionsConfig c = s.options;
            c.seed = seed;
            return skills_as_options_plan(sc, lib, c, s.budget);
        }
        case PlannerKind::cem: {
            CemConfig c = s.cem;
            c.seed = seed;
            return cem_plan(sc, lib, c, s.budget);
        }
        case PlannerKind::roadmap: {
            RoadmapConfig c = s.roadmap;
            c.seed = seed;
            return roadmap_plan(sc, lib, c, s.budget);
        }
        case PlannerKind::inc_roadmap: {
            RoadmapConfig c = s.roadmap;
            c.seed = seed;
            return incremental_roadmap_plan(sc, lib, c, s.budget);
        }
    }
    throw InputError("unknown planner");
}

/// 64-bit FNV-1a.
[[nodiscard]] inline std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Canonical (seed-free) configuration document of one planner run.
[[nodiscard]] inline Json planner_config_json(PlannerKind kind, const PlannerSettings& s, const SkillConfig& skills) {
    Json j;
    j["planner"] = std::string(to_string(kind));
    j["budget"] = Json{{"max_iterations", s.budget.max_iterations},
                       {"time_limit_s", std::isfinite(s.budget.time_limit_s) ? Json(s.budget.time_limit_s) : Json("inf")}};
    j["skills"] = skill_config_json(skills);
    switch (kind) {
        case PlannerKind::mosaic: {
            Json o = oracle_config_json(s.oracle);
            o.erase("seed");
            j["oracle"] = o;
            break;
        }
        case PlannerKind::options: j["options"] = Json{{"successors_per_skill", s.options.successors_per_skill}}; break;
        case PlannerKind::cem:
            j["cem"] = Json{{"population", s.cem.population},         {"elite_fraction", s.cem.elite_fraction},
                            {"horizon", s.cem.horizon},               {"max_outer_iterations", s.cem.max_outer_iterations},
                            {"smoothing", s.cem.smoothing},           {"init_distance_mean", s.cem.init_distance_mean},
                            {"init_distance_sd", s.cem.init_distance_sd}, {"init_angle_sd", s.cem.init_angle_sd},
                            {"min_sd", s.cem.min_sd},                 {"goal_bonus", s.cem.goal_bonus}};
            break;
        case PlannerKind::roadmap:
        case PlannerKind::inc_roadmap:
            j["roadmap"] = Json{{"roadmap_size", s.roadmap.roadmap_size}, {"k", s.roadmap.k}, {"gamma", s.roadmap.gamma}};
            break;
    }
    return j;
}

[[nodiscard]] inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Result of one (family, planner, seed) cell.
struct RunRecord {
    std::string scenario_id;
    std::string family;
    std::string planner;
    std::uint64_t seed{0};
    bool success{false};
    bool valid{false};                      // plan passed re-simulation
    std::optional<std::size_t> plan_length;  // present iff success
    double plan_cost{0};
    std::size_t iterations{0};
    std::uint64_t work{0};
    double planning_time_s{0};
    std::string config_hash;
    std::string status{"ok"};  // ok | crash
    std::string error;
};

struct CellRun {
    RunRecord record;
    PlanResult result;
    Scenario scenario;
};

/// Runs one cell; exceptions become a crash record rather than escaping.
[[nodiscard]] inline CellRun run_cell(std::string family_label, const Scenario& sc, const SkillConfig& skills,
                                      PlannerKind kind, std::uint64_t seed, const PlannerSettings& settings) {
    CellRun cell;
    RunRecord& r = cell.record;
    r.family = std::move(family_label);
    r.planner = std::string(to_string(kind));
    r.seed = seed;
    r.scenario_id = sc.id;
    cell.scenario = sc;
    r.config_hash = hex64(fnv1a(planner_config_json(kind, settings, skills).dump()));
    try {
        const SkillLibrary lib(cell.scenario, skills);
        cell.result = run_planner(kind, cell.scenario, lib, settings, seed);
        r.success = cell.result.success;
        r.iterations = cell.result.iterations;
        r.work = cell.result.work;
        r.planning_time_s = cell.result.wall_time_s;
        if (r.success) {
            r.plan_length = cell.result.plan->steps.size();
            r.plan_cost = cell.result.plan->total_cost;
            r.valid = validate_plan(cell.scenario, lib, *cell.result.plan).ok;
        }
    } catch (const std::exception& e) {
        r.status = "crash";
        r.error = e.what();
        r.success = false;
        r.plan_length.reset();
    }
    return cell;
}

[[nodiscard]] inline CellRun run_cell(Family family, PlannerKind kind, std::uint64_t seed,
                                      const PlannerSettings& settings) {
    return run_cell(std::string(to_string(family)), make_scenario(family, seed),
                    settings.skills.value_or(default_skill_config(family)), kind, seed, settings);
}

// ---------------------------------------------------------------- aggregation

struct Quantiles {
    double median{0}, q1{0}, q3{0}, iqr{0}, mean{0};
    std::size_t count{0};
};

/// Linear-interpolation quantiles (the common "type 7" definition).
[[nodiscard]] inline Quantiles quantiles(std::vector<double> v) {
    Quantiles q;
    q.count = v.size();
    if (v.empty()) return q;
    std::sort(v.begin(), v.end());
    const auto at = [&](double p) {
        const double h = (static_cast<double>(v.size()) - 1) * p;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    q.median = at(0.5);
    q.q1 = at(0.25);
    q.q3 = at(0.75);
    q.iqr = q.q3 - q.q1;
    double sum = 0;
    for (double x : v) sum += x;
    q.mean = sum / static_cast<double>(v.size());
    return q;
}

[[nodiscard]] inline Json quantiles_json(const Quantiles& q) {
    return Json{{"count", q.count}, {"median", q.median}, {"q1", q.q1}, {"q3", q.q3}, {"iqr", q.iqr}, {"mean", q.mean}};
}

struct CellSummary {
    std::string family;
    std::string planner;
    std::size_t runs{0};
    std::size_t successes{0};
    std::size_t crashes{0};
    double success_rate{0};
    double plan_length_mean{0};
    Quantiles iterations;  // over successful runs
    Quantiles work;
    Quantiles time;
};

struct PairStat {
    std::size_t common{0};
    double effort_ratio{1};
    double length_ratio{1};
    double time_ratio{1};
};

struct SuiteSummary {
    std::vector<CellSummary> cells;  // (family, planner) in input order
    // family -> row planner -> column planner
    std::map<std::string, std::map<std::string, std::map<std::string, PairStat>>> head_to_head;
    std::size_t crashes{0};
};

namespace bench_detail {

inline double ratio(double a, double b) {
    if (a == b) return 1.0;
    return b == 0 ? std::numeric_limits<double>::infinity() : a / b;
}

}  // namespace bench_detail

/// Aggregates raw records; the ordering of families and planners follows first appearance.
[[nodiscard]] inline SuiteSummary summarize(const std::vector<RunRecord>& records) {
    SuiteSummary s;
    std::vector<std::string> families;
    std::vector<std::string> planners;
    for (const auto& r : records) {
        if (std::find(families.begin(), families.end(), r.family) == families.end()) families.push_back(r.family);
        if (std::find(planners.begin(), planners.end(), r.planner) == planners.end()) planners.push_back(r.planner);
        if (r.status != "ok") ++s.crashes;
    }
    for (const auto& f : families) {
        for (const auto& p : planners) {
            CellSummary c;
            c.family = f;
            c.planner = p;
            std::vector<double> it, wk, tm;
            double len = 0;
            for (const auto& r : records) {
                if (r.family != f || r.planner != p) continue;
                ++c.runs;
                if (r.status != "ok") ++c.crashes;
                if (!r.success) continue;
                ++c.successes;
                len += static_cast<double>(r.plan_length.value_or(0));
                it.push_back(static_cast<double>(r.iterations));
                wk.push_back(static_cast<double>(r.work));
                tm.push_back(r.planning_time_s);
            }
            if (c.runs == 0) continue;
            c.success_rate = static_cast<double>(c.successes) / static_cast<double>(c.runs);
            c.plan_length_mean = c.successes ? len / static_cast<double>(c.successes) : 0.0;
            c.iterations = quantiles(it);
            c.work = quantiles(wk);
            c.time = quantiles(tm);
            s.cells.push_back(c);
        }
        // head-to-head on instances both planners solved
        for (const auto& a : planners) {
            for (const auto& b : planners) {
                PairStat ps;
                double ea = 0, eb = 0, la = 0, lb = 0, ta = 0, tb = 0;
                for (const auto& ra : records) {
                    if (ra.family != f || ra.planner != a || !ra.success) continue;
                    for (const auto& rb : records) {
                        if (rb.family != f || rb.planner != b || !rb.success || rb.seed != ra.seed) continue;
                        ++ps.common;
                        ea += static_cast<double>(ra.work);
                        eb += static_cast<double>(rb.work);
                        la += static_cast<double>(*ra.plan_length);
                        lb += static_cast<double>(*rb.plan_length);
                        ta += ra.planning_time_s;
                        tb += rb.planning_time_s;
                    }
                }
                ps.effort_ratio = bench_detail::ratio(ea, eb);
                ps.length_ratio = bench_detail::ratio(la, lb);
                ps.time_ratio = bench_detail::ratio(ta, tb);
                s.head_to_head[f][a][b] = ps;
            }
        }
    }
    return s;
}

// ---------------------------------------------------------------- serialization

inline constexpr const char* kRunsCsvHeader =
    "scenario,family,planner,seed,success,valid,plan_length,plan_cost,iterations,work,config_hash,status";

[[nodiscard]] inline std::string runs_csv(const std::vector<RunRecord>& records) {
    std::ostringstream o;
    o << kRunsCsvHeader << '\n';
    for (const auto& r : records) {
        char cost[32];
        std::snprintf(cost, sizeof cost, "%.6f", r.plan_cost);
        o << r.scenario_id << ',' << r.family << ',' << r.planner << ',' << r.seed << ',' << (r.success ? 1 : 0) << ','
          << (r.valid ? 1 : 0) << ',' << (r.plan_length ? std::to_string(*r.plan_length) : "") << ','
          << (r.success ? cost : "") << ',' << r.iterations << ',' << r.work << ',' << r.config_hash << ','
          << r.status << '\n';
    }
    return o.str();
}

[[nodiscard]] inline Json run_record_json(const RunRecord& r) {
    Json j{{"scenario", r.scenario_id}, {"family", r.family},         {"planner", r.planner},
           {"seed", r.seed},            {"success", r.success},       {"valid", r.valid},
           {"iterations", r.iterations}, {"work", r.work},            {"config_hash", r.config_hash},
           {"status", r.status}};
    j["plan_length"] = r.plan_length ? Json(*r.plan_length) : Json(nullptr);
    j["plan_cost"] = r.success ? Json(r.plan_cost) : Json(nullptr);
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

[[nodiscard]] inline std::string runs_json(const std::vector<RunRecord>& records) {
    Json arr = Json::array();
    for (const auto& r : records) arr.push_back(run_record_json(r));
    return arr.dump(2) + "\n";
}

[[nodiscard]] inline std::string timing_csv(const std::vector<RunRecord>& records) {
    std::ostringstream o;
    o << "scenario,family,planner,seed,planning_time_s\n";
    for (const auto& r : records) {
        char t[32];
        std::snprintf(t, sizeof t, "%.6f", r.planning_time_s);
        o << r.scenario_id << ',' << r.family << ',' << r.planner << ',' << r.seed << ',' << t << '\n';
    }
    return o.str();
}

/// Deterministic summary (no wall-clock fields).
[[nodiscard]] inline Json summary_json(const SuiteSummary& s) {
    Json cells = Json::array();
    for (const auto& c : s.cells)
        cells.push_back(Json{{"family", c.family},
                             {"planner", c.planner},
                             {"runs", c.runs},
                             {"successes", c.successes},
                             {"crashes", c.crashes},
                             {"success_rate", c.success_rate},
                             {"plan_length_mean", c.plan_length_mean},
                             {"iterations", quantiles_json(c.iterations)},
                             {"work", quantiles_json(c.work)}});
    Json h2h = Json::object();
    for (const auto& [f, rows] : s.head_to_head)
        for (const auto& [a, cols] : rows)
            for (const auto& [b, ps] : cols)
                h2h[f][a][b] = Json{{"common", ps.common}, {"effort_ratio", ps.effort_ratio},
                                    {"length_ratio", ps.length_ratio}};
    return Json{{"cells", cells}, {"head_to_head", h2h}, {"crashes", s.crashes}};
}

/// Wall-clock summary: planning-time quantiles and time ratios.
[[nodiscard]] inline Json timing_summary_json(const SuiteSummary& s) {
    Json cells = Json::array();
    for (const auto& c : s.cells)
        cells.push_back(Json{{"family", c.family}, {"planner", c.planner}, {"planning_time_s", quantiles_json(c.time)}});
    Json h2h = Json::object();
    for (const auto& [f, rows] : s.head_to_head)
        for (const auto& [a, cols] : rows)
            for (const auto& [b, ps] : cols)
                h2h[f][a][b] = Json{{"common", ps.common},
                                    {"time_ratio", std::isfinite(ps.time_ratio) ? Json(ps.time_ratio) : Json(nullptr)}};
    return Json{{"cells", cells}, {"head_to_head", h2h}};
}

// ---------------------------------------------------------------- suite

struct SuiteConfig {
    std::vector<Family> families{kAllFamilies.begin(), kAllFamilies.end()};
    std::vector<PlannerKind> planners{kAllPlanners.begin(), kAllPlanners.end()};
    std::vector<std::uint64_t> seeds;
    PlannerSettings settings;
    std::size_t workers{1};
};

/// Worker count from MOSAIC_WORKERS, else the hardware concurrency.
[[nodiscard]] inline std::size_t env_workers() {
    if (const char* v = std::getenv("MOSAIC_WORKERS")) {
        char* end = nullptr;
        const long n = std::strtol(v, &end, 10);
        if (end != v && *end == '\0' && n >= 1) return static_cast<std::size_t>(n);
        throw InputError("MOSAIC_WORKERS must be a positive integer");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Executes every (family, planner, seed) cell; results are in deterministic cell order
/// regardless of the worker count.
[[nodiscard]] inline std::vector<RunRecord> run_suite_records(const SuiteConfig& cfg) {
    if (cfg.planners.empty()) throw InputError("suite needs at least one planner");
    if (cfg.seeds.empty()) throw InputError("suite needs at least one seed");
    if (cfg.families.empty()) throw InputError("suite needs at least one family");
    struct Cell {
        Family family;
        PlannerKind planner;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (Family f : cfg.families)
        for (PlannerKind p : cfg.planners)
            for (std::uint64_t s : cfg.seeds) cells.push_back({f, p, s});
    std::vector<RunRecord> out(cells.size());
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            const Cell& c = cells[i];
            out[i] = run_cell(c.family, c.planner, c.seed, cfg.settings).record;
        }
    };
    const std::size_t n = std::min(std::max<std::size_t>(cfg.workers, 1), cells.size());
    if (n <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return out;
}

/// Runs the suite and writes runs.csv, runs.json, summary.json (all byte-stable for fixed inputs)
/// plus timing.csv and timing_summary.json into `out_dir`.
inline SuiteSummary run_suite(const SuiteConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) throw IoError("cannot create output directory '" + out_dir + "'");
    const std::string probe = (fs::path(out_dir) / "runs.csv").string();
    write_text_file(probe, "");  // fail before spending time when the directory is unwritable
    const auto records = run_suite_records(cfg);
    const SuiteSummary s = summarize(records);
    write_text_file(probe, runs_csv(records));
    write_text_file((fs::path(out_dir) / "runs.json").string(), runs_json(records));
    write_text_file((fs::path(out_dir) / "summary.json").string(), summary_json(s).dump(2) + "\n");
    write_text_file((fs::path(out_dir) / "timing.csv").string(), timing_csv(records));
    write_text_file((fs::path(out_dir) / "timing_summary.json").string(), timing_summary_json(s).dump(2) + "\n");
    return s;
}

}  // namespace mosaic
