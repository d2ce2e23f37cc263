// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "graph_oracle.hpp"
#include "test_util.hpp"

using namespace mosaic;
using namespace mosaic::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass{false};
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 4) {
    std::ostringstream o;
    o.setf(std::ios::fixed);
    o.precision(digits);
    o << v;
    return o.str();
}

// 1. Oracle formula fidelity and sampled frequencies.
Outcome oracle_fidelity() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::ostringstream why;

    const SkillArm a{SkillName::pick, SkillRole::generate};
    const SkillArm b{SkillName::push, SkillRole::generate};
    SkillStats stats;
    for (int i = 0; i < 3; ++i) stats.record_result(a, true);
    // hand computation: N_a = 3 (all successes), N_b = 0, summed (t+1) = 5
    const double ua = 0.5 * 1.0 + 0.5 * std::sqrt(std::log(5.0 / 4.0));
    const double ub = 0.5 * std::sqrt(std::log(5.0));
    const double ua_lib = skill_utility(stats.get(a), 5.0, 0.5);
    const double ub_lib = skill_utility(stats.get(b), 5.0, 0.5);
    if (std::abs(ua - ua_lib) > 1e-9 || std::abs(ub - ub_lib) > 1e-9) {
        ok = false;
        why << " utility mismatch";
    }
    if (std::abs(ua - 0.736) > 5e-4 || std::abs(ub - 0.634) > 5e-4) {
        ok = false;
        why << " hand values off";
    }
    OracleConfig quiet;
    quiet.noise = false;
    Rng rng(7);
    if (choose_skill({b, a}, stats, quiet, rng) != a) {
        ok = false;
        why << " wrong argmax";
    }
    // a second hand example with mixed rates and alpha = 0.3
    SkillStats s2;
    for (int i = 0; i < 6; ++i) s2.record_result(a, i < 2);
    for (int i = 0; i < 2; ++i) s2.record_result(b, true);
    const double total = 7.0 + 3.0;
    const double ua2 = 0.3 * (2.0 / 6.0) + 0.7 * std::sqrt(std::log(total / 7.0));
    const double ub2 = 0.3 * 1.0 + 0.7 * std::sqrt(std::log(total / 3.0));
    if (std::abs(ua2 - skill_utility(s2.get(a), total, 0.3)) > 1e-9 ||
        std::abs(ub2 - skill_utility(s2.get(b), total, 0.3)) > 1e-9) {
        ok = false;
        why << " second utility mismatch";
    }
    OracleConfig quiet3 = quiet;
    quiet3.alpha = 0.3;
    if (choose_skill({a, b}, s2, quiet3, rng) != (ua2 > ub2 ? a : b)) {
        ok = false;
        why << " second argmax";
    }

    const int n = 100000;
    const OracleConfig def;
    double worst = 0;
    for (const auto& [nodes, edges] : std::vector<std::pair<std::size_t, std::size_t>>{{10, 0}, {10, 4}, {4, 7}, {3, 30}}) {
        // connectors only when T > clamp(E/N, p_lb, p_ub)
        const double expect =
            1.0 - std::clamp(static_cast<double>(edges) / static_cast<double>(nodes), def.p_lb, def.p_ub);
        Rng r(100 + nodes * 31 + edges);
        int hits = 0;
        for (int i = 0; i < n; ++i) hits += choose_skill_type(nodes, edges, def, r) == SkillTypeChoice::connectors_only;
        worst = std::max(worst, std::abs(hits / static_cast<double>(n) - expect));
    }
    const std::array<double, 4> mode_p{def.p_s, def.p_g - def.p_s, def.p_sg - def.p_g, 1.0 - def.p_sg};
    std::array<int, 4> counts{};
    Rng r(5);
    for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(selection_mode(uniform(r, 0.0, 1.0), def))];
    for (std::size_t k = 0; k < 4; ++k) worst = std::max(worst, std::abs(counts[k] / static_cast<double>(n) - mode_p[k]));
    if (worst > 0.01) {
        ok = false;
        why << " frequency deviation " << fmt(worst);
    }
    const double t = seconds_since(t0);
    if (t >= 5.0) {
        ok = false;
        why << " too slow";
    }
    return {ok, "U=" + fmt(ua, 3) + "/" + fmt(ub, 3) + ", max frequency deviation " + fmt(worst) + ", " + fmt(t, 2) +
                    " s" + why.str()};
}

// 2. Dijkstra against exhaustive enumeration.
Outcome graph_equivalence() {
    const auto t0 = Clock::now();
    std::mt19937_64 gen(777);
    int mismatches = 0;
    int with_path = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const RandomGraph rg = random_graph(gen, 8, 20);
        const double oracle = brute_force_min(rg);
        if (rg.graph.has_path(rg.goal) != std::isfinite(oracle)) {
            ++mismatches;
            continue;
        }
        if (!std::isfinite(oracle)) {
            try {
                (void)rg.graph.shortest_path(rg.goal);
                ++mismatches;
            } catch (const NotFoundError&) {
            }
            continue;
        }
        ++with_path;
        const GraphPath p = rg.graph.shortest_path(rg.goal);
        double recomputed = 0;
        if (!path_consistent(rg, p, recomputed) || std::abs(p.cost - oracle) > 1e-12 ||
            std::abs(recomputed - oracle) > 1e-12)
            ++mismatches;
    }
    const double t = seconds_since(t0);
    return {mismatches == 0 && t < 10.0, std::to_string(mismatches) + " mismatches over 1000 graphs (" +
                                             std::to_string(with_path) + " with a path), " + fmt(t, 2) + " s"};
}

// 3. Every returned MOSAIC plan re-validates by replay.
Outcome solution_validity(std::vector<Plan>& transport_plans) {
    const auto t0 = Clock::now();
    PlannerSettings s;
    s.budget = PlanBudget{10000, 60.0};
    int runs = 0;
    int returned = 0;
    int violations = 0;
    for (int i = 0; i < 1000; ++i) {
        const Family f = kAllFamilies[static_cast<std::size_t>(i % 3)];
        const std::uint64_t seed = static_cast<std::uint64_t>(i / 3);
        const CellRun c = run_cell(f, PlannerKind::mosaic, seed, s);
        ++runs;
        if (!c.result.success) continue;
        ++returned;
        const SkillLibrary lib(c.scenario, default_skill_config(f));
        const PlanValidation v = validate_plan(c.scenario, lib, *c.result.plan);
        if (!v.ok || !c.record.valid) {
            ++violations;
            std::cerr << "  violation " << c.scenario.id << ": " << v.message << '\n';
        }
        if (f == Family::transport) transport_plans.push_back(*c.result.plan);
    }
    return {violations == 0 && returned > 0, std::to_string(returned) + "/" + std::to_string(runs) +
                                                 " runs returned plans, " + std::to_string(violations) +
                                                 " violations, " + fmt(seconds_since(t0), 1) + " s"};
}

// 4. Transport success grows with the iteration cap.
Outcome completeness_smoke(std::vector<Plan>& transport_plans) {
    const auto t0 = Clock::now();
    std::vector<int> solved;
    for (std::size_t cap : {100u, 1000u, 10000u}) {
        PlannerSettings s;
        s.budget = PlanBudget{cap, std::numeric_limits<double>::infinity()};
        int n = 0;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const CellRun c = run_cell(Family::transport, PlannerKind::mosaic, seed, s);
            if (c.result.success) {
                ++n;
                transport_plans.push_back(*c.result.plan);
            }
        }
        solved.push_back(n);
    }
    const bool mono = solved[0] <= solved[1] && solved[1] <= solved[2];
    const double t = seconds_since(t0);
    return {mono && solved[2] == 50 && t < 600.0, "solved " + std::to_string(solved[0]) + " / " +
                                                      std::to_string(solved[1]) + " / " + std::to_string(solved[2]) +
                                                      " of 50 at caps 1e2/1e3/1e4, " + fmt(t, 1) + " s"};
}

// 5. MOSAIC against every baseline at equal budgets.
Outcome comparative_trend() {
    const auto t0 = Clock::now();
    SuiteConfig cfg;
    cfg.families = {kAllFamilies.begin(), kAllFamilies.end()};
    cfg.planners = {kAllPlanners.begin(), kAllPlanners.end()};
    for (std::uint64_t s = 0; s < 50; ++s) cfg.seeds.push_back(s);
    cfg.settings.budget = PlanBudget{10000, 60.0};
    cfg.workers = env_workers();
    const SuiteSummary sum = summarize(run_suite_records(cfg));
    std::map<std::string, std::map<std::string, double>> rate;
    for (const auto& c : sum.cells) rate[c.family][c.planner] = c.success_rate;
    bool ok = sum.crashes == 0;
    std::ostringstream detail;
    for (Family f : kAllFamilies) {
        const std::string fam(to_string(f));
        const double m = rate[fam]["mosaic"];
        detail << fam << ":";
        for (PlannerKind k : kAllPlanners) detail << ' ' << to_string(k) << '=' << fmt(rate[fam][std::string(to_string(k))], 2);
        detail << "; ";
        if (m < 0.9) ok = false;
        if (f == Family::transport) continue;
        for (PlannerKind k : kAllPlanners)
            if (rate[fam][std::string(to_string(k))] > m) ok = false;
    }
    detail << sum.crashes << " crashes, " << fmt(seconds_since(t0), 1) << " s";
    return {ok, detail.str()};
}

// 6. Transport plans push before the first pick.
Outcome plan_structure(const std::vector<Plan>& plans) {
    int good = 0;
    for (const Plan& p : plans) {
        std::optional<std::size_t> push;
        std::optional<std::size_t> pick;
        for (std::size_t i = 0; i < p.steps.size(); ++i) {
            if (p.steps[i].skill == SkillName::push && !push) push = i;
            if (p.steps[i].skill == SkillName::pick && !pick) pick = i;
        }
        if (push && pick && *push < *pick) ++good;
    }
    const int n = static_cast<int>(plans.size());
    return {n > 0 && good == n, std::to_string(good) + "/" + std::to_string(n) +
                                    " successful transport plans push before the first pick"};
}

// 7. Noisy 0.2 m pushes among clutter obstacles.
Outcome push_noise_regime() {
    const int n = 1000;
    int success = 0;
    int attempted = 0;
    int skipped = 0;
    double closest_sum = 0;
    for (int i = 0; attempted < n && i < 2 * n; ++i) {
        const Scenario sc = make_scenario(Family::clutter, static_cast<std::uint64_t>(i % 200));
        const SkillLibrary quiet(sc, quiet_config());
        const SkillLibrary noisy(sc);
        Rng rng(mix_seed(static_cast<std::uint64_t>(i), 0x7075));
        const Pose2 plate = sc.start.objects[0];
        // a direction whose noiseless push is feasible, so failures come from the noise alone
        std::optional<WorldState> target;
        for (int tries = 0; tries < 64 && !target; ++tries) {
            const Vec2 dir = unit_from_angle(uniform(rng, -std::numbers::pi, std::numbers::pi));
            const WorldState t = with_object(sc.start, 0, Pose2(plate.position() + 0.2 * dir, plate.theta));
            if (!is_valid_state(sc, t)) continue;
            const SkillParams p = push_params(0, dir, 0.2, 0);
            if (quiet.connector_rollout(SkillName::push, StateCondition{sc.start, {}}, StateCondition{t, {}}, p, 0).valid)
                target = t;
        }
        if (!target) {
            ++skipped;
            continue;
        }
        ++attempted;
        double closest = std::numeric_limits<double>::infinity();
        for (const Polygon& o : sc.static_obstacles)
            for (const Vec2& v : o.vertices) closest = std::min(closest, norm(v - plate.position()) - layout::plate_radius);
        closest_sum += closest;
        SkillParams p = push_params(0, {1, 0}, 0.2, static_cast<std::uint64_t>(i));
        const SimResult r =
            noisy.connector_rollout(SkillName::push, StateCondition{sc.start, {}}, StateCondition{*target, {}}, p, 0);
        success += r.valid ? 1 : 0;
    }
    const double rate = attempted ? success / static_cast<double>(attempted) : 0.0;
    return {attempted == n && rate >= 0.6 && rate <= 0.8,
            "success " + std::to_string(success) + "/" + std::to_string(attempted) + " = " + fmt(rate, 3) +
                ", mean obstacle clearance " + fmt(attempted ? closest_sum / attempted : 0.0, 3) + " m, " +
                std::to_string(skipped) + " scenes without a feasible direction skipped"};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 8. Suite outputs are byte-stable.
Outcome determinism() {
    namespace fs = std::filesystem;
    SuiteConfig cfg;
    cfg.families = {kAllFamilies.begin(), kAllFamilies.end()};
    cfg.planners = {kAllPlanners.begin(), kAllPlanners.end()};
    cfg.seeds = {0, 1, 2};
    cfg.settings.budget = PlanBudget{3000, std::numeric_limits<double>::infinity()};
    cfg.workers = env_workers();
    const fs::path a = fs::temp_directory_path() / "mosaic_acceptance_a";
    const fs::path b = fs::temp_directory_path() / "mosaic_acceptance_b";
    fs::remove_all(a);
    fs::remove_all(b);
    (void)run_suite(cfg, a.string());
    (void)run_suite(cfg, b.string());
    int differing = 0;
    std::size_t bytes = 0;
    for (const char* f : {"runs.csv", "runs.json", "summary.json"}) {
        const std::string x = slurp(a / f);
        bytes += x.size();
        if (x.empty() || x != slurp(b / f)) ++differing;
    }
    return {differing == 0, std::to_string(differing) + " differing files out of 3 (" + std::to_string(bytes) +
                                " bytes compared)"};
}

// 9. Screw interpolation endpoints and one-parameter subgroup composition.
Outcome screw_numerics() {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> xy(-2.0, 2.0);
    std::uniform_real_distribution<double> th(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto pose_err = [](const Pose2& p, const Pose2& q) {
        return std::max({std::abs(p.x - q.x), std::abs(p.y - q.y), std::abs(angle_diff(p.theta, q.theta))});
    };
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        const Pose2 a(xy(gen), xy(gen), th(gen));
        // every fourth pair is translation-only (identical headings)
        const Pose2 b(xy(gen), xy(gen), i % 4 == 0 ? a.theta : th(gen));
        worst = std::max(worst, pose_err(interpolate_screw(a, b, 0.0), a));
        worst = std::max(worst, pose_err(interpolate_screw(a, b, 1.0), b));
        const double s = unit(gen);
        const double t = unit(gen) * (1.0 - s);
        // exp((s+t) xi) = exp(s xi) exp(t xi) in the body frame of a
        const Twist2 xi = se2_log(relative(a, b));
        const Pose2 via = compose(interpolate_screw(a, b, s), se2_exp({t * xi.vx, t * xi.vy, t * xi.omega}));
        worst = std::max(worst, pose_err(via, interpolate_screw(a, b, s + t)));
        // left invariance h * interp(a, b, s) = interp(h a, h b, s)
        const Pose2 h(xy(gen), xy(gen), th(gen));
        worst = std::max(worst, pose_err(compose(h, interpolate_screw(a, b, s)),
                                         interpolate_screw(compose(h, a), compose(h, b), s)));
        if (i % 4 == 0) {
            // pure translation interpolates linearly
            const Pose2 lin(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y), a.theta);
            worst = std::max(worst, pose_err(interpolate_screw(a, b, s), lin));
        }
    }
    return {worst <= 1e-7, "max error " + [&] {
        std::ostringstream o;
        o << worst;
        return o.str();
    }() + " over 1000 pairs"};
}

}  // namespace

int main() {
    std::vector<Plan> transport_plans;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
        {"oracle formula fidelity", oracle_fidelity},
        {"graph search equals brute force", graph_equivalence},
        {"returned plans validate", [&] { return solution_validity(transport_plans); }},
        {"success nondecreasing in iteration cap", [&] { return completeness_smoke(transport_plans); }},
        {"MOSAIC at least as successful as baselines", comparative_trend},
        {"push precedes pick in transport plans", [&] { return plan_structure(transport_plans); }},
        {"push noise success regime", push_noise_regime},
        {"byte-identical suite outputs", determinism},
        {"screw interpolation numerics", screw_numerics},
    };
    int failures = 0;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        Outcome o;
        try {
            o = checks[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << checks[i].first << " -- "
                  << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
