#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mosaic/errors.hpp"
#include "mosaic/graph.hpp"
#include "mosaic/oracle.hpp"
#include "mosaic/skills.hpp"
#include "mosaic/world.hpp"

namespace mosaic {

struct PlanBudget {
    std::size_t max_iterations{10000};
    double time_limit_s{std::numeric_limits<double>::infinity()};

    void validate() const {
        if (!(time_limit_s > 0)) throw ParameterError("time limit must be positive");
    }
};

/// How a plan step was produced, which decides how it is replayed.
enum class StepKind {
    generator,    // self-proposed context; replays from params alone
    connector,    // two-point form; replays from the previous terminal state toward `to`
    conditioned,  // start-conditioned generator; replays from the previous terminal state
};

[[nodiscard]] inline std::string_view to_string(StepKind k) noexcept {
    switch (k) {
        case StepKind::generator: return "generator";
        case StepKind::connector: return "connector";
        case StepKind::conditioned: return "conditioned";
    }
    return "?";
}

struct PlanStep {
    StepKind kind{StepKind::generator};
    SkillName skill{SkillName::push};
    SkillParams params;
    std::size_t rollout{0};
    std::optional<Condition> to;  // connector steps only
    Trajectory trajectory;
    double cost{0};
};

struct Plan {
    std::vector<PlanStep> steps;
    double total_cost{0};
    std::size_t iterations{0};
    std::uint64_t work{0};
    double wall_time_s{0};
    std::shared_ptr<const MosaicGraph> graph;  // null for planners without a graph
};

struct PlanResult {
    bool success{false};
    std::optional<Plan> plan;
    std::string reason;  // failure cause
    std::size_t iterations{0};
    std::uint64_t work{0};  // simulated world states, a deterministic effort measure
    double wall_time_s{0};
    std::shared_ptr<const MosaicGraph> graph;
    SkillStats stats;
};

/// Counts skill invocations and simulated samples against a budget.
class BudgetTracker {
public:
    explicit BudgetTracker(PlanBudget b) : budget_(b), t0_(std::chrono::steady_clock::now()) { b.validate(); }

    [[nodiscard]] bool exhausted() const {
        return iterations_ >= budget_.max_iterations || elapsed() >= budget_.time_limit_s;
    }
    void charge(const SkillOutcome& out) {
        ++iterations_;
        for (const auto& t : out.trajectories) work_ += t.size();
    }
    void charge(const SimResult& r) {
        ++iterations_;
        work_ += r.trajectory.size();
    }
    [[nodiscard]] double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }
    [[nodiscard]] std::size_t iterations() const noexcept { return iterations_; }
    [[nodiscard]] std::uint64_t work() const noexcept { return work_; }
    [[nodiscard]] bool time_exceeded() const { return elapsed() >= budget_.time_limit_s; }

    void fill(PlanResult& r) const {
        r.iterations = iterations_;
        r.work = work_;
        r.wall_time_s = elapsed();
        if (r.plan) {
            r.plan->iterations = iterations_;
            r.plan->work = work_;
            r.plan->wall_time_s = r.wall_time_s;
        }
    }

private:
    PlanBudget budget_;
    std::chrono::steady_clock::time_point t0_;
    std::size_t iterations_{0};
    std::uint64_t work_{0};
};

[[nodiscard]] inline std::vector<SkillArm> generator_arms(const SkillLibrary& lib) {
    std::vector<SkillArm> out;
    for (SkillName n : kAllSkills)
        if (lib.has(n) && skill_id(n).can_generate) out.push_back({n, SkillRole::generate});
    return out;
}

[[nodiscard]] inline std::vector<SkillArm> connector_arms(const SkillLibrary& lib) {
    std::vector<SkillArm> out;
    for (SkillName n : kAllSkills)
        if (lib.has(n) && skill_id(n).can_connect) out.push_back({n, SkillRole::connect});
    return out;
}

/// Flattens a graph path into steps; the start node and goal anchors carry no motion.
[[nodiscard]] inline std::vector<PlanStep> flatten_path(const MosaicGraph& g, const GraphPath& path) {
    std::vector<PlanStep> steps;
    for (std::size_t i = 0; i < path.nodes.size(); ++i) {
        if (i > 0) {
            const MosaicEdge& e = g.edge(path.edges[i - 1]);
            steps.push_back({StepKind::connector, e.skill, e.params, e.rollout, e.cond1, e.trajectory, e.cost});
        }
        const MosaicNode& n = g.node(path.nodes[i]);
        if (n.skill && !n.goal_anchor)
            steps.push_back({StepKind::generator, *n.skill, *n.params, n.rollout, std::nullopt, n.trajectory, n.cost});
    }
    return steps;
}

/// MOSAIC: multi-directional search over a graph of generator trajectories stitched by connectors.
[[nodiscard]] inline PlanResult plan_mosaic(const Scenario& sc, const SkillLibrary& lib, const OracleConfig& ocfg,
                                            const PlanBudget& budget) {
    ocfg.validate();
    if (lib.skills().empty()) throw InputError("skill library is empty");
    check_scenario(sc);
    BudgetTracker bt(budget);
    Rng rng(mix_seed(ocfg.seed, 0x6d6f73));
    const double w = sc.world.w_theta;
    const double lambda = lib.config().lambda;
    const MatchTolerance tol = lib.config().match;
    auto graph = std::make_shared<MosaicGraph>(tol);
    PlanResult res;
    SkillStats& stats = res.stats;
    PairPenaltyTable penalties;
    const auto gens = generator_arms(lib);
    const auto conns = connector_arms(lib);
    std::vector<SkillArm> all = gens;
    all.insert(all.end(), conns.begin(), conns.end());
    std::sort(all.begin(), all.end());

    const auto run_generator = [&](const SkillArm& arm) {
        const SkillParams params = sample_parameters(arm.name, sc, rng);
        const SkillOutcome out = lib.invoke_generator(arm.name, params);
        bt.charge(out);
        stats.record_result(arm, out.any_valid());
        if (!out.any_valid()) return;
        MosaicNode n;
        n.skill = arm.name;
        n.params = params;
        n.rollout = *out.selected;
        n.trajectory = out.representative();
        n.cost = outcome_cost(out, lambda, w);
        graph->add_node(std::move(n));
    };

    // seed the graph with generator trajectories until at least one is valid
    bool have_node = false;
    while (!gens.empty() && !have_node && !bt.exhausted()) {
        for (const auto& arm : gens) {
            if (bt.exhausted()) break;
            run_generator(arm);
        }
        have_node = graph->node_count() > 0;
    }
    graph->add_start(sc.start);
    std::optional<NodeId> anchor;
    const auto eligible = [&](NodeId id) { return !graph->node(id).goal_anchor; };

    bool solved = graph->has_path(sc.goal);
    while (!solved && !bt.exhausted()) {
        const SkillTypeChoice type = choose_skill_type(graph->node_count(), graph->edge_count(), ocfg, rng);
        const SkillArm arm = choose_skill(type == SkillTypeChoice::connectors_only ? conns : all, stats, ocfg, rng);
        if (arm.role == SkillRole::generate) {
            run_generator(arm);
            continue;
        }
        const SkillParams params = sample_parameters(arm.name, sc, rng);
        const auto req = choose_conds_to_connect(*graph, sc.goal, ocfg, penalties, w, tol, rng, eligible);
        if (!req) {
            if (!gens.empty()) run_generator(choose_skill(gens, stats, ocfg, rng));
            else bt.charge(SkillOutcome{});
            continue;
        }
        const SkillOutcome out = lib.invoke_connector(arm.name, req->from, req->to, params);
        bt.charge(out);
        stats.record_result(arm, out.any_valid());
        if (!out.any_valid()) {
            record_pair_failure(penalties, req->from_node, req->to_node.value_or(kGoalTarget));
            continue;
        }
        MosaicEdge e;
        e.from = req->from_node;
        if (req->to_node) {
            e.to = *req->to_node;
        } else {
            if (!anchor) anchor = graph->add_goal_anchor(out.representative().back());
            e.to = *anchor;
        }
        e.skill = arm.name;
        e.params = params;
        e.rollout = *out.selected;
        e.cond0 = req->from;
        e.cond1 = req->to;
        e.trajectory = out.representative();
        e.cost = outcome_cost(out, lambda, w);
        graph->add_edge(std::move(e), &sc.goal);
        solved = graph->has_path(sc.goal);
    }

    res.graph = graph;
    if (solved) {
        const GraphPath path = graph->shortest_path(sc.goal);
        Plan p;
        p.steps = flatten_path(*graph, path);
        p.total_cost = path.cost;
        p.graph = graph;
        res.plan = std::move(p);
        res.success = true;
    } else {
        res.reason = bt.time_exceeded() ? "time budget exhausted" : "iteration budget exhausted";
    }
    bt.fill(res);
    return res;
}

enum class ViolationKind { none, start_mismatch, continuity, invalid_rollout, replay_mismatch, goal_unmet };

[[nodiscard]] inline std::string_view to_string(ViolationKind k) noexcept {
    switch (k) {
        case ViolationKind::none: return "none";
        case ViolationKind::start_mismatch: return "start-mismatch";
        case ViolationKind::continuity: return "continuity";
        case ViolationKind::invalid_rollout: return "invalid-rollout";
        case ViolationKind::replay_mismatch: return "replay-mismatch";
        case ViolationKind::goal_unmet: return "goal-unmet";
    }
    return "?";
}

struct PlanValidation {
    bool ok{true};
    ViolationKind kind{ViolationKind::none};
    std::optional<std::size_t> step;  // first offending step; none for the final goal check
    std::string message;

    explicit operator bool() const noexcept { return ok; }
};

/// Re-simulates every step from its stored seed and checks the chained boundary conditions:
/// the first step starts exactly at the scenario start, adjacent steps meet within the match
/// tolerance, and the final state satisfies the goal. Reports the first violation.
[[nodiscard]] inline PlanValidation validate_plan(const Scenario& sc, const SkillLibrary& lib, const Plan& plan) {
    const MatchTolerance tol = lib.config().match;
    const auto fail = [](ViolationKind k, std::optional<std::size_t> step, std::string msg) {
        return PlanValidation{false, k, step, std::move(msg)};
    };
    WorldState prev = sc.start;
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const PlanStep& st = plan.steps[i];
        SimResult r;
        try {
            switch (st.kind) {
                case StepKind::generator: r = lib.generator_rollout(st.skill, st.params, st.rollout); break;
                case StepKind::connector:
                    if (!st.to) return fail(ViolationKind::invalid_rollout, i, "connector step without target condition");
                    r = lib.connector_rollout(st.skill, StateCondition{prev, tol}, *st.to, st.params, st.rollout);
                    break;
                case StepKind::conditioned: r = lib.conditioned_rollout(st.skill, prev, st.params, st.rollout); break;
            }
        } catch (const std::exception& ex) {
            return fail(ViolationKind::invalid_rollout, i, std::string("replay raised: ") + ex.what());
        }
        const WorldState& first = r.trajectory.front();
        if (i == 0 && !(first == sc.start))
            return fail(ViolationKind::start_mismatch, i, "first step does not start at the start state");
        if (i > 0 && !states_match(prev, first, tol))
            return fail(ViolationKind::continuity, i, "step does not start where the previous one ended");
        if (!r.valid) return fail(ViolationKind::invalid_rollout, i, "re-simulated rollout is invalid");
        if (!(r.trajectory == st.trajectory))
            return fail(ViolationKind::replay_mismatch, i, "re-simulated trajectory differs from the stored one");
        prev = r.trajectory.back();
    }
    if (!goal_satisfied(sc.goal, prev)) return fail(ViolationKind::goal_unmet, std::nullopt, "final state misses the goal");
    return {};
}

}  // namespace mosaic
