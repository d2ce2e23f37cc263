#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "mosaic/errors.hpp"
#include "mosaic/graph.hpp"
#include "mosaic/oracle.hpp"
#include "mosaic/planner.hpp"
#include "mosaic/skills.hpp"

namespace mosaic {

namespace detail {

inline void prepare(const Scenario& sc, const SkillLibrary& lib) {
    if (lib.skills().empty()) throw InputError("skill library is empty");
    check_scenario(sc);
}

inline PlanResult finish_sequential(const Scenario& sc, std::vector<PlanStep> steps, bool success,
                                    const BudgetTracker& bt, SkillStats stats) {
    PlanResult res;
    res.stats = std::move(stats);
    if (success) {
        Plan p;
        for (const auto& s : steps) p.total_cost += s.cost;
        p.steps = std::move(steps);
        res.plan = std::move(p);
        res.success = true;
    } else {
        res.reason = bt.time_exceeded() ? "time budget exhausted" : "iteration budget exhausted";
    }
    (void)sc;
    bt.fill(res);
    return res;
}

}  // namespace detail

// ---------------------------------------------------------------- Skills-as-Options

struct OptionsConfig {
    std::size_t successors_per_skill{16};
    std::uint64_t seed{0};
};

/// Skill chaining: breadth-first search over world states using start-conditioned generators,
/// with a goal-conditioned transport attempt from every expanded state that holds an object.
[[nodiscard]] inline PlanResult skills_as_options_plan(const Scenario& sc, const SkillLibrary& lib,
                                                       const OptionsConfig& cfg, const PlanBudget& budget) {
    detail::prepare(sc, lib);
    BudgetTracker bt(budget);
    Rng rng(mix_seed(cfg.seed, 0x6f7074));
    const double lambda = lib.config().lambda;
    const double w = sc.world.w_theta;
    SkillStats stats;

    struct Vertex {
        WorldState state;
        std::optional<std::size_t> parent;
        std::optional<PlanStep> step;
    };
    std::vector<Vertex> verts{{sc.start, std::nullopt, std::nullopt}};
    const auto reconstruct = [&](std::size_t v) {
        std::vector<PlanStep> steps;
        for (std::optional<std::size_t> cur = v; cur; cur = verts[*cur].parent)
            if (verts[*cur].step) steps.push_back(*verts[*cur].step);
        std::reverse(steps.begin(), steps.end());
        return steps;
    };
    if (goal_satisfied(sc.goal, sc.start)) return detail::finish_sequential(sc, {}, true, bt, stats);

    std::vector<SkillName> gens;
    for (SkillName n : kAllSkills)
        if (lib.has(n) && skill_id(n).can_generate) gens.push_back(n);
    const bool transport = lib.has(SkillName::transport);

    std::deque<std::size_t> frontier{0};
    while (!frontier.empty() && !bt.exhausted()) {
        const std::size_t v = frontier.front();
        frontier.pop_front();
        const WorldState x = verts[v].state;
        if (transport && x.held) {
            SkillParams params = sample_parameters(SkillName::transport, sc, rng);
            params.fields = TransportParams{*x.held};
            const Condition goal = GoalCondition{sc.goal};
            const SkillOutcome out = lib.invoke_connector(SkillName::transport, StateCondition{x, lib.config().match},
                                                          goal, params);
            bt.charge(out);
            stats.record_result({SkillName::transport, SkillRole::connect}, out.any_valid());
            if (out.any_valid()) {
                auto steps = reconstruct(v);
                steps.push_back({StepKind::connector, SkillName::transport, params, *out.selected, goal,
                                 out.representative(), outcome_cost(out, lambda, w)});
                return detail::finish_sequential(sc, std::move(steps), true, bt, stats);
            }
        }
        for (SkillName skill : gens) {
            for (std::size_t j = 0; j < cfg.successors_per_skill && !bt.exhausted(); ++j) {
                const SkillParams params = sample_parameters(skill, sc, rng);
                const SkillOutcome out = lib.invoke_from_state(skill, x, params);
                bt.charge(out);
                stats.record_result({skill, SkillRole::generate}, out.any_valid());
                if (!out.any_valid()) continue;
                PlanStep st{StepKind::conditioned, skill, params, *out.selected, std::nullopt, out.representative(),
                            outcome_cost(out, lambda, w)};
                verts.push_back({out.representative().back(), v, std::move(st)});
                const std::size_t child = verts.size() - 1;
                if (goal_satisfied(sc.goal, verts[child].state))
                    return detail::finish_sequential(sc, reconstruct(child), true, bt, stats);
                frontier.push_back(child);
            }
        }
    }
    return detail::finish_sequential(sc, {}, false, bt, stats);
}

// ---------------------------------------------------------------- CEM

struct CemConfig {
    std::size_t population{32};
    double elite_fraction{0.25};
    std::size_t horizon{4};
    std::size_t max_outer_iterations{1000};
    double smoothing{0.7};  // weight of the elite fit in each refit
    double init_distance_mean{0.125};
    double init_distance_sd{0.1};
    double init_angle_sd{std::numbers::pi};
    double min_sd{0.02};
    double goal_bonus{10.0};
    std::uint64_t seed{0};

    void validate() const {
        if (!(elite_fraction > 0 && elite_fraction < 1)) throw ParameterError("elite fraction must lie in (0,1)");
        if (horizon < 1) throw ParameterError("horizon must be >= 1");
        if (population < 1) throw ParameterError("population must be >= 1");
        if (!(smoothing >= 0 && smoothing <= 1)) throw ParameterError("smoothing must lie in [0,1]");
    }
};

/// Indices of the top ceil(fraction * n) scores, best first; ties keep the lower index.
[[nodiscard]] inline std::vector<std::size_t> select_elite(const std::vector<double>& scores, double fraction) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * scores.size() - 1e-9)));
    idx.resize(std::min(n, idx.size()));
    return idx;
}

namespace detail {

struct CemAction {
    SkillName skill;
    std::size_t object;
};

struct Gaussian1 {
    double mean{0};
    double sd{1};
};

struct CemSlot {
    std::vector<double> probs;  // over actions
    Gaussian1 direction;        // push heading
    Gaussian1 distance;
    Gaussian1 grasp;
};

struct CemElement {
    std::size_t action{0};
    SkillParams params;
};

inline double distance_to_region(Vec2 p, const Rect& r) {
    const double dx = std::max({r.min.x - p.x, 0.0, p.x - r.max.x});
    const double dy = std::max({r.min.y - p.y, 0.0, p.y - r.max.y});
    return std::hypot(dx, dy);
}

}  // namespace detail

/// Receding-horizon cross-entropy search over skill sequences; commits the first step of the best
/// sequence each outer iteration (or the whole prefix when it reaches the goal).
[[nodiscard]] inline PlanResult cem_plan(const Scenario& sc, const SkillLibrary& lib, const CemConfig& cfg,
                                         const PlanBudget& budget) {
    using namespace detail;
    cfg.validate();
    prepare(sc, lib);
    BudgetTracker bt(budget);
    Rng rng(mix_seed(cfg.seed, 0x63656d));
    const double lambda = lib.config().lambda;
    const double w = sc.world.w_theta;
    const MatchTolerance tol = lib.config().match;
    SkillStats stats;

    std::vector<CemAction> actions;
    for (SkillName n : kAllSkills) {
        if (!lib.has(n)) continue;
        if (n == SkillName::transport || n == SkillName::rearrange) actions.push_back({n, sc.goal.target});
        else
            for (std::size_t o : applicable_objects(n, sc)) actions.push_back({n, o});
    }
    const auto fresh_slot = [&] {
        CemSlot s;
        s.probs.assign(actions.size(), 1.0 / static_cast<double>(actions.size()));
        s.direction = {0.0, cfg.init_angle_sd};
        s.distance = {cfg.init_distance_mean, cfg.init_distance_sd};
        s.grasp = {0.0, cfg.init_angle_sd};
        return s;
    };
    std::vector<CemSlot> slots(cfg.horizon);
    for (auto& s : slots) s = fresh_slot();

    const auto sample_element = [&](const CemSlot& slot) {
        std::discrete_distribution<std::size_t> cat(slot.probs.begin(), slot.probs.end());
        CemElement e;
        e.action = cat(rng);
        const CemAction& a = actions[e.action];
        SkillParams p = sample_parameters(a.skill, sc, rng);  // supplies seed and uniform defaults
        switch (a.skill) {
            case SkillName::push: {
                PushParams f;
                f.object = a.object;
                f.direction = unit_from_angle(slot.direction.mean + gaussian(rng, slot.direction.sd));
                f.distance =
                    std::clamp(slot.distance.mean + gaussian(rng, slot.distance.sd), 1e-3, sc.world.max_push);
                p.fields = f;
                break;
            }
            case SkillName::pick: {
                PickParams f;
                f.object = a.object;
                f.grasp_angle = normalize_angle(slot.grasp.mean + gaussian(rng, slot.grasp.sd));
                p.fields = f;
                break;
            }
            case SkillName::transport: p.fields = TransportParams{a.object}; break;
            case SkillName::rearrange: std::get<RearrangeParams>(p.fields).object = a.object; break;
        }
        e.params = p;
        return e;
    };

    const Condition goal_cond = GoalCondition{sc.goal};
    // one skill invocation from `x`; returns the committed step when valid
    const auto apply = [&](const WorldState& x, const CemElement& e) -> std::optional<PlanStep> {
        const CemAction& a = actions[e.action];
        const bool connector = !skill_id(a.skill).can_generate;
        const SkillOutcome out = connector ? lib.invoke_connector(a.skill, StateCondition{x, tol}, goal_cond, e.params)
                                           : lib.invoke_from_state(a.skill, x, e.params);
        bt.charge(out);
        stats.record_result({a.skill, connector ? SkillRole::connect : SkillRole::generate}, out.any_valid());
        if (!out.any_valid()) return std::nullopt;
        return PlanStep{connector ? StepKind::connector : StepKind::conditioned,
                        a.skill,
                        e.params,
                        *out.selected,
                        connector ? std::optional<Condition>(goal_cond) : std::nullopt,
                        out.representative(),
                        outcome_cost(out, lambda, w)};
    };

    WorldState x = sc.start;
    std::vector<PlanStep> committed;
    if (goal_satisfied(sc.goal, x)) return finish_sequential(sc, {}, true, bt, stats);
    for (std::size_t outer = 0; outer < cfg.max_outer_iterations && !bt.exhausted(); ++outer) {
        std::vector<std::vector<CemElement>> seqs(cfg.population);
        std::vector<std::vector<PlanStep>> rolled(cfg.population);
        std::vector<double> scores(cfg.population, -std::numeric_limits<double>::infinity());
        std::vector<char> reached(cfg.population, 0);
        std::size_t evaluated = 0;
        for (std::size_t p = 0; p < cfg.population && !bt.exhausted(); ++p) {
            WorldState cur = x;
            for (std::size_t h = 0; h < cfg.horizon; ++h) seqs[p].push_back(sample_element(slots[h]));
            for (std::size_t h = 0; h < cfg.horizon && !bt.exhausted(); ++h) {
                auto st = apply(cur, seqs[p][h]);
                if (!st) break;
                cur = st->trajectory.back();
                rolled[p].push_back(std::move(*st));
                if (goal_satisfied(sc.goal, cur)) {
                    reached[p] = 1;
                    break;
                }
            }
            scores[p] = -distance_to_region(cur.objects[sc.goal.target].position(), sc.goal.region) +
                        (reached[p] ? cfg.goal_bonus : 0.0);
            ++evaluated;
        }
        if (evaluated == 0) break;
        scores.resize(evaluated);
        const auto elite = select_elite(scores, cfg.elite_fraction);
        const std::size_t best = elite.front();
        if (reached[best]) {
            for (auto& st : rolled[best]) committed.push_back(std::move(st));
            return finish_sequential(sc, std::move(committed), true, bt, stats);
        }
        // refit each slot on the elite sequences, blending with the previous distribution
        for (std::size_t h = 0; h < cfg.horizon; ++h) {
            CemSlot& slot = slots[h];
            std::vector<double> freq(actions.size(), 0.0);
            std::vector<double> dirs;
            std::vector<double> dists;
            std::vector<double> grasps;
            for (std::size_t i : elite) {
                const CemElement& e = seqs[i][h];
                freq[e.action] += 1.0 / static_cast<double>(elite.size());
                if (const auto* pp = std::get_if<PushParams>(&e.params.fields)) {
                    dirs.push_back(std::atan2(pp->direction.y, pp->direction.x));
                    dists.push_back(pp->distance);
                } else if (const auto* kp = std::get_if<PickParams>(&e.params.fields)) {
                    grasps.push_back(kp->grasp_angle);
                }
            }
            for (std::size_t a = 0; a < actions.size(); ++a)
                slot.probs[a] = cfg.smoothing * freq[a] + (1.0 - cfg.smoothing) * slot.probs[a];
            const auto refit = [&](Gaussian1& g, const std::vector<double>& v, bool angular) {
                if (v.empty()) return;
                double mean = 0;
                if (angular) {
                    double sx = 0, sy = 0;
                    for (double a : v) {
                        sx += std::cos(a);
                        sy += std::sin(a);
                    }
                    mean = std::atan2(sy, sx);
                } else {
                    mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
                }
                double var = 0;
                for (double a : v) {
                    const double d = angular ? angle_diff(a, mean) : a - mean;
                    var += d * d;
                }
                const double sd = std::max(cfg.min_sd, std::sqrt(var / static_cast<double>(v.size())));
                g.mean = angular ? normalize_angle(g.mean + cfg.smoothing * angle_diff(mean, g.mean))
                                 : cfg.smoothing * mean + (1.0 - cfg.smoothing) * g.mean;
                g.sd = cfg.smoothing * sd + (1.0 - cfg.smoothing) * g.sd;
            };
            refit(slot.direction, dirs, true);
            refit(slot.distance, dists, false);
            refit(slot.grasp, grasps, true);
        }
        // receding horizon: execute the first step of the best sequence and shift the slots
        if (!rolled[best].empty()) {
            x = rolled[best].front().trajectory.back();
            committed.push_back(std::move(rolled[best].front()));
            slots.erase(slots.begin());
            slots.push_back(fresh_slot());
        }
    }
    return finish_sequential(sc, {}, false, bt, stats);
}

// ---------------------------------------------------------------- Roadmaps

struct RoadmapConfig {
    std::size_t roadmap_size{100};  // generator invocations per round
    std::size_t k{3};
    double gamma{0.5};
    std::uint64_t seed{0};
};

namespace detail {

class RoadmapBuilder {
public:
    RoadmapBuilder(const Scenario& sc, const SkillLibrary& lib, const RoadmapConfig& cfg, BudgetTracker& bt)
        : sc_(sc), lib_(lib), cfg_(cfg), bt_(bt), rng_(mix_seed(cfg.seed, 0x726d)),
          graph_(std::make_shared<MosaicGraph>(lib.config().match)) {
        for (SkillName n : kAllSkills) {
            if (!lib.has(n)) continue;
            if (skill_id(n).can_generate) gens_.push_back(n);
            if (skill_id(n).can_connect) conns_.push_back(n);
        }
        x_goal_ = sc.start;
        x_goal_.objects[sc.goal.target] = Pose2(sc.goal.region.center(), sc.start.objects[sc.goal.target].theta);
    }

    /// Phase one: M generator samples, each wired to its k nearest roadmap nodes in both directions.
    void grow() {
        for (std::size_t m = 0; m < cfg_.roadmap_size && !bt_.exhausted() && !gens_.empty(); ++m) {
            const SkillName skill = gens_[uniform_index(rng_, gens_.size())];
            const SkillParams params = sample_parameters(skill, sc_, rng_);
            const SkillOutcome out = lib_.invoke_generator(skill, params);
            bt_.charge(out);
            stats_.record_result({skill, SkillRole::generate}, out.any_valid());
            if (!out.any_valid()) continue;
            MosaicNode n;
            n.skill = skill;
            n.params = params;
            n.rollout = *out.selected;
            n.trajectory = out.representative();
            n.cost = outcome_cost(out, lib_.config().lambda, sc_.world.w_theta);
            const NodeId id = graph_->add_node(std::move(n));
            wire(id);
        }
    }

    /// Phase two: start and goal vertices, their connections, and the wiring of nodes added
    /// since the last call.
    void attach_terminals() {
        if (!start_) start_ = graph_->add_start(sc_.start);
        if (!goal_) goal_ = graph_->add_goal_anchor(x_goal_);
        const auto ok = [&](NodeId j) { return !graph_->node(j).goal_anchor; };
        for (NodeId j : graph_->nearest_neighbors(*start_, cfg_.k, penalties_, sc_.world.w_theta, cfg_.gamma,
                                                  NeighborDirection::outgoing, ok))
            connect(*start_, j);
        // goal-predicate connections from the k nodes ending closest to the synthetic goal state
        std::vector<std::pair<double, NodeId>> ranked;
        for (NodeId i = 0; i < graph_->node_count(); ++i) {
            if (i == *goal_ || graph_->connected(i, *goal_)) continue;
            const double d = state_distance(graph_->node(i).terminal(), x_goal_, sc_.world.w_theta);
            ranked.emplace_back(penalties_.inflate(i, *goal_, d, cfg_.gamma), i);
        }
        std::sort(ranked.begin(), ranked.end());
        for (std::size_t i = 0; i < std::min(cfg_.k, ranked.size()); ++i) connect(ranked[i].second, *goal_);
    }

    [[nodiscard]] bool solved() const { return start_ && graph_->has_path(sc_.goal); }
    [[nodiscard]] std::shared_ptr<MosaicGraph> graph() const { return graph_; }
    [[nodiscard]] const SkillStats& stats() const { return stats_; }

private:
    void wire(NodeId id) {
        const auto ok = [&](NodeId j) { return !graph_->node(j).goal_anchor; };
        for (NodeId j :
             graph_->nearest_neighbors(id, cfg_.k, penalties_, sc_.world.w_theta, cfg_.gamma, NeighborDirection::outgoing, ok))
            connect(id, j);
        for (NodeId j :
             graph_->nearest_neighbors(id, cfg_.k, penalties_, sc_.world.w_theta, cfg_.gamma, NeighborDirection::incoming, ok))
            connect(j, id);
    }

    /// Tries every connector on the pair (a, b); b may be the goal vertex.
    void connect(NodeId a, NodeId b) {
        const MatchTolerance tol = lib_.config().match;
        const bool to_goal = graph_->node(b).goal_anchor;
        const Condition from = StateCondition{graph_->node(a).terminal(), tol};
        const Condition to = to_goal ? Condition{GoalCondition{sc_.goal}} : Condition{StateCondition{graph_->node(b).initial(), tol}};
        bool any = false;
        for (SkillName skill : conns_) {
            if (bt_.exhausted()) return;
            const SkillParams params = sample_parameters(skill, sc_, rng_);
            const SkillOutcome out = lib_.invoke_connector(skill, from, to, params);
            bt_.charge(out);
            stats_.record_result({skill, SkillRole::connect}, out.any_valid());
            if (!out.any_valid()) continue;
            any = true;
            MosaicEdge e;
            e.from = a;
            e.to = b;
            e.skill = skill;
            e.params = params;
            e.rollout = *out.selected;
            e.cond0 = from;
            e.cond1 = to;
            e.trajectory = out.representative();
            e.cost = outcome_cost(out, lib_.config().lambda, sc_.world.w_theta);
            graph_->add_edge(std::move(e), &sc_.goal);
        }
        if (!any) penalties_.record_failure(a, b);
    }

    const Scenario& sc_;
    const SkillLibrary& lib_;
    RoadmapConfig cfg_;
    BudgetTracker& bt_;
    Rng rng_;
    std::shared_ptr<MosaicGraph> graph_;
    std::vector<SkillName> gens_;
    std::vector<SkillName> conns_;
    PairPenaltyTable penalties_;
    SkillStats stats_;
    WorldState x_goal_;
    std::optional<NodeId> start_;
    std::optional<NodeId> goal_;
};

inline PlanResult finish_roadmap(const Scenario& sc, const RoadmapBuilder& rb, const BudgetTracker& bt,
                                 std::string_view failure) {
    PlanResult res;
    res.graph = rb.graph();
    res.stats = rb.stats();
    if (rb.solved()) {
        const GraphPath path = rb.graph()->shortest_path(sc.goal);
        Plan p;
        p.steps = flatten_path(*rb.graph(), path);
        p.total_cost = path.cost;
        p.graph = rb.graph();
        res.plan = std::move(p);
        res.success = true;
    } else {
        res.reason = bt.time_exceeded() ? "time budget exhausted" : std::string(failure);
    }
    bt.fill(res);
    return res;
}

}  // namespace detail

/// Two-phase roadmap: one round of generator sampling and wiring, then start/goal attachment and
/// Dijkstra. Fails when start and goal end up disconnected.
[[nodiscard]] inline PlanResult roadmap_plan(const Scenario& sc, const SkillLibrary& lib, const RoadmapConfig& cfg,
                                             const PlanBudget& budget) {
    detail::prepare(sc, lib);
    BudgetTracker bt(budget);
    detail::RoadmapBuilder rb(sc, lib, cfg, bt);
    rb.grow();
    if (!bt.exhausted()) rb.attach_terminals();
    return detail::finish_roadmap(sc, rb, bt, "start and goal disconnected");
}

/// Roadmap with further sampling rounds while start and goal stay disconnected.
[[nodiscard]] inline PlanResult incremental_roadmap_plan(const Scenario& sc, const SkillLibrary& lib,
                                                         const RoadmapConfig& cfg, const PlanBudget& budget) {
    detail::prepare(sc, lib);
    BudgetTracker bt(budget);
    detail::RoadmapBuilder rb(sc, lib, cfg, bt);
    rb.grow();
    if (!bt.exhausted()) rb.attach_terminals();
    while (!rb.solved() && !bt.exhausted()) {
        rb.grow();
        if (!bt.exhausted()) rb.attach_terminals();
    }
    return detail::finish_roadmap(sc, rb, bt, "iteration budget exhausted");
}

}  // namespace mosaic
