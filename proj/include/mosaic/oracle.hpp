#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "mosaic/errors.hpp"
#include "mosaic/graph.hpp"
#include "mosaic/rng.hpp"
#include "mosaic/skills.hpp"

namespace mosaic {

struct OracleConfig {
    double alpha{0.5};
    double p_lb{0.1};
    double p_ub{0.9};
    double p_s{0.2};
    double p_g{0.4};
    double p_sg{0.5};
    double p_direct_goal{0.2};
    double gamma{0.5};
    bool noise{true};
    std::uint64_t seed{0};

    void validate() const {
        const auto unit = [](double v) { return v >= 0 && v <= 1; };
        if (!unit(alpha)) throw ParameterError("oracle alpha must lie in [0,1]");
        if (!(unit(p_lb) && unit(p_ub) && p_lb <= p_ub)) throw ParameterError("oracle needs 0 <= p_lb <= p_ub <= 1");
        if (!(unit(p_s) && unit(p_g) && unit(p_sg) && p_s <= p_g && p_g <= p_sg))
            throw ParameterError("oracle mode cutoffs need 0 <= p_s <= p_g <= p_sg <= 1");
        if (!unit(p_direct_goal)) throw ParameterError("p_direct_goal must lie in [0,1]");
        if (!(gamma >= 0)) throw ParameterError("pair penalty gamma must be >= 0");
    }
};

/// Role a skill plays in one invocation; push is both and keeps separate statistics per role.
enum class SkillRole { generate, connect };

struct SkillArm {
    SkillName name{SkillName::push};
    SkillRole role{SkillRole::generate};

    friend bool operator==(const SkillArm&, const SkillArm&) = default;
    friend auto operator<=>(const SkillArm&, const SkillArm&) = default;
};

[[nodiscard]] inline std::string to_string(const SkillArm& a) {
    return std::string(to_string(a.name)) + (a.role == SkillRole::generate ? "/G" : "/C");
}

struct SkillCounter {
    std::uint64_t successes{0};
    std::uint64_t invocations{0};

    [[nodiscard]] double success_rate() const noexcept {
        return static_cast<double>(successes) / static_cast<double>(std::max<std::uint64_t>(invocations, 1));
    }
};

class SkillStats {
public:
    void record_result(const SkillArm& arm, bool success) {
        SkillCounter& c = counters_[arm];
        ++c.invocations;
        if (success) ++c.successes;
    }
    [[nodiscard]] SkillCounter get(const SkillArm& arm) const {
        const auto it = counters_.find(arm);
        return it == counters_.end() ? SkillCounter{} : it->second;
    }
    [[nodiscard]] const std::map<SkillArm, SkillCounter>& all() const noexcept { return counters_; }

private:
    std::map<SkillArm, SkillCounter> counters_;
};

inline void record_pair_failure(PairPenaltyTable& penalties, NodeId a, NodeId b) { penalties.record_failure(a, b); }

enum class SkillTypeChoice { connectors_only, all_skills };

[[nodiscard]] inline double skill_type_threshold(std::size_t n, std::size_t e, const OracleConfig& cfg) {
    if (n == 0) throw PreconditionError("skill type choice needs at least one node");
    return std::clamp(static_cast<double>(e) / static_cast<double>(n), cfg.p_lb, cfg.p_ub);
}

/// Single draw T ~ U(0,1) against clamp(E/N, p_lb, p_ub): connectors only iff T exceeds it.
[[nodiscard]] inline SkillTypeChoice choose_skill_type(std::size_t n, std::size_t e, const OracleConfig& cfg,
                                                       Rng& rng) {
    const double threshold = skill_type_threshold(n, e, cfg);
    const double t = uniform(rng, 0.0, 1.0);
    return t > threshold ? SkillTypeChoice::connectors_only : SkillTypeChoice::all_skills;
}

/// Noise-free utility of candidate `c` given the summed (t+1) over the candidate set.
[[nodiscard]] inline double skill_utility(const SkillCounter& c, double total_trials, double alpha) {
    const double ratio = total_trials / static_cast<double>(c.invocations + 1);
    return alpha * c.success_rate() + (1.0 - alpha) * std::sqrt(std::log(ratio));
}

/// argmax of utility (+ N(0,1) noise when enabled); ties go to the smaller arm in name order.
[[nodiscard]] inline SkillArm choose_skill(const std::vector<SkillArm>& candidates, const SkillStats& stats,
                                           const OracleConfig& cfg, Rng& rng) {
    if (candidates.empty()) throw InputError("choose_skill: empty candidate list");
    double total = 0;
    for (const auto& a : candidates) total += static_cast<double>(stats.get(a).invocations + 1);
    std::optional<SkillArm> best;
    double best_u = 0;
    for (const auto& a : candidates) {
        double u = skill_utility(stats.get(a), total, cfg.alpha);
        if (cfg.noise) u += gaussian(rng, 1.0);
        if (!best || u > best_u || (u == best_u && a < *best)) {
            best = a;
            best_u = u;
        }
    }
    return *best;
}

/// Objects a skill may act on.
[[nodiscard]] inline std::vector<std::size_t> applicable_objects(SkillName skill, const Scenario& sc) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < sc.objects.size(); ++i) {
        const ObjectSpec& o = sc.objects[i];
        const bool ok = skill == SkillName::push ? o.mass == MassClass::light
                        : skill == SkillName::rearrange ? true
                                                        : o.graspable;
        if (ok) out.push_back(i);
    }
    if (out.empty()) out.push_back(0);  // keeps sampling total; the skill then simply fails
    return out;
}

/// Axis-aligned hull of table and bin; rearrange targets are drawn from it.
[[nodiscard]] inline Rect workspace_bounds(const Scenario& sc) {
    return {{std::min(sc.table.min.x, sc.bin.min.x), std::min(sc.table.min.y, sc.bin.min.y)},
            {std::max(sc.table.max.x, sc.bin.max.x), std::max(sc.table.max.y, sc.bin.max.y)}};
}

/// Draws every field uniformly over its range.
[[nodiscard]] inline SkillParams sample_parameters(SkillName skill, const Scenario& sc, Rng& rng) {
    SkillParams p;
    const auto objs = applicable_objects(skill, sc);
    const std::size_t obj = objs[uniform_index(rng, objs.size())];
    switch (skill) {
        case SkillName::push: {
            PushParams f;
            f.object = obj;
            f.direction = unit_from_angle(uniform(rng, -std::numbers::pi, std::numbers::pi));
            f.distance = sc.world.max_push * (1.0 - uniform(rng, 0.0, 1.0));  // (0, max]
            p.fields = f;
            break;
        }
        case SkillName::pick: {
            PickParams f;
            f.object = obj;
            f.grasp_angle = uniform(rng, -std::numbers::pi, std::numbers::pi);
            p.fields = f;
            break;
        }
        case SkillName::transport: p.fields = TransportParams{obj}; break;
        case SkillName::rearrange: {
            const Rect ws = workspace_bounds(sc);
            RearrangeParams f;
            f.object = obj;
            const double x = uniform(rng, ws.min.x, ws.max.x);
            const double y = uniform(rng, ws.min.y, ws.max.y);
            f.target = Pose2(x, y, uniform(rng, -std::numbers::pi, std::numbers::pi));
            p.fields = f;
            break;
        }
    }
    p.seed = static_cast<std::uint64_t>(rng() % kSeedRange);
    return p;
}

enum class SelectionMode { start, goal, start_goal, random };

[[nodiscard]] inline std::string_view to_string(SelectionMode m) noexcept {
    switch (m) {
        case SelectionMode::start: return "start";
        case SelectionMode::goal: return "goal";
        case SelectionMode::start_goal: return "start-goal";
        case SelectionMode::random: return "random";
    }
    return "?";
}

[[nodiscard]] inline SelectionMode selection_mode(double r, const OracleConfig& cfg) noexcept {
    if (r < cfg.p_s) return SelectionMode::start;
    if (r < cfg.p_g) return SelectionMode::goal;
    if (r < cfg.p_sg) return SelectionMode::start_goal;
    return SelectionMode::random;
}

struct ConnectionRequest {
    SelectionMode mode{SelectionMode::random};
    bool direct_goal{false};
    NodeId from_node{0};
    std::optional<NodeId> to_node;  // none when `to` is the goal predicate
    Condition from;
    Condition to;
};

/// Picks a node pair (or node and goal) to bridge. Nodes rejected by `eligible` never take part.
/// Returns nullopt when no candidate pair remains.
template <class Pred>
[[nodiscard]] std::optional<ConnectionRequest> choose_conds_to_connect(const MosaicGraph& g, const GoalSpec& goal,
                                                                       const OracleConfig& cfg,
                                                                       const PairPenaltyTable& penalties,
                                                                       double w_theta, const MatchTolerance& tol,
                                                                       Rng& rng, Pred eligible) {
    if (g.node_count() == 0) throw PreconditionError("choose_conds_to_connect: empty graph");
    ConnectionRequest req;
    req.mode = selection_mode(uniform(rng, 0.0, 1.0), cfg);
    req.direct_goal = uniform(rng, 0.0, 1.0) < cfg.p_direct_goal;

    std::vector<NodeId> all;
    for (NodeId i = 0; i < g.node_count(); ++i)
        if (eligible(i)) all.push_back(i);
    if (all.empty()) return std::nullopt;
    const ReachableSets sets = g.reachable_sets(goal);
    std::vector<NodeId> fwd;
    std::vector<NodeId> back;
    for (NodeId i : sets.from_start)
        if (eligible(i)) fwd.push_back(i);
    for (NodeId i : sets.to_goal)
        if (eligible(i)) back.push_back(i);

    SelectionMode mode = req.mode;
    if (mode == SelectionMode::goal && back.empty()) mode = SelectionMode::random;
    if (mode == SelectionMode::start_goal && (fwd.empty() || back.empty())) mode = SelectionMode::random;
    if (mode == SelectionMode::start && fwd.empty()) mode = SelectionMode::random;
    const auto pick = [&](const std::vector<NodeId>& v) { return v[uniform_index(rng, v.size())]; };

    std::optional<NodeId> from;
    std::optional<NodeId> to;
    if (req.direct_goal) {
        // the node reaching for the goal comes from the start side when the mode asks for it
        // nodes that already reach the goal gain nothing from another goal connection
        std::vector<char> in_back(g.node_count(), 0);
        for (NodeId i : back) in_back[i] = 1;
        const bool start_side = mode == SelectionMode::start || mode == SelectionMode::start_goal;
        std::vector<NodeId> pool;
        for (NodeId i : start_side ? fwd : all)
            if (!in_back[i]) pool.push_back(i);
        if (pool.empty()) return std::nullopt;
        from = pick(pool);
    } else {
        switch (mode) {
            case SelectionMode::start:
            case SelectionMode::random: {
                from = pick(mode == SelectionMode::start ? fwd : all);
                const auto nn = g.nearest_neighbors(*from, 1, penalties, w_theta, cfg.gamma,
                                                    NeighborDirection::outgoing, eligible);
                if (nn.empty()) return std::nullopt;
                to = nn.front();
                break;
            }
            case SelectionMode::goal: {
                to = pick(back);
                const auto nn = g.nearest_neighbors(*to, 1, penalties, w_theta, cfg.gamma,
                                                    NeighborDirection::incoming, eligible);
                if (nn.empty()) return std::nullopt;
                from = nn.front();
                break;
            }
            case SelectionMode::start_goal: {
                from = pick(fwd);
                std::vector<char> in_back(g.node_count(), 0);
                for (NodeId i : back) in_back[i] = 1;
                const auto nn = g.nearest_neighbors(*from, 1, penalties, w_theta, cfg.gamma,
                                                    NeighborDirection::outgoing,
                                                    [&](NodeId j) { return in_back[j] != 0; });
                if (nn.empty()) return std::nullopt;
                to = nn.front();
                break;
            }
        }
    }
    req.from_node = *from;
    req.to_node = to;
    req.from = StateCondition{g.node(*from).terminal(), tol};
    if (to) req.to = StateCondition{g.node(*to).initial(), tol};
    else req.to = GoalCondition{goal};
    return req;
}

[[nodiscard]] inline std::optional<ConnectionRequest> choose_conds_to_connect(const MosaicGraph& g,
                                                                              const GoalSpec& goal,
                                                                              const OracleConfig& cfg,
                                                                              const PairPenaltyTable& penalties,
                                                                              double w_theta,
                                                                              const MatchTolerance& tol, Rng& rng) {
    return choose_conds_to_connect(g, goal, cfg, penalties, w_theta, tol, rng, [](NodeId) { return true; });
}

}  // namespace mosaic
