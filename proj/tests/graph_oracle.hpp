#pragma once

#include <limits>
#include <random>
#include <vector>

#include "test_util.hpp"

namespace mosaic::testing {

/// A random multigraph built from singleton-trajectory nodes; goal nodes have their object in the bin.
struct RandomGraph {
    MosaicGraph graph;
    GoalSpec goal;
    std::vector<char> is_goal;
};

inline RandomGraph random_graph(std::mt19937_64& g, std::size_t max_nodes = 8, std::size_t max_edges = 20) {
    RandomGraph rg;
    rg.goal = {0, Rect{{10, -1}, {11, static_cast<double>(max_nodes) + 1}}};
    std::uniform_int_distribution<std::size_t> nn(1, max_nodes);
    std::uniform_int_distribution<std::size_t> ne(0, max_edges);
    std::uniform_int_distribution<int> cost_int(0, 6);
    std::bernoulli_distribution goal_flag(0.3);
    const std::size_t n = nn(g);
    // integer-valued costs provoke ties
    const auto cost = [&] { return static_cast<double>(cost_int(g)) * 0.5; };
    for (std::size_t i = 0; i < n; ++i) {
        const bool goal = i > 0 && goal_flag(g);
        rg.is_goal.push_back(goal ? 1 : 0);
        WorldState s = simple_state({goal ? 10.5 : 0.0, static_cast<double>(i)});
        if (i == 0) {
            rg.graph.add_start(s);
        } else {
            MosaicNode node;
            node.skill = SkillName::push;
            node.trajectory = Trajectory::singleton(s);
            node.cost = cost();
            rg.graph.add_node(std::move(node));
        }
    }
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const std::size_t m = n > 1 ? ne(g) : 0;
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t a = pick(g);
        std::size_t b = pick(g);
        if (a == b) b = (b + 1) % n;
        MosaicEdge e;
        e.from = a;
        e.to = b;
        e.skill = SkillName::push;
        e.cond0 = StateCondition{rg.graph.node(a).terminal(), {}};
        e.cond1 = StateCondition{rg.graph.node(b).initial(), {}};
        e.trajectory = Trajectory::from_states({rg.graph.node(a).terminal(), rg.graph.node(b).initial()});
        e.cost = cost();
        rg.graph.add_edge(std::move(e));
    }
    return rg;
}

/// Exhaustive minimum over all simple paths from the start to a goal node (+inf when none).
inline double brute_force_min(const RandomGraph& rg) {
    const MosaicGraph& g = rg.graph;
    double best = std::numeric_limits<double>::infinity();
    std::vector<char> on_path(g.node_count(), 0);
    const auto dfs = [&](auto&& self, NodeId v, double acc) -> void {
        if (rg.is_goal[v]) best = std::min(best, acc);
        on_path[v] = 1;
        for (const auto& e : g.edges()) {
            if (e.from != v || on_path[e.to]) continue;
            self(self, e.to, acc + e.cost + g.node(e.to).cost);
        }
        on_path[v] = 0;
    };
    dfs(dfs, g.start_id(), g.node(g.start_id()).cost);
    return best;
}

/// Recomputes a returned path's cost and checks that it is a connected start-to-goal walk.
inline bool path_consistent(const RandomGraph& rg, const GraphPath& p, double& recomputed) {
    const MosaicGraph& g = rg.graph;
    if (p.nodes.empty() || p.nodes.front() != g.start_id() || p.edges.size() + 1 != p.nodes.size()) return false;
    if (!rg.is_goal[p.nodes.back()]) return false;
    recomputed = g.node(p.nodes.front()).cost;
    for (std::size_t i = 0; i < p.edges.size(); ++i) {
        const MosaicEdge& e = g.edge(p.edges[i]);
        if (e.from != p.nodes[i] || e.to != p.nodes[i + 1]) return false;
        recomputed += e.cost + g.node(e.to).cost;
    }
    return true;
}

}  // namespace mosaic::testing
