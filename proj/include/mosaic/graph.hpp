#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <utility>
#include <vector>

#include "mosaic/errors.hpp"
#include "mosaic/skills.hpp"
#include "mosaic/world.hpp"

namespace mosaic {

using NodeId = std::size_t;
using EdgeId = std::size_t;

/// Pseudo node id used by penalty bookkeeping for connections aimed at the goal predicate.
inline constexpr NodeId kGoalTarget = std::numeric_limits<NodeId>::max();

struct MosaicNode {
    NodeId id{0};
    std::optional<SkillName> skill;   // none for the start node and goal anchors
    std::optional<SkillParams> params;
    std::size_t rollout{0};           // index of the representative rollout within the batch
    Trajectory trajectory;
    double cost{0};
    /// Goal anchors stand for "any state satisfying the goal"; incoming edges must end in the goal
    /// rather than match the anchor's stored state.
    bool goal_anchor{false};

    [[nodiscard]] const WorldState& initial() const { return trajectory.front(); }
    [[nodiscard]] const WorldState& terminal() const { return trajectory.back(); }
};

struct MosaicEdge {
    EdgeId id{0};
    NodeId from{0};
    NodeId to{0};
    SkillName skill{SkillName::push};
    SkillParams params;
    std::size_t rollout{0};
    Condition cond0;
    Condition cond1;
    Trajectory trajectory;
    double cost{0};
};

/// Failure counts of directed node pairs.
class PairPenaltyTable {
public:
    void record_failure(NodeId a, NodeId b) { ++counts_[{a, b}]; }
    [[nodiscard]] int count(NodeId a, NodeId b) const {
        const auto it = counts_.find({a, b});
        return it == counts_.end() ? 0 : it->second;
    }
    [[nodiscard]] double inflate(NodeId a, NodeId b, double d, double gamma) const {
        return d * (1.0 + gamma * count(a, b));
    }
    [[nodiscard]] std::size_t size() const noexcept { return counts_.size(); }

private:
    std::map<std::pair<NodeId, NodeId>, int> counts_;
};

/// Direction of a neighbor query: outgoing ranks d(self end, other start), incoming d(other end, self start).
enum class NeighborDirection { outgoing, incoming };

struct GraphPath {
    std::vector<NodeId> nodes;  // starts at the start node
    std::vector<EdgeId> edges;  // edges[i] joins nodes[i] -> nodes[i+1]
    double cost{0};
};

struct ReachableSets {
    std::vector<NodeId> from_start;
    std::vector<NodeId> to_goal;
};

class MosaicGraph {
public:
    explicit MosaicGraph(MatchTolerance tol = {}) : tol_(tol) {}

    /// Inserts the unique start node: zero cost, singleton trajectory.
    NodeId add_start(const WorldState& x_start) {
        if (start_) throw ValidationError("graph already has a start node");
        MosaicNode n;
        n.trajectory = Trajectory::singleton(x_start);
        n.cost = 0;
        start_ = insert(std::move(n));
        return *start_;
    }

    NodeId add_goal_anchor(const WorldState& representative) {
        MosaicNode n;
        n.trajectory = Trajectory::singleton(representative);
        n.goal_anchor = true;
        return insert(std::move(n));
    }

    NodeId add_node(MosaicNode n) {
        if (n.trajectory.empty()) throw ValidationError("node trajectory is empty");
        if (!(n.cost >= 0) || !std::isfinite(n.cost)) throw ValidationError("node cost must be finite and >= 0");
        return insert(std::move(n));
    }

    /// Inserts an edge after checking endpoint continuity.
    EdgeId add_edge(MosaicEdge e, const GoalSpec* goal = nullptr) {
        if (e.from >= nodes_.size() || e.to >= nodes_.size()) throw ValidationError("edge endpoint does not exist");
        if (e.trajectory.empty()) throw ValidationError("edge trajectory is empty");
        if (!(e.cost >= 0) || !std::isfinite(e.cost)) throw ValidationError("edge cost must be finite and >= 0");
        if (!states_match(e.trajectory.front(), nodes_[e.from].terminal(), tol_))
            throw ValidationError("edge does not start at the source node's terminal state");
        const MosaicNode& to = nodes_[e.to];
        if (to.goal_anchor) {
            if (!goal || !goal_satisfied(*goal, e.trajectory.back()))
                throw ValidationError("edge into a goal anchor must end in the goal");
        } else if (!states_match(e.trajectory.back(), to.initial(), tol_)) {
            throw ValidationError("edge does not end at the target node's initial state");
        }
        e.id = edges_.size();
        out_[e.from].push_back(e.id);
        in_[e.to].push_back(e.id);
        edges_.push_back(std::move(e));
        return edges_.back().id;
    }

    [[nodiscard]] std::size_t node_count() const noexcept { return nodes_.size(); }
    [[nodiscard]] std::size_t edge_count() const noexcept { return edges_.size(); }
    [[nodiscard]] const std::vector<MosaicNode>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::vector<MosaicEdge>& edges() const noexcept { return edges_; }
    [[nodiscard]] const MosaicNode& node(NodeId id) const { return nodes_.at(id); }
    [[nodiscard]] const MosaicEdge& edge(EdgeId id) const { return edges_.at(id); }
    [[nodiscard]] const std::vector<EdgeId>& out_edges(NodeId id) const { return out_.at(id); }
    [[nodiscard]] const std::vector<EdgeId>& in_edges(NodeId id) const { return in_.at(id); }
    [[nodiscard]] const MatchTolerance& tolerance() const noexcept { return tol_; }

    [[nodiscard]] NodeId start_id() const {
        if (!start_) throw PreconditionError("graph has no start node");
        return *start_;
    }
    [[nodiscard]] bool has_start() const noexcept { return start_.has_value(); }

    [[nodiscard]] bool connected(NodeId a, NodeId b) const {
        for (EdgeId e : out_.at(a))
            if (edges_[e].to == b) return true;
        return false;
    }

    /// Terminal state of the node satisfies the goal; cached per goal.
    [[nodiscard]] bool is_goal_node(NodeId id, const GoalSpec& goal) const {
        if (!cached_goal_ || cached_goal_->target != goal.target || !same_rect(cached_goal_->region, goal.region)) {
            cached_goal_ = goal;
            goal_flags_.clear();
        }
        while (goal_flags_.size() < nodes_.size()) {
            const std::size_t i = goal_flags_.size();
            goal_flags_.push_back(nodes_[i].goal_anchor || goal_satisfied(goal, nodes_[i].terminal()) ? 1 : 0);
        }
        return goal_flags_[id] != 0;
    }

    [[nodiscard]] bool has_path(const GoalSpec& goal) const {
        const auto seen = forward_reach();
        for (NodeId i = 0; i < nodes_.size(); ++i)
            if (seen[i] && is_goal_node(i, goal)) return true;
        return false;
    }

    /// Dijkstra over summed node and edge costs to the cheapest goal node (ties: smallest id).
    [[nodiscard]] GraphPath shortest_path(const GoalSpec& goal) const {
        const NodeId s = start_id();
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<double> dist(nodes_.size(), inf);
        std::vector<std::optional<EdgeId>> via(nodes_.size());
        std::vector<char> done(nodes_.size(), 0);
        using Item = std::pair<double, NodeId>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        dist[s] = nodes_[s].cost;
        pq.emplace(dist[s], s);
        while (!pq.empty()) {
            const auto [d, u] = pq.top();
            pq.pop();
            if (done[u]) continue;
            done[u] = 1;
            for (EdgeId eid : out_[u]) {
                const MosaicEdge& e = edges_[eid];
                const double nd = d + e.cost + nodes_[e.to].cost;
                if (nd < dist[e.to]) {
                    dist[e.to] = nd;
                    via[e.to] = eid;
                    pq.emplace(nd, e.to);
                }
            }
        }
        std::optional<NodeId> best;
        for (NodeId i = 0; i < nodes_.size(); ++i) {
            if (dist[i] == inf || !is_goal_node(i, goal)) continue;
            if (!best || dist[i] < dist[*best]) best = i;
        }
        if (!best) throw NotFoundError("no path from start to a goal node");
        GraphPath path;
        path.cost = dist[*best];
        for (NodeId v = *best;;) {
            path.nodes.push_back(v);
            if (!via[v]) break;
            path.edges.push_back(*via[v]);
            v = edges_[*via[v]].from;
        }
        std::reverse(path.nodes.begin(), path.nodes.end());
        std::reverse(path.edges.begin(), path.edges.end());
        return path;
    }

    /// Up to k candidates ranked by penalized distance; excludes self, already-connected pairs,
    /// and candidates rejected by `eligible`. Ties break by id.
    template <class Pred = bool (*)(NodeId)>
    [[nodiscard]] std::vector<NodeId> nearest_neighbors(NodeId id, std::size_t k, const PairPenaltyTable& penalties,
                                                        double w_theta, double gamma,
                                                        NeighborDirection dir = NeighborDirection::outgoing,
                                                        Pred eligible = [](NodeId) { return true; }) const {
        if (id >= nodes_.size()) throw InputError("nearest_neighbors: unknown node");
        if (k == 0) throw ParameterError("nearest_neighbors: k must be >= 1");
        std::vector<std::pair<double, NodeId>> ranked;
        for (NodeId j = 0; j < nodes_.size(); ++j) {
            if (j == id || !eligible(j)) continue;
            const bool out = dir == NeighborDirection::outgoing;
            const NodeId a = out ? id : j;
            const NodeId b = out ? j : id;
            if (connected(a, b)) continue;
            const double d = state_distance(nodes_[a].terminal(), nodes_[b].initial(), w_theta);
            ranked.emplace_back(penalties.inflate(a, b, d, gamma), j);
        }
        const std::size_t n = std::min(k, ranked.size());
        std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n), ranked.end());
        std::vector<NodeId> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.push_back(ranked[i].second);
        return out;
    }

    [[nodiscard]] ReachableSets reachable_sets(const GoalSpec& goal) const {
        ReachableSets r;
        const auto fwd = forward_reach();
        std::vector<char> back(nodes_.size(), 0);
        std::vector<NodeId> stack;
        for (NodeId i = 0; i < nodes_.size(); ++i)
            if (is_goal_node(i, goal)) {
                back[i] = 1;
                stack.push_back(i);
            }
        while (!stack.empty()) {
            const NodeId v = stack.back();
            stack.pop_back();
            for (EdgeId e : in_[v]) {
                const NodeId u = edges_[e].from;
                if (!back[u]) {
                    back[u] = 1;
                    stack.push_back(u);
                }
            }
        }
        for (NodeId i = 0; i < nodes_.size(); ++i) {
            if (fwd[i]) r.from_start.push_back(i);
            if (back[i]) r.to_goal.push_back(i);
        }
        return r;
    }

private:
    static bool same_rect(const Rect& a, const Rect& b) {
        return a.min.x == b.min.x && a.min.y == b.min.y && a.max.x == b.max.x && a.max.y == b.max.y;
    }

    NodeId insert(MosaicNode n) {
        n.id = nodes_.size();
        nodes_.push_back(std::move(n));
        out_.emplace_back();
        in_.emplace_back();
        return nodes_.back().id;
    }

    std::vector<char> forward_reach() const {
        std::vector<char> seen(nodes_.size(), 0);
        if (!start_) return seen;
        std::vector<NodeId> stack{*start_};
        seen[*start_] = 1;
        while (!stack.empty()) {
            const NodeId v = stack.back();
            stack.pop_back();
            for (EdgeId e : out_[v]) {
                const NodeId w = edges_[e].to;
                if (!seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
            }
        }
        return seen;
    }

    MatchTolerance tol_;
    std::optional<NodeId> start_;
    std::vector<MosaicNode> nodes_;
    std::vector<MosaicEdge> edges_;
    std::vector<std::vector<EdgeId>> out_;
    std::vector<std::vector<EdgeId>> in_;
    mutable std::optional<GoalSpec> cached_goal_;
    mutable std::vector<char> goal_flags_;
};

}  // namespace mosaic
