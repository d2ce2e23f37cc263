#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mosaic/errors.hpp"
#include "mosaic/geometry.hpp"
#include "mosaic/rng.hpp"
#include "mosaic/world.hpp"

namespace mosaic {

/// Skill names in lexicographic order; this order is the deterministic tie-break everywhere.
enum class SkillName { pick, push, rearrange, transport };

inline constexpr std::array<SkillName, 4> kAllSkills{SkillName::pick, SkillName::push, SkillName::rearrange,
                                                     SkillName::transport};

struct SkillId {
    SkillName name{SkillName::push};
    bool can_generate{false};
    bool can_connect{false};

    friend bool operator==(const SkillId&, const SkillId&) = default;
};

/// Capability matrix of the skill library.
[[nodiscard]] constexpr SkillId skill_id(SkillName n) noexcept {
    switch (n) {
        case SkillName::push: return {n, true, true};
        case SkillName::pick: return {n, true, false};
        case SkillName::transport: return {n, false, true};
        case SkillName::rearrange: return {n, false, true};
    }
    return {n, false, false};
}

[[nodiscard]] constexpr std::string_view to_string(SkillName n) noexcept {
    switch (n) {
        case SkillName::push: return "push";
        case SkillName::pick: return "pick";
        case SkillName::transport: return "transport";
        case SkillName::rearrange: return "rearrange";
    }
    return "?";
}

[[nodiscard]] inline SkillName parse_skill_name(std::string_view s) {
    for (SkillName n : kAllSkills)
        if (to_string(n) == s) return n;
    throw InputError("unknown skill '" + std::string(s) + "'");
}

struct PushParams {
    std::size_t object{0};
    Vec2 direction{1, 0};
    double distance{0.1};
    std::optional<Pose2> target;  // connector mode only
    friend bool operator==(const PushParams&, const PushParams&) = default;
};

struct PickParams {
    std::size_t object{0};
    double grasp_angle{0};            // preferred approach heading
    std::optional<Pose2> object_pose;  // generator context; sampled near a table edge when absent
    friend bool operator==(const PickParams&, const PickParams&) = default;
};

struct TransportParams {
    std::size_t object{0};
    friend bool operator==(const TransportParams&, const TransportParams&) = default;
};

struct RearrangeParams {
    std::size_t object{0};
    Pose2 target;
    friend bool operator==(const RearrangeParams&, const RearrangeParams&) = default;
};

inline constexpr std::uint64_t kSeedRange = 1ULL << 32;

struct SkillParams {
    std::uint64_t seed{0};
    std::variant<PushParams, PickParams, TransportParams, RearrangeParams> fields;

    [[nodiscard]] SkillName skill() const noexcept {
        switch (fields.index()) {
            case 0: return SkillName::push;
            case 1: return SkillName::pick;
            case 2: return SkillName::transport;
            default: return SkillName::rearrange;
        }
    }
    friend bool operator==(const SkillParams&, const SkillParams&) = default;
};

struct MatchTolerance {
    double pos{0.01};
    double rot{0.05};
};

/// Per-entity equality within tolerance; grip status must agree exactly.
[[nodiscard]] inline bool states_match(const WorldState& a, const WorldState& b, const MatchTolerance& tol) {
    if (a.objects.size() != b.objects.size() || a.held != b.held) return false;
    const auto close = [&](const Pose2& p, const Pose2& q) {
        return norm(p.position() - q.position()) <= tol.pos && std::abs(angle_diff(p.theta, q.theta)) <= tol.rot;
    };
    if (!close(a.gripper, b.gripper)) return false;
    for (std::size_t i = 0; i < a.objects.size(); ++i)
        if (!close(a.objects[i], b.objects[i])) return false;
    return true;
}

struct StateCondition {
    WorldState state;
    MatchTolerance tol;
};

struct GoalCondition {
    GoalSpec goal;
};

using Condition = std::variant<StateCondition, GoalCondition>;

[[nodiscard]] inline bool satisfies(const Condition& c, const WorldState& s) {
    if (const auto* sc = std::get_if<StateCondition>(&c)) return states_match(s, sc->state, sc->tol);
    return goal_satisfied(std::get<GoalCondition>(c).goal, s);
}

struct SkillOutcome {
    std::vector<Trajectory> trajectories;
    std::vector<bool> valid;
    std::optional<std::size_t> selected;

    [[nodiscard]] bool any_valid() const noexcept { return selected.has_value(); }
    [[nodiscard]] std::size_t valid_count() const noexcept {
        return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), true));
    }
    [[nodiscard]] const Trajectory& representative() const {
        if (!selected) throw UndefinedCostError("outcome has no valid trajectory");
        return trajectories[*selected];
    }
};

struct SkillConfig {
    std::size_t batch{8};
    MatchTolerance match;
    double lambda{1.0};  // confidence weighting of the invalid fraction
    bool noise{true};

    double finger_depth{0.02};
    double finger_half_width{0.004};
    int grasp_samples{32};
    int grasp_candidates{16};
    double grasp_score_min{0.5};
    double grasp_jitter{0.02};
    double pregrasp_offset{0.06};
    double retract_distance{0.08};
    int context_attempts{20};

    std::vector<SkillName> enabled{SkillName::pick, SkillName::push, SkillName::transport};
};

/// Picks the shortest valid trajectory (lowest index on ties).
inline void select_representative(SkillOutcome& out, double w_theta) {
    out.selected.reset();
    double best = 0;
    for (std::size_t k = 0; k < out.trajectories.size(); ++k) {
        if (!out.valid[k]) continue;
        const double len = out.trajectories[k].path_length(w_theta);
        if (!out.selected || len < best) {
            out.selected = k;
            best = len;
        }
    }
}

/// cost = mean valid path length * (1 + lambda * invalid fraction).
[[nodiscard]] inline double outcome_cost(const SkillOutcome& out, double lambda, double w_theta) {
    const std::size_t k = out.trajectories.size();
    const std::size_t nv = out.valid_count();
    if (k == 0 || nv == 0) throw UndefinedCostError("outcome_cost: no valid trajectory");
    double total = 0;
    for (std::size_t i = 0; i < k; ++i)
        if (out.valid[i]) total += out.trajectories[i].path_length(w_theta);
    const double mean = total / static_cast<double>(nv);
    const double f_inv = static_cast<double>(k - nv) / static_cast<double>(k);
    return std::max(mean, 1e-9) * (1.0 + lambda * f_inv);
}

/// Antipodal grasp quality: mean |n_i . d_g| over boundary normals sampled inside the finger band on
/// both sides of the grasp line. `closing_angle` is the heading of the finger-closing direction d_g.
[[nodiscard]] inline double grasp_score(const ObjectSpec& obj, const Pose2& pose, double closing_angle,
                                        int samples = 32, double half_width = 0.004) {
    if (!obj.graspable) throw CapabilityError("grasp_score: object '" + obj.id + "' is not graspable");
    const Vec2 d = unit_from_angle(closing_angle);
    const Vec2 lateral = perp(d);
    const double reach = bounding_radius(obj.shape) + 1.0;
    const int per_side = std::max(1, samples / 2);
    double sum = 0;
    int count = 0;
    for (const double side : {1.0, -1.0}) {
        for (int j = 0; j < per_side; ++j) {
            const double off = -half_width + 2.0 * half_width * (j + 0.5) / per_side;
            const Vec2 origin = pose.position() + off * lateral - side * reach * d;
            const auto hit = ray_entry(obj.shape, pose, origin, side * d);
            if (hit) sum += std::abs(dot(hit->normal, d));
            ++count;
        }
    }
    return sum / count;
}

/// A grasp: gripper poses for approach, contact and retract.
struct GraspPlan {
    double heading{0};
    Pose2 pregrasp;
    Pose2 grasp;
    Pose2 retract;
    double score{0};
};

namespace detail {

inline bool strictly_inside(const Rect& r, Vec2 p) {
    return p.x > r.min.x && p.x < r.max.x && p.y > r.min.y && p.y < r.max.y;
}

/// Grasp for approach heading `heading`; nullopt when geometrically infeasible.
inline std::optional<GraspPlan> plan_grasp(const Scenario& sc, const SkillConfig& cfg, std::size_t obj,
                                           const Pose2& pose, double heading) {
    const ObjectSpec& spec = sc.objects[obj];
    if (!spec.graspable) return std::nullopt;
    const Vec2 u = unit_from_angle(heading);
    Vec2 grasp_point;
    if (spec.top_grasp) {
        grasp_point = pose.position();
    } else {
        const double reach = bounding_radius(spec.shape) + 1.0;
        const auto hit = ray_entry(spec.shape, pose, pose.position() - reach * u, u);
        if (!hit) return std::nullopt;
        // side grasp: the finger band must overhang the table edge by the finger depth
        for (int i = 0; i <= 4; ++i) {
            if (strictly_inside(sc.table, hit->point + (cfg.finger_depth * i / 4.0) * u)) return std::nullopt;
        }
        grasp_point = hit->point + 0.5 * cfg.finger_depth * u;
    }
    const double score =
        grasp_score(spec, pose, heading + std::numbers::pi / 2, cfg.grasp_samples, cfg.finger_half_width);
    if (score < cfg.grasp_score_min) return std::nullopt;
    GraspPlan g;
    g.heading = heading;
    g.grasp = Pose2(grasp_point, heading);
    g.pregrasp = Pose2(grasp_point - cfg.pregrasp_offset * u, heading);
    g.retract = spec.top_grasp ? g.grasp : Pose2(grasp_point - cfg.retract_distance * u, heading);
    if (!gripper_ok(sc, g.pregrasp) || !gripper_ok(sc, g.grasp) || !gripper_ok(sc, g.retract)) return std::nullopt;
    g.score = score;
    return g;
}

/// Best grasp over evenly spaced candidate headings starting at `preferred`.
inline std::optional<GraspPlan> best_grasp(const Scenario& sc, const SkillConfig& cfg, std::size_t obj,
                                           const Pose2& pose, double preferred) {
    std::optional<GraspPlan> best;
    const int n = std::max(1, cfg.grasp_candidates);
    for (int j = 0; j < n; ++j) {
        auto g = plan_grasp(sc, cfg, obj, pose, preferred + 2.0 * std::numbers::pi * j / n);
        if (g && (!best || g->score > best->score + 1e-12)) best = g;
    }
    return best;
}

inline SimResult invalid_result(WorldState s) { return {Trajectory::singleton(std::move(s)), false}; }

struct Route {
    std::vector<Pose2> waypoints;  // ends at the target
    PathShape shape{PathShape::straight};
};

/// Gripper route to `target`: direct (first `shape`, then straight) or, when that collides, through
/// a single detour waypoint. Held objects follow the gripper.
inline std::optional<Route> find_route(const Scenario& sc, const WorldState& from, const Pose2& target,
                                       PathShape shape = PathShape::straight) {
    const auto clear = [&](const Route& r) {
        MotionBuilder mb(sc, from);
        for (const auto& p : r.waypoints) mb.move_gripper(p, r.shape);
        return mb.valid();
    };
    Route direct{{target}, shape};
    if (clear(direct)) return direct;
    if (shape != PathShape::straight) {
        direct.shape = PathShape::straight;
        if (clear(direct)) return direct;
    }
    constexpr int kAngles = 16;
    for (const double radius : {0.15, 0.3}) {
        for (int j = 0; j < kAngles; ++j) {
            const Pose2 via(target.position() + radius * unit_from_angle(2.0 * std::numbers::pi * j / kAngles),
                            target.theta);
            Route detour{{via, target}, PathShape::straight};
            if (clear(detour)) return detour;
        }
    }
    return std::nullopt;
}

/// Moves along a route from find_route, or attempts the direct motion when there is none.
inline void follow_route(MotionBuilder& mb, const Pose2& target, PathShape shape = PathShape::straight) {
    if (!mb.valid()) return;
    const auto route = find_route(mb.scenario(), mb.current(), target, shape);
    if (!route) {
        mb.move_gripper(target, shape);
        return;
    }
    for (const auto& p : route->waypoints) mb.move_gripper(p, route->shape);
}

/// Skill-level push: routes the open gripper to the contact pose, then runs the push model.
inline SimResult routed_push(const Scenario& sc, const WorldState& s, std::size_t obj, Vec2 direction,
                             double distance, std::uint64_t seed, PushNoise noise) {
    const Vec2 dir = (1.0 / norm(direction)) * direction;
    const Pose2 contact = pre_push_pose(sc, s, obj, dir);
    if (norm(contact.position() - s.gripper.position()) == 0 && contact.theta == s.gripper.theta)
        return simulate_push(sc, s, obj, direction, distance, seed, noise);
    MotionBuilder mb(sc, s);
    follow_route(mb, contact);
    if (!mb.valid()) return std::move(mb).finish();
    SimResult approach = std::move(mb).finish();
    SimResult push = simulate_push(sc, approach.trajectory.back(), obj, direction, distance, seed, noise);
    std::vector<WorldState> states;
    for (const auto& smp : approach.trajectory.samples()) states.push_back(smp.state);
    for (std::size_t i = 1; i < push.trajectory.size(); ++i) states.push_back(push.trajectory.samples()[i].state);
    return {Trajectory::from_states(std::move(states)), push.valid};
}

/// Executes approach, grasp and retract from `s` (gripper already anywhere; travels to the pregrasp).
inline SimResult execute_pick(const Scenario& sc, const WorldState& s, std::size_t obj, const GraspPlan& g) {
    MotionBuilder mb(sc, s);
    follow_route(mb, g.pregrasp);
    mb.move_gripper(g.grasp, PathShape::screw);
    mb.set_grip(obj);
    mb.move_gripper(g.retract, PathShape::screw);
    return std::move(mb).finish();
}

inline std::vector<std::size_t> differing_objects(const WorldState& a, const WorldState& b, const MatchTolerance& tol) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < a.objects.size(); ++i) {
        const Pose2& p = a.objects[i];
        const Pose2& q = b.objects[i];
        if (norm(p.position() - q.position()) > tol.pos || std::abs(angle_diff(p.theta, q.theta)) > tol.rot)
            out.push_back(i);
    }
    return out;
}

inline Vec2 sample_in(Rng& rng, const Rect& r) { return {uniform(rng, r.min.x, r.max.x), uniform(rng, r.min.y, r.max.y)}; }

inline Rect shrink(const Rect& r, double m) {
    Rect out{{r.min.x + m, r.min.y + m}, {r.max.x - m, r.max.y - m}};
    if (out.min.x > out.max.x) out.min.x = out.max.x = r.center().x;
    if (out.min.y > out.max.y) out.min.y = out.max.y = r.center().y;
    return out;
}

/// Moves the held object so that its pose becomes `placement`, then releases it.
inline void carry_and_place(MotionBuilder& mb, const Pose2& placement, bool release) {
    const WorldState& cur = mb.current();
    const Pose2 rel = relative(cur.gripper, cur.objects[*cur.held]);
    const Pose2 target = compose(placement, inverse(rel));
    follow_route(mb, target, PathShape::screw);
    if (release) mb.set_grip(std::nullopt);
}

}  // namespace detail

/// Stateless skill implementations bound to one scenario and configuration.
class SkillLibrary {
public:
    SkillLibrary(const Scenario& sc, SkillConfig cfg = {}) : sc_(&sc), cfg_(std::move(cfg)) {}

    [[nodiscard]] const Scenario& scenario() const noexcept { return *sc_; }
    [[nodiscard]] const SkillConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] const std::vector<SkillName>& skills() const noexcept { return cfg_.enabled; }
    [[nodiscard]] bool has(SkillName n) const {
        return std::find(cfg_.enabled.begin(), cfg_.enabled.end(), n) != cfg_.enabled.end();
    }

    [[nodiscard]] std::vector<SkillName> generators() const {
        std::vector<SkillName> out;
        for (SkillName n : cfg_.enabled)
            if (skill_id(n).can_generate) out.push_back(n);
        return out;
    }
    [[nodiscard]] std::vector<SkillName> connectors() const {
        std::vector<SkillName> out;
        for (SkillName n : cfg_.enabled)
            if (skill_id(n).can_connect) out.push_back(n);
        return out;
    }

    /// Rolls out K variants of a generator from self-proposed context states.
    [[nodiscard]] SkillOutcome invoke_generator(SkillName skill, const SkillParams& params, std::size_t k = 0) const {
        check_generator(skill, params);
        const auto ctx = generator_context(skill, params);
        SkillOutcome out;
        for (std::size_t i = 0; i < batch(k); ++i) add(out, run_generator(skill, params, ctx, i));
        select_representative(out, sc_->world.w_theta);
        return out;
    }

    /// Single generator rollout `index` of the batch (what invoke_generator produces at that index).
    [[nodiscard]] SimResult generator_rollout(SkillName skill, const SkillParams& params, std::size_t index) const {
        check_generator(skill, params);
        return run_generator(skill, params, generator_context(skill, params), index);
    }

    /// Rolls out K variants of a connector starting exactly at `from`; valid only if the terminal
    /// state satisfies `to`.
    [[nodiscard]] SkillOutcome invoke_connector(SkillName skill, const Condition& from, const Condition& to,
                                                const SkillParams& params, std::size_t k = 0) const {
        const WorldState& start = check_connector(skill, from, params);
        SkillOutcome out;
        for (std::size_t i = 0; i < batch(k); ++i) add(out, run_connector(skill, start, to, params, i));
        select_representative(out, sc_->world.w_theta);
        return out;
    }

    [[nodiscard]] SimResult connector_rollout(SkillName skill, const Condition& from, const Condition& to,
                                              const SkillParams& params, std::size_t index) const {
        return run_connector(skill, check_connector(skill, from, params), to, params, index);
    }

    /// Start-conditioned generator (initial-value form) used by the sequential baselines.
    [[nodiscard]] SkillOutcome invoke_from_state(SkillName skill, const WorldState& from, const SkillParams& params,
                                                 std::size_t k = 0) const {
        check_conditioned(skill, from, params);
        SkillOutcome out;
        for (std::size_t i = 0; i < batch(k); ++i) add(out, run_conditioned(skill, from, params, i));
        select_representative(out, sc_->world.w_theta);
        return out;
    }

    [[nodiscard]] SimResult conditioned_rollout(SkillName skill, const WorldState& from, const SkillParams& params,
                                                std::size_t index) const {
        check_conditioned(skill, from, params);
        return run_conditioned(skill, from, params, index);
    }

    /// Context state of a pick generator (nullopt when no feasible context was found).
    [[nodiscard]] std::optional<std::pair<WorldState, GraspPlan>> pick_context(std::uint64_t seed,
                                                                               const PickParams& p) const {
        Rng rng(mix_seed(seed, 0x91c4));
        const int attempts = p.object_pose ? 1 : cfg_.context_attempts;
        for (int a = 0; a < attempts; ++a) {
            WorldState s = sc_->start;
            s.held.reset();
            s.objects[p.object] = p.object_pose ? *p.object_pose : sample_edge_pose(rng, p.object);
            const auto g = detail::best_grasp(*sc_, cfg_, p.object, s.objects[p.object], p.grasp_angle);
            if (!g) continue;
            s.gripper = g->pregrasp;
            if (is_valid_state(*sc_, s)) return std::make_pair(std::move(s), *g);
        }
        return std::nullopt;
    }

    [[nodiscard]] std::optional<WorldState> push_context(std::uint64_t seed, const PushParams& p) const {
        const ObjectSpec& spec = sc_->objects[p.object];
        if (spec.mass == MassClass::heavy) return std::nullopt;
        Rng rng(mix_seed(seed, 0x5e7a));
        const Vec2 dir = (1.0 / norm(p.direction)) * p.direction;
        for (int a = 0; a < cfg_.context_attempts; ++a) {
            WorldState s = sc_->start;
            s.held.reset();
            s.objects[p.object] = Pose2(detail::sample_in(rng, sc_->table), sc_->start.objects[p.object].theta);
            s.gripper = pre_push_pose(*sc_, s, p.object, dir);
            if (is_valid_state(*sc_, s)) return s;
        }
        return std::nullopt;
    }

private:
    struct GeneratorContext {
        std::optional<WorldState> state;
        double heading{0};
    };

    std::size_t batch(std::size_t k) const noexcept { return k ? k : cfg_.batch; }

    void check_generator(SkillName skill, const SkillParams& params) const {
        if (!skill_id(skill).can_generate) throw CapabilityError(std::string(to_string(skill)) + " cannot generate");
        check_params(skill, params);
    }

    const WorldState& check_connector(SkillName skill, const Condition& from, const SkillParams& params) const {
        if (!skill_id(skill).can_connect) throw CapabilityError(std::string(to_string(skill)) + " cannot connect");
        const auto* start = std::get_if<StateCondition>(&from);
        if (!start) throw InputError("connector start condition must be an equality condition");
        check_params(skill, params);
        check_state_shape(*sc_, start->state);
        return start->state;
    }

    void check_conditioned(SkillName skill, const WorldState& from, const SkillParams& params) const {
        if (!skill_id(skill).can_generate)
            throw CapabilityError(std::string(to_string(skill)) + " has no start-conditioned form");
        check_params(skill, params);
        check_state_shape(*sc_, from);
    }

    GeneratorContext generator_context(SkillName skill, const SkillParams& params) const {
        GeneratorContext ctx;
        if (skill == SkillName::push) {
            ctx.state = push_context(params.seed, std::get<PushParams>(params.fields));
        } else if (auto pc = pick_context(params.seed, std::get<PickParams>(params.fields))) {
            ctx.state = std::move(pc->first);
            ctx.heading = pc->second.heading;
        }
        return ctx;
    }

    SimResult run_generator(SkillName skill, const SkillParams& params, const GeneratorContext& ctx,
                            std::size_t i) const {
        if (!ctx.state) return detail::invalid_result(sc_->start);
        if (skill == SkillName::push) {
            const auto& p = std::get<PushParams>(params.fields);
            return simulate_push(*sc_, *ctx.state, p.object, p.direction, p.distance, params.seed + i, {cfg_.noise});
        }
        return pick_rollout(*ctx.state, std::get<PickParams>(params.fields).object, ctx.heading, params.seed + i);
    }

    SimResult run_connector(SkillName skill, const WorldState& from, const Condition& to, const SkillParams& params,
                            std::size_t i) const {
        SimResult r = connect_rollout(skill, from, to, params, params.seed + i);
        if (r.valid && !satisfies(to, r.trajectory.back())) r.valid = false;
        return r;
    }

    SimResult run_conditioned(SkillName skill, const WorldState& from, const SkillParams& params,
                              std::size_t i) const {
        if (skill == SkillName::push) {
            const auto& p = std::get<PushParams>(params.fields);
            if (from.held || sc_->objects[p.object].mass == MassClass::heavy) return detail::invalid_result(from);
            return detail::routed_push(*sc_, from, p.object, p.direction, p.distance, params.seed + i, {cfg_.noise});
        }
        const auto& p = std::get<PickParams>(params.fields);
        if (from.held) return detail::invalid_result(from);
        const auto g = detail::best_grasp(*sc_, cfg_, p.object, from.objects[p.object], p.grasp_angle);
        if (!g) return detail::invalid_result(from);
        return pick_rollout(from, p.object, g->heading, params.seed + i);
    }

    void check_params(SkillName skill, const SkillParams& params) const {
        if (params.skill() != skill) throw ParameterError("parameters do not belong to skill " + std::string(to_string(skill)));
        if (params.seed >= kSeedRange) throw ParameterError("seed outside [0, 2^32)");
        std::visit(
            [&](const auto& f) {
                if (f.object >= sc_->objects.size()) throw InputError("unknown object index");
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, PushParams>) {
                    if (!(f.distance > 0 && f.distance <= sc_->world.max_push))
                        throw ParameterError("push distance must lie in (0, 0.25]");
                    if (!(norm(f.direction) > 0)) throw ParameterError("push direction must be nonzero");
                }
            },
            params.fields);
    }

    void add(SkillOutcome& out, SimResult r) const {
        out.valid.push_back(r.valid);
        out.trajectories.push_back(std::move(r.trajectory));
    }

    Pose2 sample_edge_pose(Rng& rng, std::size_t obj) const {
        const Rect& t = sc_->table;
        const double extent = bounding_radius(sc_->objects[obj].shape);
        const double w = t.width();
        const double h = t.height();
        const double along = uniform(rng, 0.0, 2 * (w + h));
        const double inset = uniform(rng, 0.0, extent);
        Vec2 c;
        if (along < w) c = {t.min.x + along, t.min.y + inset};
        else if (along < w + h) c = {t.max.x - inset, t.min.y + (along - w)};
        else if (along < 2 * w + h) c = {t.max.x - (along - w - h), t.max.y - inset};
        else c = {t.min.x + inset, t.max.y - (along - 2 * w - h)};
        return Pose2(c, sc_->start.objects[obj].theta);
    }

    SimResult pick_rollout(const WorldState& s, std::size_t obj, double heading, std::uint64_t seed) const {
        double h = heading;
        if (cfg_.noise) {
            Rng rng(seed);
            h += gaussian(rng, cfg_.grasp_jitter);
        }
        const auto g = detail::plan_grasp(*sc_, cfg_, obj, s.objects[obj], h);
        if (!g) return detail::invalid_result(s);
        return detail::execute_pick(*sc_, s, obj, *g);
    }

    SimResult connect_rollout(SkillName skill, const WorldState& from, const Condition& to, const SkillParams& params,
                              std::uint64_t seed) const {
        switch (skill) {
            case SkillName::push: return push_connect(from, to, seed);
            case SkillName::transport: return transport_connect(from, to, std::get<TransportParams>(params.fields), seed);
            case SkillName::rearrange: return rearrange_connect(from, to, std::get<RearrangeParams>(params.fields), seed);
            case SkillName::pick: break;
        }
        throw CapabilityError("pick cannot connect");
    }

    SimResult push_connect(const WorldState& from, const Condition& to, std::uint64_t seed) const {
        if (from.held) return detail::invalid_result(from);
        std::size_t obj = 0;
        Vec2 delta;
        const StateCondition* target = std::get_if<StateCondition>(&to);
        if (target) {
            if (target->state.held) return detail::invalid_result(from);
            const auto diff = detail::differing_objects(from, target->state, target->tol);
            if (diff.size() != 1) return detail::invalid_result(from);
            obj = diff.front();
            const Pose2& a = from.objects[obj];
            const Pose2& b = target->state.objects[obj];
            if (std::abs(angle_diff(b.theta, a.theta)) > target->tol.rot) return detail::invalid_result(from);
            delta = b.position() - a.position();
        } else {
            const GoalSpec& goal = std::get<GoalCondition>(to).goal;
            obj = goal.target;
            delta = goal.region.center() - from.objects[obj].position();
        }
        const double dist = norm(delta);
        if (!(dist > 0) || dist > sc_->world.max_push || sc_->objects[obj].mass == MassClass::heavy)
            return detail::invalid_result(from);
        SimResult r = detail::routed_push(*sc_, from, obj, delta, dist, seed, {cfg_.noise});
        if (!r.valid || !target) return r;
        MotionBuilder mb(*sc_, r.trajectory.back());
        detail::follow_route(mb, target->state.gripper);
        return concat(std::move(r), std::move(mb).finish());
    }

    SimResult transport_connect(const WorldState& from, const Condition& to, const TransportParams& p,
                                std::uint64_t seed) const {
        if (!from.held || *from.held != p.object) return detail::invalid_result(from);
        const std::size_t obj = *from.held;
        if (const auto* target = std::get_if<StateCondition>(&to)) {
            const WorldState& goal_state = target->state;
            if (goal_state.held != from.held) return detail::invalid_result(from);
            for (std::size_t i = 0; i < from.objects.size(); ++i) {
                if (i == obj) continue;
                if (!states_match_pose(from.objects[i], goal_state.objects[i], target->tol))
                    return detail::invalid_result(from);
            }
            const Pose2 rel = relative(from.gripper, from.objects[obj]);
            if (!states_match_pose(compose(goal_state.gripper, rel), goal_state.objects[obj], target->tol))
                return detail::invalid_result(from);
            return routed_move(from, goal_state.gripper);
        }
        const GoalSpec& goal = std::get<GoalCondition>(to).goal;
        if (goal.target != obj) return detail::invalid_result(from);
        Rng rng(seed);
        const Rect place = detail::shrink(goal.region, bounding_radius(sc_->objects[obj].shape));
        const Pose2 placement(detail::sample_in(rng, place), from.objects[obj].theta);
        const Pose2 rel = relative(from.gripper, from.objects[obj]);
        const Pose2 gripper_target = compose(placement, inverse(rel));
        SimResult r = routed_move(from, gripper_target);
        if (!r.valid) return r;
        MotionBuilder mb(*sc_, r.trajectory.back());
        mb.set_grip(std::nullopt);
        return concat(std::move(r), std::move(mb).finish());
    }

    SimResult rearrange_connect(const WorldState& from, const Condition& to, const RearrangeParams& p,
                                std::uint64_t seed) const {
        if (from.held) return detail::invalid_result(from);
        std::vector<std::pair<std::size_t, Pose2>> moves;
        const StateCondition* target = std::get_if<StateCondition>(&to);
        if (target) {
            if (target->state.held) return detail::invalid_result(from);
            for (std::size_t i : detail::differing_objects(from, target->state, target->tol))
                moves.emplace_back(i, target->state.objects[i]);
        } else {
            const GoalSpec& goal = std::get<GoalCondition>(to).goal;
            const std::size_t obj = goal.target;
            Pose2 place = p.object == obj && goal.region.contains(p.target.position())
                              ? p.target
                              : Pose2(goal.region.center(), from.objects[obj].theta);
            moves.emplace_back(obj, place);
        }
        MotionBuilder mb(*sc_, from);
        for (const auto& [obj, pose] : moves) {
            if (!mb.valid()) break;
            const ObjectSpec& spec = sc_->objects[obj];
            const WorldState cur = mb.current();
            const Pose2& at = cur.objects[obj];
            const Vec2 delta = pose.position() - at.position();
            const double dist = norm(delta);
            const double rot = std::abs(angle_diff(pose.theta, at.theta));
            const bool pushable = spec.mass == MassClass::light && dist > 0 && dist <= sc_->world.max_push &&
                                  rot <= cfg_.match.rot;
            if (pushable) {
                SimResult r = detail::routed_push(*sc_, cur, obj, delta, dist, mix_seed(seed, obj), {cfg_.noise});
                for (std::size_t i = 1; i < r.trajectory.size(); ++i) mb.append_state(r.trajectory.samples()[i].state);
                if (!r.valid) return detail::invalid_result(from);
            } else if (spec.graspable && spec.top_grasp) {
                const auto g = detail::plan_grasp(*sc_, cfg_, obj, at, cur.gripper.theta);
                if (!g) return detail::invalid_result(from);
                detail::follow_route(mb, g->grasp);
                mb.set_grip(obj);
                detail::carry_and_place(mb, pose, true);
            } else {
                return detail::invalid_result(from);
            }
        }
        if (target) detail::follow_route(mb, target->state.gripper);
        return std::move(mb).finish();
    }

    static bool states_match_pose(const Pose2& a, const Pose2& b, const MatchTolerance& tol) {
        return norm(a.position() - b.position()) <= tol.pos && std::abs(angle_diff(a.theta, b.theta)) <= tol.rot;
    }

    SimResult routed_move(const WorldState& from, const Pose2& gripper_target) const {
        MotionBuilder mb(*sc_, from);
        detail::follow_route(mb, gripper_target, PathShape::screw);
        return std::move(mb).finish();
    }

    static SimResult concat(SimResult a, SimResult b) {
        std::vector<WorldState> states;
        states.reserve(a.trajectory.size() + b.trajectory.size());
        for (const auto& s : a.trajectory.samples()) states.push_back(s.state);
        for (std::size_t i = 1; i < b.trajectory.size(); ++i) states.push_back(b.trajectory.samples()[i].state);
        return {Trajectory::from_states(std::move(states)), a.valid && b.valid};
    }

    const Scenario* sc_;
    SkillConfig cfg_;
};

}  // namespace mosaic
