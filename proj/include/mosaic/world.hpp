#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mosaic/errors.hpp"
#include "mosaic/geometry.hpp"
#include "mosaic/pose.hpp"
#include "mosaic/rng.hpp"

namespace mosaic {

enum class MassClass { light, heavy };

struct ObjectSpec {
    std::string id;
    Shape shape;
    bool graspable{true};
    /// Height class admits a top-down grasp (plates do not).
    bool top_grasp{false};
    MassClass mass{MassClass::light};
};

struct GoalSpec {
    std::size_t target{0};  // index into Scenario::objects
    Rect region;
};

/// Free-flying gripper standing in for the arm.
struct RobotSpec {
    Vec2 base{0.0, -0.75};
    double reach{1.5};
    double gripper_radius{0.015};
};

/// Tolerances and noise of the world model; every field is scenario-file overridable.
struct WorldParams {
    double eps_pen{1e-6};
    double f_sup{0.5};
    double sigma_pos{0.01};
    double sigma_rot{0.05};
    double w_theta{0.1};
    double step{0.01};        // arc-length discretization, meters
    double angle_step{0.1};   // rotation discretization, radians
    double max_push{0.25};
};

struct WorldState {
    Pose2 gripper;
    std::optional<std::size_t> held;  // index of the grasped object, or open
    std::vector<Pose2> objects;       // one pose per Scenario::objects entry

    friend bool operator==(const WorldState&, const WorldState&) = default;
};

struct Scenario {
    std::string id;
    Rect table;
    Rect bin;
    std::vector<Polygon> static_obstacles;  // world-frame vertices
    std::vector<ObjectSpec> objects;
    WorldState start;
    GoalSpec goal;
    RobotSpec robot;
    WorldParams world;

    [[nodiscard]] std::size_t object_index(std::string_view id_) const {
        for (std::size_t i = 0; i < objects.size(); ++i)
            if (objects[i].id == id_) return i;
        throw InputError("unknown object id '" + std::string(id_) + "'");
    }

    [[nodiscard]] const Pose2& pose_of(const WorldState& s, std::string_view id_) const {
        const std::size_t i = object_index(id_);
        if (i >= s.objects.size()) throw InputError("state has no pose for '" + std::string(id_) + "'");
        return s.objects[i];
    }
};

inline void check_state_shape(const Scenario& sc, const WorldState& s) {
    if (s.objects.size() != sc.objects.size()) throw InputError("state object set does not match scenario");
    if (s.held && *s.held >= sc.objects.size()) throw InputError("held object index out of range");
}

/// Checks the structural invariants of a scenario; throws InputError.
inline void check_scenario(const Scenario& sc) {
    if (!(sc.table.width() > 0 && sc.table.height() > 0)) throw InputError("table must have positive area");
    if (!(sc.bin.width() > 0 && sc.bin.height() > 0)) throw InputError("bin must have positive area");
    if (sc.table.intersects(sc.bin)) throw InputError("bin must be disjoint from the table");
    if (!(sc.goal.region.width() > 0 && sc.goal.region.height() > 0))
        throw InputError("goal region must have positive area");
    if (sc.goal.target >= sc.objects.size()) throw InputError("goal target is not a scenario object");
    for (const auto& p : sc.static_obstacles) check_convex_ccw(p.vertices);
    for (std::size_t i = 0; i < sc.objects.size(); ++i) {
        check_shape(sc.objects[i].shape);
        for (std::size_t j = 0; j < i; ++j)
            if (sc.objects[i].id == sc.objects[j].id) throw InputError("duplicate object id " + sc.objects[i].id);
    }
    check_state_shape(sc, sc.start);
}

namespace detail {

inline bool gripper_ok(const Scenario& sc, const Pose2& g) {
    if (norm(g.position() - sc.robot.base) > sc.robot.reach) return false;
    for (const auto& obs : sc.static_obstacles)
        if (penetration_disc_polygon(g.position(), sc.robot.gripper_radius, obs.vertices) > sc.world.eps_pen)
            return false;
    return true;
}

inline bool object_supported(const Scenario& sc, std::size_t i, const Pose2& p) {
    const Shape& shape = sc.objects[i].shape;
    if (fully_inside(shape, p, sc.bin)) return true;
    // small slack absorbs rounding in the exact-area computation at the cutoff
    return footprint_fraction_in(shape, p, sc.table) >= sc.world.f_sup - 1e-12;
}

inline bool object_ok(const Scenario& sc, const WorldState& s, std::size_t i) {
    const Shape& shape = sc.objects[i].shape;
    const Pose2& p = s.objects[i];
    for (const auto& obs : sc.static_obstacles)
        if (penetration(shape, p, Polygon{obs.vertices}, Pose2{}) > sc.world.eps_pen) return false;
    const bool held = s.held == i;
    if (held) return true;  // lifted: no support needed, passes over other objects
    for (std::size_t j = 0; j < s.objects.size(); ++j) {
        if (j == i || s.held == j) continue;
        if (penetration(shape, p, sc.objects[j].shape, s.objects[j]) > sc.world.eps_pen) return false;
    }
    return object_supported(sc, i, p);
}

}  // namespace detail

/// True iff the state has no penetration beyond eps_pen, every non-held object is supported,
/// and the gripper is within reach. Held objects are lifted: they are checked against static
/// obstacles only.
[[nodiscard]] inline bool is_valid_state(const Scenario& sc, const WorldState& s) {
    check_state_shape(sc, s);
    if (!detail::gripper_ok(sc, s.gripper)) return false;
    for (std::size_t i = 0; i < s.objects.size(); ++i)
        if (!detail::object_ok(sc, s, i)) return false;
    return true;
}

/// Goal region is closed: a center on the boundary counts as inside.
[[nodiscard]] inline bool goal_satisfied(const GoalSpec& goal, const WorldState& s) {
    if (goal.target >= s.objects.size()) throw InputError("goal target missing from state");
    return goal.region.contains(s.objects[goal.target].position());
}

[[nodiscard]] inline double state_distance(const WorldState& a, const WorldState& b, double w_theta) {
    if (a.objects.size() != b.objects.size()) throw InputError("state_distance: mismatched object sets");
    const auto term = [w_theta](const Pose2& p, const Pose2& q) {
        const double dx = p.x - q.x;
        const double dy = p.y - q.y;
        const double dt = angle_diff(p.theta, q.theta);
        return dx * dx + dy * dy + w_theta * dt * dt;
    };
    double sum = term(a.gripper, b.gripper);
    for (std::size_t i = 0; i < a.objects.size(); ++i) sum += term(a.objects[i], b.objects[i]);
    return std::sqrt(sum);
}

struct TrajectorySample {
    double t{0};
    WorldState state;
};

/// Normalized-time sequence of world states (t strictly increasing, 0 first, 1 last).
class Trajectory {
public:
    Trajectory() = default;

    /// Singleton trajectory {state} at t = 0.
    static Trajectory singleton(WorldState s) {
        Trajectory tr;
        tr.samples_.push_back({0.0, std::move(s)});
        return tr;
    }

    /// Builds from states with uniform normalized time stamps.
    static Trajectory from_states(std::vector<WorldState> states) {
        if (states.empty()) throw InputError("trajectory needs at least one sample");
        Trajectory tr;
        const std::size_t n = states.size();
        tr.samples_.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = n == 1 ? 0.0 : (i + 1 == n ? 1.0 : static_cast<double>(i) / static_cast<double>(n - 1));
            tr.samples_.push_back({t, std::move(states[i])});
        }
        return tr;
    }

    [[nodiscard]] const std::vector<TrajectorySample>& samples() const noexcept { return samples_; }
    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
    [[nodiscard]] bool empty() const noexcept { return samples_.empty(); }
    [[nodiscard]] const WorldState& front() const { return samples_.front().state; }
    [[nodiscard]] const WorldState& back() const { return samples_.back().state; }

    /// Summed per-sample state distance.
    [[nodiscard]] double path_length(double w_theta) const {
        double len = 0;
        for (std::size_t i = 1; i < samples_.size(); ++i)
            len += state_distance(samples_[i - 1].state, samples_[i].state, w_theta);
        return len;
    }

    friend bool operator==(const Trajectory& a, const Trajectory& b) {
        if (a.samples_.size() != b.samples_.size()) return false;
        for (std::size_t i = 0; i < a.samples_.size(); ++i)
            if (a.samples_[i].t != b.samples_[i].t || !(a.samples_[i].state == b.samples_[i].state)) return false;
        return true;
    }

private:
    std::vector<TrajectorySample> samples_;
};

/// Result of simulating one motion: the sampled trajectory and whether every state was valid.
struct SimResult {
    Trajectory trajectory;
    bool valid{false};
};

enum class PathShape { screw, straight };

/// Incrementally simulates motions from a start state, validating every appended sample.
/// Validation is incremental: only entities that moved are re-checked.
class MotionBuilder {
public:
    MotionBuilder(const Scenario& sc, WorldState start) : sc_(&sc) {
        check_state_shape(sc, start);
        valid_ = is_valid_state(sc, start);
        states_.push_back(std::move(start));
    }

    [[nodiscard]] const WorldState& current() const { return states_.back(); }
    [[nodiscard]] const Scenario& scenario() const noexcept { return *sc_; }
    [[nodiscard]] bool valid() const noexcept { return valid_; }

    /// Moves the gripper to `target`; a held object follows rigidly.
    MotionBuilder& move_gripper(const Pose2& target, PathShape shape = PathShape::straight) {
        if (!valid_) return *this;
        const WorldState from = current();
        const double ang = std::abs(angle_diff(target.theta, from.gripper.theta));
        const double lin = norm(target.position() - from.gripper.position());
        if (lin == 0 && ang == 0) return *this;
        const int n = steps_for(lin, ang);
        std::optional<Pose2> grasp_rel;
        if (from.held) grasp_rel = relative(from.gripper, from.objects[*from.held]);
        for (int i = 1; i <= n; ++i) {
            const double s = static_cast<double>(i) / n;
            WorldState next = from;
            next.gripper = i == n ? target
                                  : (shape == PathShape::screw ? interpolate_screw(from.gripper, target, s)
                                                               : interpolate_linear(from.gripper, target, s));
            if (grasp_rel) next.objects[*from.held] = compose(next.gripper, *grasp_rel);
            if (!append(std::move(next), from.held)) break;
        }
        return *this;
    }

    /// Translates gripper and object `obj` together by `delta`, rotating the object by `dtheta`.
    MotionBuilder& push_together(std::size_t obj, Vec2 delta, double dtheta) {
        if (!valid_) return *this;
        const WorldState from = current();
        const int n = steps_for(norm(delta), std::abs(dtheta));
        for (int i = 1; i <= n; ++i) {
            const double s = static_cast<double>(i) / n;
            WorldState next = from;
            next.gripper = Pose2(from.gripper.position() + s * delta, from.gripper.theta);
            const Pose2& o = from.objects[obj];
            next.objects[obj] = Pose2(o.position() + s * delta, o.theta + s * dtheta);
            if (!append(std::move(next), obj)) break;
        }
        return *this;
    }

    /// Closes the gripper on `obj` (grip = holding) or opens it (nullopt).
    MotionBuilder& set_grip(std::optional<std::size_t> obj) {
        if (!valid_) return *this;
        WorldState next = current();
        const auto released = next.held;
        next.held = obj;
        append(std::move(next), obj ? obj : released);
        return *this;
    }

    /// Appends a prebuilt state, checking it in full.
    MotionBuilder& append_state(WorldState s) {
        if (!valid_) return *this;
        check_state_shape(*sc_, s);
        if (!is_valid_state(*sc_, s)) valid_ = false;
        states_.push_back(std::move(s));
        return *this;
    }

    [[nodiscard]] SimResult finish() && { return {Trajectory::from_states(std::move(states_)), valid_}; }

private:
    int steps_for(double lin, double ang) const {
        const double n = std::max(lin / sc_->world.step, ang / sc_->world.angle_step);
        return std::max(1, static_cast<int>(std::ceil(n - 1e-9)));
    }

    bool append(WorldState s, std::optional<std::size_t> moved) {
        bool ok = detail::gripper_ok(*sc_, s.gripper);
        if (ok && moved) {
            ok = detail::object_ok(*sc_, s, *moved);
        }
        states_.push_back(std::move(s));
        if (!ok) valid_ = false;
        return ok;
    }

    const Scenario* sc_;
    std::vector<WorldState> states_;
    bool valid_{true};
};

/// Noise toggle for the push model.
struct PushNoise {
    bool enabled{true};
};

/// Gripper position that touches the object from the side opposite to `dir`.
[[nodiscard]] inline Pose2 pre_push_pose(const Scenario& sc, const WorldState& s, std::size_t obj, Vec2 dir) {
    const Pose2& p = s.objects[obj];
    const double extent = support_extent(sc.objects[obj].shape, p.theta, -dir);
    return Pose2(p.position() - (extent + sc.robot.gripper_radius) * dir, std::atan2(dir.y, dir.x));
}

/// Quasi-static push: the gripper travels in a straight line to the contact point behind the object,
/// then gripper and object translate together along `direction`. With noise enabled the travelled
/// distance slips by N(0, sigma_pos) and, for polygons, the heading drifts by N(0, sigma_rot); discs are
/// rotationally symmetric and keep their heading.
[[nodiscard]] inline SimResult simulate_push(const Scenario& sc, const WorldState& s, std::size_t obj, Vec2 direction,
                                             double distance, std::uint64_t seed, PushNoise noise = {}) {
    check_state_shape(sc, s);
    if (obj >= sc.objects.size()) throw InputError("push: unknown object");
    if (!(distance > 0 && distance <= sc.world.max_push)) throw ParameterError("push distance must lie in (0, max_push]");
    const double len = norm(direction);
    if (!(len > 0)) throw ParameterError("push direction must be nonzero");
    if (sc.objects[obj].mass == MassClass::heavy) throw PreconditionError("push: object is heavy");
    if (s.held) throw PreconditionError("push: gripper must be open");
    const Vec2 dir = (1.0 / len) * direction;

    double travelled = distance;
    double drift = 0.0;
    if (noise.enabled) {
        Rng rng(seed);
        travelled = std::max(0.0, distance + gaussian(rng, sc.world.sigma_pos));
        const double d_rot = gaussian(rng, sc.world.sigma_rot);
        if (std::holds_alternative<Polygon>(sc.objects[obj].shape)) drift = d_rot;
    }
    MotionBuilder mb(sc, s);
    mb.move_gripper(pre_push_pose(sc, s, obj, dir));
    if (travelled > 0) mb.push_together(obj, travelled * dir, drift);
    return std::move(mb).finish();
}

}  // namespace mosaic
