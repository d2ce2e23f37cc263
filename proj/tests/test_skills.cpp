#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_util.hpp"

using namespace mosaic;
using namespace mosaic::testing;

namespace {

constexpr double kPi = std::numbers::pi;

ObjectSpec square_object(double half) {
    return {"box", Polygon{{{-half, -half}, {half, -half}, {half, half}, {-half, half}}}, true, false,
            MassClass::light};
}

/// Brute-force grasp quality: dense boundary sampling of a convex polygon, keeping boundary points
/// that lie inside the finger band and face one of the closing fingers.
double brute_force_polygon_score(const Polygon& poly, const Pose2& pose, double closing_angle, double half_width) {
    const auto pts = world_vertices(poly, pose);
    const Vec2 d = unit_from_angle(closing_angle);
    const Vec2 lateral = perp(d);
    double sum = 0;
    int n = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec2 a = pts[i];
        const Vec2 b = pts[(i + 1) % pts.size()];
        const Vec2 e = b - a;
        const Vec2 normal = (1.0 / norm(e)) * Vec2{e.y, -e.x};
        for (int k = 0; k < 20000; ++k) {
            const Vec2 p = a + ((k + 0.5) / 20000.0) * e;
            if (std::abs(dot(p - pose.position(), lateral)) > half_width) continue;
            if (std::abs(dot(normal, d)) < 1e-12) continue;  // faces parallel to the closing line are never touched
            sum += std::abs(dot(normal, d));
            ++n;
        }
    }
    return n ? sum / n : 0.0;
}

SkillOutcome outcome_with_lengths(const std::vector<double>& lengths, const std::vector<bool>& valid) {
    SkillOutcome out;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        const WorldState a = simple_state({0, 0});
        WorldState b = a;
        b.gripper = Pose2(a.gripper.x + lengths[i], a.gripper.y, a.gripper.theta);
        out.trajectories.push_back(Trajectory::from_states({a, b}));
        out.valid.push_back(valid[i]);
    }
    select_representative(out, 0.1);
    return out;
}

}  // namespace

TEST(Capability, Matrix) {
    EXPECT_TRUE(skill_id(SkillName::pick).can_generate);
    EXPECT_FALSE(skill_id(SkillName::pick).can_connect);
    EXPECT_TRUE(skill_id(SkillName::push).can_generate);
    EXPECT_TRUE(skill_id(SkillName::push).can_connect);
    EXPECT_FALSE(skill_id(SkillName::transport).can_generate);
    EXPECT_TRUE(skill_id(SkillName::transport).can_connect);
    EXPECT_FALSE(skill_id(SkillName::rearrange).can_generate);
    EXPECT_TRUE(skill_id(SkillName::rearrange).can_connect);
    EXPECT_EQ(parse_skill_name("transport"), SkillName::transport);
    EXPECT_THROW((void)parse_skill_name("fly"), InputError);
}

TEST(GraspScore, DiscIsAntipodalFromAnyAngle) {
    const ObjectSpec disc{"d", Disc{0.1}, true, false, MassClass::light};
    for (double a : {0.0, 0.4, -2.0, kPi})
        EXPECT_NEAR(grasp_score(disc, Pose2(0.3, -0.1, 0.2), a), 1.0, 1e-3);
}

TEST(GraspScore, SquareAcrossParallelFaces) {
    const ObjectSpec sq = square_object(0.03);
    EXPECT_NEAR(grasp_score(sq, Pose2(), 0.0), 1.0, 1e-12);
    EXPECT_NEAR(grasp_score(sq, Pose2(0, 0, kPi / 2), 0.0), 1.0, 1e-12);
    EXPECT_NEAR(brute_force_polygon_score(std::get<Polygon>(sq.shape), Pose2(), 0.0, 0.004), 1.0, 1e-12);
}

TEST(GraspScore, SquareAcrossCornerMatchesBruteForce) {
    const ObjectSpec sq = square_object(0.03);
    const Pose2 pose(0.1, 0.2, kPi / 4);
    const double oracle = brute_force_polygon_score(std::get<Polygon>(sq.shape), pose, 0.0, 0.004);
    EXPECT_NEAR(oracle, std::sqrt(2.0) / 2, 1e-9);
    EXPECT_NEAR(grasp_score(sq, pose, 0.0), oracle, 1e-9);
}

TEST(GraspScore, NonGraspableIsCapabilityError) {
    ObjectSpec sq = square_object(0.03);
    sq.graspable = false;
    EXPECT_THROW((void)grasp_score(sq, Pose2(), 0.0), CapabilityError);
}

TEST(OutcomeCost, FormulaExamples) {
    const std::vector<double> ones(10, 1.0);
    EXPECT_NEAR(outcome_cost(outcome_with_lengths(ones, std::vector<bool>(10, true)), 1.0, 0.1), 1.0, 1e-12);
    std::vector<bool> seven(10, true);
    seven[1] = seven[4] = seven[8] = false;
    EXPECT_NEAR(outcome_cost(outcome_with_lengths(ones, seven), 1.0, 0.1), 1.3, 1e-12);
    EXPECT_NEAR(outcome_cost(outcome_with_lengths(ones, seven), 0.0, 0.1),
                outcome_cost(outcome_with_lengths(ones, std::vector<bool>(10, true)), 0.0, 0.1), 1e-12);
    EXPECT_THROW((void)outcome_cost(outcome_with_lengths(ones, std::vector<bool>(10, false)), 1.0, 0.1),
                 UndefinedCostError);
}

TEST(OutcomeCost, RepresentativeIsShortestValid) {
    const SkillOutcome out = outcome_with_lengths({3.0, 1.0, 0.5, 2.0}, {true, true, false, true});
    ASSERT_TRUE(out.selected);
    EXPECT_EQ(*out.selected, 1u);
    EXPECT_NEAR(out.representative().path_length(0.1), 1.0, 1e-12);
    const SkillOutcome none = outcome_with_lengths({1.0}, {false});
    EXPECT_THROW((void)none.representative(), UndefinedCostError);
}

TEST(PickGenerator, PlateOverhangingEdgeIsGraspable) {
    const Scenario sc = edge_plate_scenario(0.03);
    const SkillLibrary lib(sc, quiet_config());
    SkillParams p;
    p.seed = 4;
    p.fields = PickParams{0, kPi, sc.start.objects[0]};
    const SkillOutcome out = lib.invoke_generator(SkillName::pick, p);
    ASSERT_TRUE(out.any_valid());
    EXPECT_EQ(out.valid_count(), out.trajectories.size());
    const WorldState& end = out.representative().back();
    ASSERT_TRUE(end.held.has_value());
    EXPECT_EQ(*end.held, 0u);
}

TEST(PickGenerator, PlateAtCenterIsAllInvalid) {
    const Scenario sc = plate_at({0.0, 0.0});
    const SkillLibrary lib(sc, quiet_config());
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SkillParams p;
        p.seed = seed;
        p.fields = PickParams{0, 0.3 * static_cast<double>(seed), sc.start.objects[0]};
        const SkillOutcome out = lib.invoke_generator(SkillName::pick, p);
        EXPECT_FALSE(out.any_valid());
        EXPECT_EQ(out.valid_count(), 0u);
    }
}

TEST(PickGenerator, SideGraspNeedsFingerDepthOverhang) {
    const SkillConfig cfg = quiet_config();
    EXPECT_TRUE(detail::best_grasp(edge_plate_scenario(0.03), cfg, 0, Pose2(0.33, 0, 0), 0.0).has_value());
    EXPECT_FALSE(detail::best_grasp(edge_plate_scenario(0.015), cfg, 0, Pose2(0.315, 0, 0), 0.0).has_value());
}

TEST(PushGenerator, RepeatedCallsAreIdentical) {
    const Scenario sc = make_scenario(Family::transport, 2);
    const SkillLibrary lib(sc);
    const SkillParams p = push_params(0, {0.6, 0.8}, 0.2, 123);
    const SkillOutcome a = lib.invoke_generator(SkillName::push, p, 10);
    const SkillOutcome b = lib.invoke_generator(SkillName::push, p, 10);
    ASSERT_EQ(a.trajectories.size(), 10u);
    EXPECT_EQ(a.valid, b.valid);
    EXPECT_EQ(a.selected, b.selected);
    for (std::size_t i = 0; i < 10; ++i) {
        EXPECT_TRUE(a.trajectories[i] == b.trajectories[i]);
        EXPECT_TRUE(lib.generator_rollout(SkillName::push, p, i).trajectory == a.trajectories[i]);
    }
}

TEST(Generators, CapabilityAndParameterErrors) {
    const Scenario sc = make_scenario(Family::transport, 0);
    const SkillLibrary lib(sc);
    EXPECT_THROW((void)lib.invoke_generator(SkillName::transport, transport_params(0)), CapabilityError);
    EXPECT_THROW((void)lib.invoke_generator(SkillName::push, push_params(0, {1, 0}, 0.3)), ParameterError);
    EXPECT_THROW((void)lib.invoke_generator(SkillName::push, push_params(0, {1, 0}, -0.1)), ParameterError);
    EXPECT_THROW((void)lib.invoke_generator(SkillName::push, push_params(0, {0, 0}, 0.1)), ParameterError);
    EXPECT_THROW((void)lib.invoke_generator(SkillName::push, push_params(5, {1, 0}, 0.1)), InputError);
    EXPECT_THROW((void)lib.invoke_generator(SkillName::push, push_params(0, {1, 0}, 0.1, kSeedRange)), ParameterError);
    EXPECT_THROW((void)lib.invoke_generator(SkillName::pick, push_params(0, {1, 0}, 0.1)), ParameterError);
}

TEST(Connectors, CapabilityAndConditionErrors) {
    const Scenario sc = make_scenario(Family::transport, 0);
    const SkillLibrary lib(sc);
    const Condition from = StateCondition{sc.start, {}};
    const Condition goal = GoalCondition{sc.goal};
    SkillParams pick;
    pick.fields = PickParams{};
    EXPECT_THROW((void)lib.invoke_connector(SkillName::pick, from, goal, pick), CapabilityError);
    EXPECT_THROW((void)lib.invoke_connector(SkillName::transport, goal, goal, transport_params(0)), InputError);
}

TEST(Connectors, TransportRequiresGrasp) {
    const Scenario sc = edge_plate_scenario();
    const SkillLibrary lib(sc, quiet_config());
    const SkillOutcome out =
        lib.invoke_connector(SkillName::transport, StateCondition{sc.start, {}}, GoalCondition{sc.goal}, transport_params(0));
    EXPECT_FALSE(out.any_valid());
    EXPECT_EQ(out.valid_count(), 0u);
}

TEST(Connectors, TransportFromHeldStateReachesBin) {
    const Scenario sc = edge_plate_scenario();
    const SkillLibrary lib(sc, quiet_config());
    SkillParams p;
    p.seed = 2;
    p.fields = PickParams{0, kPi, sc.start.objects[0]};
    const auto picked = lib.invoke_from_state(SkillName::pick, sc.start, p);
    ASSERT_TRUE(picked.any_valid());
    const WorldState held = picked.representative().back();
    const SkillOutcome out = lib.invoke_connector(SkillName::transport, StateCondition{held, {}},
                                                  GoalCondition{sc.goal}, transport_params(0, 8));
    ASSERT_TRUE(out.any_valid());
    for (std::size_t i = 0; i < out.trajectories.size(); ++i) {
        EXPECT_EQ(out.trajectories[i].front(), held);
        if (out.valid[i]) {
            EXPECT_TRUE(goal_satisfied(sc.goal, out.trajectories[i].back()));
            EXPECT_FALSE(out.trajectories[i].back().held.has_value());
        }
    }
}

TEST(Connectors, PushBetweenNearbyStates) {
    const Scenario sc = plate_at({0.0, 0.0});
    const SkillLibrary lib(sc, quiet_config());
    const WorldState target = with_object(sc.start, 0, Pose2(0.1, 0.0, 0.0));
    const Condition to = StateCondition{target, {}};
    const SkillOutcome out = lib.invoke_connector(SkillName::push, StateCondition{sc.start, {}}, to, push_params(0, {1, 0}, 0.1));
    ASSERT_TRUE(out.any_valid());
    EXPECT_EQ(out.valid_count(), out.trajectories.size());
    for (const auto& t : out.trajectories) {
        EXPECT_EQ(t.front(), sc.start);
        EXPECT_TRUE(satisfies(to, t.back()));
    }
}

TEST(Connectors, PushBeyondLimitIsAllInvalid) {
    const Scenario sc = plate_at({-0.2, 0.0});
    const SkillLibrary lib(sc, quiet_config());
    const WorldState target = with_object(sc.start, 0, Pose2(0.2, 0.0, 0.0));
    const SkillOutcome out = lib.invoke_connector(SkillName::push, StateCondition{sc.start, {}},
                                                  StateCondition{target, {}}, push_params(0, {1, 0}, 0.1));
    EXPECT_FALSE(out.any_valid());
}

TEST(Connectors, NoisyRolloutsStartExactlyAtFrom) {
    const Scenario sc = plate_at({0.0, 0.0});
    const SkillLibrary lib(sc);
    const WorldState target = with_object(sc.start, 0, Pose2(0.0, 0.15, 0.0));
    const SkillOutcome out = lib.invoke_connector(SkillName::push, StateCondition{sc.start, {}},
                                                  StateCondition{target, {}}, push_params(0, {0, 1}, 0.1, 40), 16);
    for (std::size_t i = 0; i < out.trajectories.size(); ++i) {
        EXPECT_EQ(out.trajectories[i].front(), sc.start);
        EXPECT_EQ(static_cast<bool>(out.valid[i]), states_match(out.trajectories[i].back(), target, {}));
    }
}

TEST(Skills, StatesMatchBoundaries) {
    const WorldState a = simple_state({0, 0});
    EXPECT_TRUE(states_match(a, with_object(a, 0, Pose2(0.01, 0, 0)), {}));
    EXPECT_FALSE(states_match(a, with_object(a, 0, Pose2(0.0101, 0, 0)), {}));
    EXPECT_TRUE(states_match(a, with_object(a, 0, Pose2(0, 0, 0.05)), {}));
    EXPECT_FALSE(states_match(a, with_object(a, 0, Pose2(0, 0, 0.0501)), {}));
    WorldState held = a;
    held.held = 0;
    EXPECT_FALSE(states_match(a, held, {}));
}
