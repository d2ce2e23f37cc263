#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "test_util.hpp"

using namespace mosaic;

namespace {

constexpr double kPi = std::numbers::pi;

void expect_pose_near(const Pose2& a, const Pose2& b, double tol) {
    EXPECT_NEAR(a.x, b.x, tol);
    EXPECT_NEAR(a.y, b.y, tol);
    EXPECT_NEAR(angle_diff(a.theta, b.theta), 0.0, tol);
}

Pose2 random_pose(std::mt19937_64& g) {
    std::uniform_real_distribution<double> pos(-2.0, 2.0);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    return Pose2(pos(g), pos(g), ang(g));
}

}  // namespace

TEST(Angles, NormalizeWrapsIntoHalfOpenInterval) {
    EXPECT_DOUBLE_EQ(normalize_angle(kPi), kPi);
    EXPECT_DOUBLE_EQ(normalize_angle(-kPi), kPi);
    EXPECT_NEAR(normalize_angle(3 * kPi), kPi, 1e-12);
    EXPECT_NEAR(angle_diff(0.1, -0.1), 0.2, 1e-15);
    EXPECT_NEAR(angle_diff(-kPi + 0.1, kPi - 0.1), 0.2, 1e-12);
}

TEST(Screw, TranslationMidpoint) {
    expect_pose_near(interpolate_screw(Pose2(), Pose2(2, 0, 0), 0.5), Pose2(1, 0, 0), 1e-12);
}

TEST(Screw, RotationMidpoint) {
    expect_pose_near(interpolate_screw(Pose2(), Pose2(0, 0, kPi), 0.5), Pose2(0, 0, kPi / 2), 1e-12);
}

TEST(Screw, CombinedMotionFollowsScrewCenter) {
    // The motion identity -> (2,0,pi) is a rotation by pi about (1,0); halfway the origin has
    // rotated by pi/2 about that center.
    const Vec2 c{1, 0};
    const Vec2 expected = c + rotate(Vec2{0, 0} - c, kPi / 2);
    const Pose2 mid = interpolate_screw(Pose2(), Pose2(2, 0, kPi), 0.5);
    expect_pose_near(mid, Pose2(expected, kPi / 2), 1e-12);
    expect_pose_near(mid, Pose2(1, -1, kPi / 2), 1e-12);
}

TEST(Screw, EndpointsExact) {
    std::mt19937_64 g(7);
    for (int i = 0; i < 200; ++i) {
        const Pose2 a = random_pose(g);
        const Pose2 b = random_pose(g);
        EXPECT_EQ(interpolate_screw(a, b, 0.0), a);
        expect_pose_near(interpolate_screw(a, b, 1.0), b, 1e-9);
    }
}

TEST(Screw, ExpLogRoundTripIncludingSmallAngles) {
    for (double th : {0.0, 1e-9, 1e-7, 1e-5, 0.3, -2.0, kPi}) {
        const Pose2 p(0.7, -0.2, th);
        expect_pose_near(se2_exp(se2_log(p)), p, 1e-12);
    }
}

TEST(Screw, LeftInvariance) {
    std::mt19937_64 g(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const Pose2 a = random_pose(g), b = random_pose(g), h = random_pose(g);
        const double s = u(g);
        expect_pose_near(interpolate_screw(compose(h, a), compose(h, b), s), compose(h, interpolate_screw(a, b, s)),
                         1e-9);
    }
}

TEST(Screw, StraightInterpolationTakesShortArc) {
    const Pose2 m = interpolate_linear(Pose2(0, 0, kPi - 0.1), Pose2(2, 0, -kPi + 0.1), 0.5);
    EXPECT_NEAR(m.x, 1.0, 1e-12);
    EXPECT_NEAR(std::abs(m.theta), kPi, 1e-12);
}

TEST(Geometry, DiscRectOverlapMatchesMonteCarlo) {
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> c(-0.6, 0.6);
    std::uniform_real_distribution<double> rr(0.02, 0.3);
    const Rect rect{{-0.4, -0.3}, {0.4, 0.3}};
    for (int trial = 0; trial < 40; ++trial) {
        const Vec2 center{c(g), c(g)};
        const double r = rr(g);
        // stratified grid estimator over the disc bounding box
        const int n = 400;
        int inside = 0, total = 0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const Vec2 p{center.x - r + 2 * r * (i + 0.5) / n, center.y - r + 2 * r * (j + 0.5) / n};
                if (norm(p - center) > r) continue;
                ++total;
                if (rect.contains(p)) ++inside;
            }
        }
        const double mc = static_cast<double>(inside) / total;
        const double exact = disc_rect_overlap(center, r, rect) / (kPi * r * r);
        EXPECT_NEAR(exact, mc, 5e-3) << "center " << center.x << "," << center.y << " r " << r;
    }
}

TEST(Geometry, PolygonOverlapAndPenetration) {
    const Polygon sq{{{-0.1, -0.1}, {0.1, -0.1}, {0.1, 0.1}, {-0.1, 0.1}}};
    const Rect rect{{0.0, -1.0}, {1.0, 1.0}};
    EXPECT_NEAR(footprint_fraction_in(sq, Pose2(), rect), 0.5, 1e-12);
    EXPECT_NEAR(penetration(sq, Pose2(), sq, Pose2(0.15, 0, 0)), 0.05, 1e-12);
    EXPECT_EQ(penetration(sq, Pose2(), sq, Pose2(0.25, 0, 0)), 0.0);
    EXPECT_NEAR(penetration(Disc{0.1}, Pose2(), Disc{0.1}, Pose2(0.15, 0, 0)), 0.05, 1e-12);
    EXPECT_NEAR(penetration(Disc{0.1}, Pose2(0.19, 0, 0), sq, Pose2()), 0.01, 1e-12);
}

TEST(Geometry, ConvexityChecked) {
    EXPECT_THROW(check_shape(Polygon{{{0, 0}, {0, 1}, {1, 0}}}), InputError);  // clockwise
    EXPECT_THROW(check_shape(Disc{0.0}), InputError);
    EXPECT_NO_THROW(check_shape(Polygon{{{0, 0}, {1, 0}, {0, 1}}}));
}

TEST(Rng, DeterministicStreams) {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 10; ++i) {
        const auto x = a();
        EXPECT_EQ(x, b());
        (void)c();
    }
    Rng d(42);
    Rng e(43);
    EXPECT_NE(d(), e());
    EXPECT_NE(mix_seed(1, 2), mix_seed(2, 1));
}
