#pragma once

#include <cmath>
#include <numbers>

namespace mosaic {

struct Vec2 {
    double x{0};
    double y{0};

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator-(Vec2 a) noexcept { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) noexcept { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Vec2, Vec2) noexcept = default;
};

[[nodiscard]] constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
[[nodiscard]] constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
[[nodiscard]] inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
[[nodiscard]] constexpr Vec2 perp(Vec2 a) noexcept { return {-a.y, a.x}; }
[[nodiscard]] inline Vec2 unit_from_angle(double a) noexcept { return {std::cos(a), std::sin(a)}; }

[[nodiscard]] inline Vec2 rotate(Vec2 v, double angle) noexcept {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Wraps an angle into (-pi, pi].
[[nodiscard]] inline double normalize_angle(double a) noexcept {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::remainder(a, two_pi);
    if (r <= -std::numbers::pi) r += two_pi;
    return r;
}

/// Signed shortest rotation taking `from` to `to`, in (-pi, pi].
[[nodiscard]] inline double angle_diff(double to, double from) noexcept {
    return normalize_angle(to - from);
}

/// Planar rigid pose; theta is kept in (-pi, pi].
struct Pose2 {
    double x{0};
    double y{0};
    double theta{0};

    Pose2() = default;
    Pose2(double x_, double y_, double theta_) : x(x_), y(y_), theta(normalize_angle(theta_)) {}
    Pose2(Vec2 p, double theta_) : Pose2(p.x, p.y, theta_) {}

    [[nodiscard]] Vec2 position() const noexcept { return {x, y}; }

    /// Maps a body-frame point into the world frame.
    [[nodiscard]] Vec2 apply(Vec2 body) const noexcept { return position() + rotate(body, theta); }

    friend bool operator==(const Pose2&, const Pose2&) = default;
};

[[nodiscard]] inline Pose2 compose(const Pose2& a, const Pose2& b) {
    return Pose2(a.apply(b.position()), a.theta + b.theta);
}

[[nodiscard]] inline Pose2 inverse(const Pose2& a) {
    const Vec2 t = rotate(-a.position(), -a.theta);
    return Pose2(t, -a.theta);
}

/// a^-1 * b
[[nodiscard]] inline Pose2 relative(const Pose2& a, const Pose2& b) {
    return compose(inverse(a), b);
}

/// se(2) twist: linear part (vx, vy) expressed in the body frame, angular part omega.
struct Twist2 {
    double vx{0};
    double vy{0};
    double omega{0};
};

namespace detail {

// V(theta) = [[a, -b], [b, a]] with a = sin(theta)/theta, b = (1-cos(theta))/theta.
inline void screw_coefficients(double theta, double& a, double& b) noexcept {
    if (std::abs(theta) < 1e-6) {
        const double t2 = theta * theta;
        a = 1.0 - t2 / 6.0;
        b = theta / 2.0 - theta * t2 / 24.0;
    } else {
        a = std::sin(theta) / theta;
        b = (1.0 - std::cos(theta)) / theta;
    }
}

}  // namespace detail

[[nodiscard]] inline Pose2 se2_exp(const Twist2& xi) {
    double a = 0;
    double b = 0;
    detail::screw_coefficients(xi.omega, a, b);
    return Pose2(a * xi.vx - b * xi.vy, b * xi.vx + a * xi.vy, xi.omega);
}

[[nodiscard]] inline Twist2 se2_log(const Pose2& p) {
    const double theta = p.theta;
    double a = 0;
    double b = 0;
    detail::screw_coefficients(theta, a, b);
    const double det = a * a + b * b;
    return {(a * p.x + b * p.y) / det, (-b * p.x + a * p.y) / det, theta};
}

/// Screw-motion interpolation a * exp(s * log(a^-1 b)).
[[nodiscard]] inline Pose2 interpolate_screw(const Pose2& a, const Pose2& b, double s) {
    if (s == 0.0) return a;
    const Twist2 xi = se2_log(relative(a, b));
    return compose(a, se2_exp({s * xi.vx, s * xi.vy, s * xi.omega}));
}

/// Straight-line position interpolation with shortest-arc heading interpolation.
[[nodiscard]] inline Pose2 interpolate_linear(const Pose2& a, const Pose2& b, double s) {
    if (s == 0.0) return a;
    if (s == 1.0) return b;
    return Pose2(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y), a.theta + s * angle_diff(b.theta, a.theta));
}

}  // namespace mosaic
