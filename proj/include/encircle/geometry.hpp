#pragma once

#include <Eigen/Core>
#include <cmath>
#include <numbers>

namespace encircle {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Maps any finite angle to [0, 2π).
inline double wrap_two_pi(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

/// Maps any finite angle to (−π, π].
inline double wrap_pi(double a) {
    double r = wrap_two_pi(a);
    if (r > std::numbers::pi) r -= kTwoPi;
    return r;
}

/// Rotation by −π/2: maps a tangent to its right-hand normal.
inline Vec2 rotate_cw(const Vec2& v) { return {v.y(), -v.x()}; }

}  // namespace encircle
