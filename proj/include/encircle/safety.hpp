#pragma once

// CBF-QP safety filter. Obstacle barriers h = ‖x − x_o‖² − r_o² give rows
// 2(x − x_o)·u ≥ −α·h; wheel-speed limits give the four diamond rows
// ±(A·R(θ)⁻¹)_i·u ≥ −v_m. The QP projects u_r onto their intersection.

#include <vector>

#include "encircle/geometry.hpp"
#include "encircle/robot.hpp"

namespace encircle {

struct Obstacle {
    Vec2 center = Vec2::Zero();
    double raw_radius = 0.0;
    double inflated_radius = 0.0;

    /// r_o = r̄ + r_b; throws ValidationError unless r_o > 0.
    static Obstacle inflate(const Vec2& center, double raw_radius, double robot_radius);
};

struct CbfParams {
    double alpha = 1.0;
};

/// a·u ≥ b
struct HalfSpace {
    Vec2 a = Vec2::Zero();
    double b = 0.0;

    double slack(const Vec2& u) const { return a.dot(u) - b; }
};

struct QpProblem {
    Vec2 u_ref = Vec2::Zero();
    std::vector<HalfSpace> rows;
};

struct QpSolution {
    Vec2 u = Vec2::Zero();
    std::vector<int> active_set;
    bool modified = false;
};

double barrier_value(const Vec2& x, const Obstacle& obs);

std::vector<HalfSpace> obstacle_rows(const Vec2& x, const std::vector<Obstacle>& obstacles,
                                     const CbfParams& params);

/// Rows in order: v_R ≥ −v_m, v_R ≤ v_m, v_L ≥ −v_m, v_L ≤ v_m, expressed on u.
std::vector<HalfSpace> input_rows(double theta, const RobotGeometry& geom);

/// Exact Euclidean projection of u_ref onto the feasible polygon by
/// enumerating the unconstrained point, every single-row projection and every
/// row-pair vertex. Throws Infeasible when no candidate satisfies all rows.
QpSolution solve_qp(const QpProblem& prob);

/// Assembles obstacle and input rows at the current state, solves the QP and
/// maps the result to (v, ω) and wheel speeds. Active-set indices refer to
/// obstacle rows first, then the four input rows.
ControlCommand synthesize(const RobotState& state, const Vec2& u_ref,
                          const std::vector<Obstacle>& obstacles, const CbfParams& cbf,
                          const RobotGeometry& geom);

}  // namespace encircle
