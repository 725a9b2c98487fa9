#pragma once

// Differential-drive robot model. The controlled point sits a distance l ahead
// of the wheel axle, which turns the unicycle into a single integrator
// ẋ = R(θ)·(v, ω).

#include <vector>

#include "encircle/geometry.hpp"

namespace encircle {

struct RobotGeometry {
    double l = 0.01;   // off-axis distance (m)
    double d = 0.3;    // half wheel separation (m)
    double r_b = 0.05; // enclosing-circle radius (m)
    double v_m = 1.0;  // max wheel speed (m/s)

    /// Throws DegenerateGeometry unless every field is positive and finite.
    void validate() const;
};

struct RobotState {
    double p_x = 0.0;
    double p_y = 0.0;
    double theta = 0.0;  // (−π, π]

    Vec2 center() const { return {p_x, p_y}; }
    /// Off-axis point p + l·(cos θ, sin θ).
    Vec2 control_point(double l) const;
};

struct ControlCommand {
    Vec2 u = Vec2::Zero();  // Cartesian velocity of the control point (m/s)
    double v = 0.0;
    double omega = 0.0;
    double v_L = 0.0;
    double v_R = 0.0;
    bool modified = false;
    std::vector<int> active_set;

    /// Builds a command from wheel speeds so that v = (v_L+v_R)/2 and
    /// ω = (v_R−v_L)/(2d) hold exactly, and u = R(θ)·(v, ω).
    static ControlCommand from_wheels(double v_L, double v_R, double theta,
                                      const RobotGeometry& geom);
    static ControlCommand stop();
};

/// R(θ) = [[cos θ, −l sin θ], [sin θ, l cos θ]].
Mat2 input_map(double theta, double l);
/// R(θ)⁻¹ = [[cos θ, sin θ], [−sin θ / l, cos θ / l]].
Mat2 input_map_inverse(double theta, double l);

}  // namespace encircle
