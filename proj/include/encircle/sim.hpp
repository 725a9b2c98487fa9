#pragma once

// Closed-loop simulation: guidance -> safety filter -> unicycle integration.

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "encircle/boundary.hpp"
#include "encircle/guidance.hpp"
#include "encircle/robot.hpp"
#include "encircle/safety.hpp"

namespace encircle {

struct World {
    std::vector<Obstacle> obstacles;
    BoundaryModel boundary;
};

struct SimSetup {
    World world;
    GuidanceParams guidance;
    CbfParams cbf;
    RobotGeometry geometry;
    RobotState initial;
    double t_end = 10.0;
    double dt = 1e-3;
    std::uint64_t seed = 0;
};

struct StepRecord {
    double t = 0.0;
    RobotState state;
    Vec2 x = Vec2::Zero();    // control point
    Vec2 u_ref = Vec2::Zero();
    ControlCommand command;
    double e = 0.0;
    double distance = 0.0;    // unsigned polar-radius distance to the active curve
    double rho = 0.0;
    double min_clearance = 0.0;
    std::size_t segment_id = 0;
    bool qp_modified = false;
    bool infeasible = false;
    bool critical = false;
};

/// One RK4 step of ṗ_x = v cos θ, ṗ_y = v sin θ, θ̇ = ω with (v, ω) held.
/// The returned heading is wrapped to (−π, π].
RobotState step(const RobotState& state, const ControlCommand& cmd, double dt);

/// min_i ‖x − x_o^i‖ − r_o^i, +inf without obstacles.
double min_clearance(const Vec2& x, const std::vector<Obstacle>& obstacles);

using WarningSink = std::function<void(std::string_view)>;

/// Runs round(t_end / dt) steps. A critical point (or a control point at a
/// reference point) switches that step to escape_control. An infeasible QP
/// stops the robot in place and flags every remaining step.
std::vector<StepRecord> run(const SimSetup& setup, const WarningSink& warn = {});

}  // namespace encircle
