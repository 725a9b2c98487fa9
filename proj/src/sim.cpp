#include "encircle/sim.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "encircle/error.hpp"

namespace encircle {

namespace {

struct Deriv {
    double x, y, th;
};

Deriv unicycle(double theta, double v, double omega) {
    return {v * std::cos(theta), v * std::sin(theta), omega};
}

std::uint64_t step_seed(std::uint64_t seed, std::uint64_t k) {
    // splitmix64 finalizer over (seed, step) so every step draws independently.
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (k + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

RobotState step(const RobotState& s, const ControlCommand& cmd, double dt) {
    const double v = cmd.v, w = cmd.omega;
    const Deriv k1 = unicycle(s.theta, v, w);
    const Deriv k2 = unicycle(s.theta + 0.5 * dt * k1.th, v, w);
    const Deriv k3 = unicycle(s.theta + 0.5 * dt * k2.th, v, w);
    const Deriv k4 = unicycle(s.theta + dt * k3.th, v, w);
    RobotState out;
    out.p_x = s.p_x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    out.p_y = s.p_y + dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
    out.theta = wrap_pi(s.theta + dt / 6.0 * (k1.th + 2.0 * k2.th + 2.0 * k3.th + k4.th));
    return out;
}

double min_clearance(const Vec2& x, const std::vector<Obstacle>& obstacles) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : obstacles) best = std::min(best, (x - o.center).norm() - o.inflated_radius);
    return best;
}

std::vector<StepRecord> run(const SimSetup& setup, const WarningSink& warn) {
    setup.guidance.validate();
    setup.geometry.validate();
    if (!(setup.dt > 0.0) || !(setup.t_end > 0.0))
        throw Error(ErrorCode::ValidationError, "dt and t_end must be > 0");

    const auto& world = setup.world;
    const auto& geom = setup.geometry;
    const auto steps = static_cast<std::size_t>(std::llround(setup.t_end / setup.dt));

    RobotState state = setup.initial;
    state.theta = wrap_pi(state.theta);
    {
        const Vec2 x0 = state.control_point(geom.l);
        for (std::size_t i = 0; i < world.obstacles.size(); ++i) {
            if (barrier_value(x0, world.obstacles[i]) < 0.0 && warn)
                warn("initial control point lies inside inflated obstacle " + std::to_string(i) +
                     "; the barrier only bounds the rate of approach");
        }
    }

    std::vector<StepRecord> log;
    log.reserve(steps);
    bool stopped = false;
    for (std::size_t k = 0; k < steps; ++k) {
        StepRecord rec;
        rec.t = static_cast<double>(k) * setup.dt;
        rec.state = state;
        rec.x = state.control_point(geom.l);
        rec.min_clearance = min_clearance(rec.x, world.obstacles);

        try {
            const FieldSample fs = vector_field(rec.x, world.boundary, setup.guidance);
            rec.e = fs.e;
            rec.distance = fs.distance;
            rec.rho = fs.rho;
            rec.segment_id = fs.segment_id;
            rec.critical = fs.critical || !(fs.chi.norm() >= setup.guidance.eps_tau);
            if (!rec.critical) rec.u_ref = reference_control(fs, setup.guidance);
        } catch (const Error& err) {
            if (err.code() != ErrorCode::ZeroRadius) throw;
            rec.critical = true;
            rec.segment_id = world.boundary.locate(rec.x).value_or(0);
            rec.e = rec.distance = rec.rho = std::numeric_limits<double>::quiet_NaN();
        }
        if (rec.critical) rec.u_ref = escape_control(setup.guidance, step_seed(setup.seed, k));

        if (!stopped) {
            try {
                rec.command = synthesize(state, rec.u_ref, world.obstacles, setup.cbf, geom);
            } catch (const Error& err) {
                if (err.code() != ErrorCode::Infeasible) throw;
                stopped = true;
                if (warn) warn("QP infeasible at t = " + std::to_string(rec.t) + "; stopping in place");
            }
        }
        if (stopped) {
            rec.command = ControlCommand::stop();
            rec.infeasible = true;
        }
        rec.qp_modified = rec.command.modified;
        state = step(state, rec.command, setup.dt);
        log.push_back(std::move(rec));
    }
    return log;
}

}  // namespace encircle
