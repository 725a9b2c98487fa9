#include "encircle/safety.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "encircle/error.hpp"

namespace encircle {

namespace {

// Candidate acceptance: absolute slack floor plus a rounding allowance that
// scales with the magnitude of the row terms.
double feasibility_tol(const HalfSpace& r, const Vec2& u) {
    return 1e-10 + 1e-14 * std::max(std::abs(r.b), r.a.norm() * u.norm());
}

bool feasible(const std::vector<HalfSpace>& rows, const Vec2& u) {
    for (const auto& r : rows)
        if (r.slack(u) < -feasibility_tol(r, u)) return false;
    return true;
}

}  // namespace

Obstacle Obstacle::inflate(const Vec2& center, double raw_radius, double robot_radius) {
    Obstacle o{center, raw_radius, raw_radius + robot_radius};
    if (!center.allFinite() || !std::isfinite(o.inflated_radius) || !(o.inflated_radius > 0.0) ||
        raw_radius < 0.0)
        throw Error(ErrorCode::ValidationError, "obstacle inflated radius must be > 0");
    return o;
}

double barrier_value(const Vec2& x, const Obstacle& obs) {
    return (x - obs.center).squaredNorm() - obs.inflated_radius * obs.inflated_radius;
}

std::vector<HalfSpace> obstacle_rows(const Vec2& x, const std::vector<Obstacle>& obstacles,
                                     const CbfParams& params) {
    std::vector<HalfSpace> rows;
    rows.reserve(obstacles.size());
    for (const auto& o : obstacles)
        rows.push_back({2.0 * (x - o.center), -params.alpha * barrier_value(x, o)});
    return rows;
}

std::vector<HalfSpace> input_rows(double theta, const RobotGeometry& geom) {
    geom.validate();
    Mat2 a;
    a << 1.0, geom.d, 1.0, -geom.d;
    const Mat2 m = a * input_map_inverse(theta, geom.l);
    const Vec2 right = m.row(0).transpose();
    const Vec2 left = m.row(1).transpose();
    return {{right, -geom.v_m}, {-right, -geom.v_m}, {left, -geom.v_m}, {-left, -geom.v_m}};
}

QpSolution solve_qp(const QpProblem& prob) {
    const auto& rows = prob.rows;
    const Vec2& ur = prob.u_ref;
    const std::size_t m = rows.size();

    QpSolution sol;
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    auto offer = [&](const Vec2& u) {
        if (!u.allFinite() || !feasible(rows, u)) return;
        const double dist = (u - ur).squaredNorm();
        if (!found || dist < best) {
            best = dist;
            sol.u = u;
            found = true;
        }
    };

    if (feasible(rows, ur)) {
        sol.u = ur;
        found = true;
        best = 0.0;
    } else {
        for (std::size_t i = 0; i < m; ++i) {
            const auto& r = rows[i];
            const double nn = r.a.squaredNorm();
            if (nn <= 0.0) continue;
            const double viol = r.b - r.a.dot(ur);
            if (viol < 0.0) continue;
            offer(ur + (viol / nn) * r.a);
        }
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = i + 1; j < m; ++j) {
                const Vec2& p = rows[i].a;
                const Vec2& q = rows[j].a;
                const double det = p.x() * q.y() - p.y() * q.x();
                if (std::abs(det) <= 1e-12 * p.norm() * q.norm()) continue;
                const Vec2 u{(rows[i].b * q.y() - rows[j].b * p.y()) / det,
                             (p.x() * rows[j].b - q.x() * rows[i].b) / det};
                offer(u);
            }
        }
    }
    if (!found)
        throw Error(ErrorCode::Infeasible,
                    "QP infeasible: the " + std::to_string(m) + " constraint rows share no point");

    for (std::size_t i = 0; i < m; ++i) {
        if (std::abs(rows[i].slack(sol.u)) <= 1e-9 * std::max(1.0, rows[i].a.norm()))
            sol.active_set.push_back(static_cast<int>(i));
    }
    sol.modified = (sol.u - ur).norm() > 1e-9;
    return sol;
}

ControlCommand synthesize(const RobotState& state, const Vec2& u_ref,
                          const std::vector<Obstacle>& obstacles, const CbfParams& cbf,
                          const RobotGeometry& geom) {
    const Vec2 x = state.control_point(geom.l);
    QpProblem prob;
    prob.u_ref = u_ref;
    prob.rows = obstacle_rows(x, obstacles, cbf);
    const auto input = input_rows(state.theta, geom);
    prob.rows.insert(prob.rows.end(), input.begin(), input.end());

    QpSolution sol = solve_qp(prob);
    const Vec2 body = input_map_inverse(state.theta, geom.l) * sol.u;
    const double v = body.x(), omega = body.y();
    ControlCommand cmd =
        ControlCommand::from_wheels(v - geom.d * omega, v + geom.d * omega, state.theta, geom);
    cmd.modified = sol.modified;
    cmd.active_set = std::move(sol.active_set);
    return cmd;
}

}  // namespace encircle
