#include "encircle/robot.hpp"

#include <cmath>

#include "encircle/error.hpp"

namespace encircle {

void RobotGeometry::validate() const {
    auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
    if (!positive(l)) throw Error(ErrorCode::DegenerateGeometry, "off-axis distance l must be > 0");
    if (!positive(d)) throw Error(ErrorCode::DegenerateGeometry, "half wheel separation d must be > 0");
    if (!positive(r_b)) throw Error(ErrorCode::DegenerateGeometry, "robot radius r_b must be > 0");
    if (!positive(v_m)) throw Error(ErrorCode::DegenerateGeometry, "max wheel speed v_m must be > 0");
}

Vec2 RobotState::control_point(double l) const {
    return {p_x + l * std::cos(theta), p_y + l * std::sin(theta)};
}

Mat2 input_map(double theta, double l) {
    const double c = std::cos(theta), s = std::sin(theta);
    Mat2 r;
    r << c, -l * s, s, l * c;
    return r;
}

Mat2 input_map_inverse(double theta, double l) {
    const double c = std::cos(theta), s = std::sin(theta);
    Mat2 r;
    r << c, s, -s / l, c / l;
    return r;
}

ControlCommand ControlCommand::from_wheels(double v_L, double v_R, double theta,
                                           const RobotGeometry& geom) {
    ControlCommand cmd;
    cmd.v_L = v_L;
    cmd.v_R = v_R;
    cmd.v = (v_L + v_R) / 2.0;
    cmd.omega = (v_R - v_L) / (2.0 * geom.d);
    cmd.u = input_map(theta, geom.l) * Vec2(cmd.v, cmd.omega);
    return cmd;
}

ControlCommand ControlCommand::stop() { return {}; }

}  // namespace encircle
