#pragma once
// Shared fixtures and oracles for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/LU>

#include "encircle/boundary.hpp"
#include "encircle/safety.hpp"

namespace encircle::testing {

inline std::vector<SamplePoint> circle_points(int n, const Vec2& center, double radius,
                                              double phase = 0.0) {
    std::vector<SamplePoint> pts;
    for (int i = 0; i < n; ++i) {
        const double t = phase + kTwoPi * i / n;
        pts.push_back(center + radius * Vec2(std::cos(t), std::sin(t)));
    }
    return pts;
}

inline std::vector<SamplePoint> lobed_points(int n) {
    std::vector<SamplePoint> pts;
    for (int i = 0; i < n; ++i) {
        const double t = kTwoPi * i / n;
        const double r = 2.0 + std::pow(2.0, std::sin(6.0 * t));
        pts.emplace_back(r * std::cos(t), r * std::sin(t));
    }
    return pts;
}

inline FourierCurve circle_curve(const Vec2& center, double radius) {
    Eigen::VectorXd z(6);
    z << radius, 0.0, 0.0, radius, center.x(), center.y();
    return FourierCurve(1, z, center, AngleDomain::full());
}

inline BoundaryModel single(FourierCurve c, Winding w = Winding::Ccw) {
    return BoundaryModel({Segment{std::move(c), std::nullopt, w}});
}

inline FourierCurve random_curve(std::mt19937_64& gen, int harmonics, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd z(4 * harmonics + 2);
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = scale * u(gen);
    return FourierCurve(harmonics, z, Vec2::Zero(), AngleDomain::full());
}

/// KKT residual of a projection QP solution: worst of primal violation,
/// stationarity ‖(u − u_ref) − Σ λ_i a_i‖ with λ ≥ 0 over tight rows, and
/// complementarity. Multipliers come from the best single row or row pair.
inline double kkt_residual(const QpProblem& prob, const Vec2& u, double tight = 1e-9) {
    double primal = 0.0;
    std::vector<int> act;
    for (std::size_t i = 0; i < prob.rows.size(); ++i) {
        const auto& r = prob.rows[i];
        const double s = r.slack(u);
        primal = std::max(primal, -s);
        if (std::abs(s) <= tight * std::max(1.0, r.a.norm())) act.push_back(static_cast<int>(i));
    }
    const Vec2 g = u - prob.u_ref;
    double best = g.norm();  // λ = 0
    for (int i : act) {
        const Vec2& a = prob.rows[i].a;
        const double lam = std::max(0.0, g.dot(a) / a.squaredNorm());
        best = std::min(best, (g - lam * a).norm());
        for (int j : act) {
            if (j <= i) continue;
            Mat2 m;
            m.col(0) = a;
            m.col(1) = prob.rows[j].a;
            if (std::abs(m.determinant()) < 1e-14 * a.norm() * prob.rows[j].a.norm()) continue;
            const Vec2 lam2 = m.inverse() * g;
            if (lam2.minCoeff() < 0.0) continue;
            best = std::min(best, (g - m * lam2).norm());
        }
    }
    return std::max(primal, best);
}

struct GridOracle {
    bool feasible = false;
    double distance = std::numeric_limits<double>::infinity();
    Vec2 point = Vec2::Zero();
};

/// Minimum of ‖g − u_ref‖ over the feasible points g of the (n × n) grid on
/// [−half, half]². Each grid row's feasible x-range is an interval, found from
/// the rows in closed form; its candidate near u_ref.x is then confirmed by
/// direct evaluation, so every grid point is accounted for exactly.
inline GridOracle grid_oracle(const QpProblem& prob, double half, int n) {
    GridOracle out;
    const double step = 2.0 * half / (n - 1);
    auto feasible = [&](const Vec2& g) {
        for (const auto& r : prob.rows)
            if (r.slack(g) < 0.0) return false;
        return true;
    };
    for (int j = 0; j < n; ++j) {
        const double y = -half + step * j;
        double lo = -half, hi = half;
        bool empty = false;
        for (const auto& r : prob.rows) {
            const double rhs = r.b - r.a.y() * y;
            if (r.a.x() > 0.0) lo = std::max(lo, rhs / r.a.x());
            else if (r.a.x() < 0.0) hi = std::min(hi, rhs / r.a.x());
            else if (rhs > 0.0) empty = true;
        }
        if (empty || lo > hi + step) continue;
        // Grid indices bracketing the interval, widened by one for rounding.
        const int i_lo = std::max(0, static_cast<int>(std::ceil((lo + half) / step)) - 1);
        const int i_hi = std::min(n - 1, static_cast<int>(std::floor((hi + half) / step)) + 1);
        if (i_lo > i_hi) continue;
        const int i_star = std::clamp(static_cast<int>(std::lround((prob.u_ref.x() + half) / step)),
                                      i_lo, i_hi);
        // Scan outwards from the nearest index; the first feasible hit on
        // each side is the best on that side.
        for (int dir : {-1, 1}) {
            for (int i = dir < 0 ? i_star : i_star + 1; i >= i_lo && i <= i_hi; i += dir) {
                const Vec2 g(-half + step * i, y);
                if (!feasible(g)) {
                    if ((dir < 0 && g.x() < lo) || (dir > 0 && g.x() > hi)) break;
                    continue;
                }
                const double dist = (g - prob.u_ref).norm();
                if (dist < out.distance) out = {true, dist, g};
                break;
            }
        }
    }
    return out;
}

}  // namespace encircle::testing
