#include "encircle/guidance.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "encircle/error.hpp"

namespace encircle {

namespace {

struct Located {
    std::size_t segment_id;
    double rho;
    bool clamped;
};

Located locate(const Vec2& p, const BoundaryModel& model) {
    const auto seg = model.locate(p);
    if (!seg)
        throw Error(ErrorCode::NoSegment,
                    "no segment region contains (" + std::to_string(p.x()) + ", " +
                        std::to_string(p.y()) + ")");
    const FourierCurve& curve = model.segments()[*seg].curve;
    const double rho = polar_angle(p, curve.ref());
    if (curve.domain().contains(rho)) return {*seg, rho, false};
    return {*seg, curve.domain().clamp(rho), true};
}

FieldSample assemble(const Vec2& p, const Segment& seg, const Located& loc,
                     const CurveSample& cs, const GuidanceParams& params) {
    FieldSample out;
    out.segment_id = loc.segment_id;
    out.rho = loc.rho;
    out.clamped = loc.clamped;
    out.distance = (p - cs.point).norm();

    const double orientation = seg.winding == Winding::Cw ? -1.0 : 1.0;
    double signed_dist = out.distance;
    if (params.error_sign == ErrorSign::Signed) {
        const Vec2& s = seg.curve.ref();
        const bool beyond = (p - s).norm() >= (cs.point - s).norm();
        // n points away from s for a ccw segment and toward s for a cw one.
        if (beyond != (orientation > 0.0)) signed_dist = -signed_dist;
    }
    out.e = signed_dist - params.e_d;

    out.tau = orientation * cs.tangent;
    out.n = rotate_cw(out.tau);
    out.chi = out.tau - params.k * out.e * out.n;
    out.critical = out.tau.norm() < params.eps_tau;
    return out;
}

}  // namespace

void GuidanceParams::validate() const {
    auto bad = [](const char* what) { throw Error(ErrorCode::ValidationError, what); };
    if (!(k > 0.0) || !std::isfinite(k)) bad("guidance gain k must be > 0");
    if (!(v_d > 0.0) || !std::isfinite(v_d)) bad("desired speed v_d must be > 0");
    if (!(e_d >= 0.0) || !std::isfinite(e_d)) bad("stand-off distance e_d must be >= 0");
    if (!(eps_tau > 0.0) || !std::isfinite(eps_tau)) bad("critical threshold eps_tau must be > 0");
    if (!(escape_speed > 0.0) || !std::isfinite(escape_speed)) bad("escape_speed must be > 0");
}

TrackingError tracking_error(const Vec2& p, const BoundaryModel& model,
                             const GuidanceParams& params) {
    const FieldSample s = vector_field(p, model, params);
    return {s.e, s.distance, s.rho, s.segment_id, s.clamped};
}

FieldSample vector_field(const Vec2& p, const BoundaryModel& model, const GuidanceParams& params) {
    const Located loc = locate(p, model);
    const Segment& seg = model.segments()[loc.segment_id];
    return assemble(p, seg, loc, sample_curve(seg.curve, loc.rho), params);
}

Vec2 reference_control(const FieldSample& sample, const GuidanceParams& params) {
    const double norm = sample.chi.norm();
    if (sample.critical || !(norm >= params.eps_tau))
        throw Error(ErrorCode::CriticalPoint, "guiding field vanishes (critical point)");
    return params.v_d * sample.chi / norm;
}

Vec2 reference_control(const Vec2& p, const BoundaryModel& model, const GuidanceParams& params) {
    return reference_control(vector_field(p, model, params), params);
}

Vec2 escape_control(const GuidanceParams& params, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    // 53 random bits -> [0, 1); avoids distribution objects whose output is
    // implementation-defined.
    const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    const double angle = kTwoPi * unit;
    return params.escape_speed * Vec2(std::cos(angle), std::sin(angle));
}

std::vector<FieldSample> field_batch(std::span<const Vec2> points, const BoundaryModel& model,
                                     const GuidanceParams& params) {
    const std::size_t n = points.size();
    std::vector<FieldSample> out(n);
    std::vector<Located> loc(n);
    std::vector<char> singular(n, 0);
    std::vector<std::vector<std::size_t>> members(model.size());

    for (std::size_t i = 0; i < n; ++i) {
        try {
            loc[i] = locate(points[i], model);
        } catch (const Error& err) {
            if (err.code() != ErrorCode::ZeroRadius) throw;
            singular[i] = 1;
            loc[i].segment_id = *model.locate(points[i]);
        }
        if (!singular[i]) members[loc[i].segment_id].push_back(i);
    }

    for (std::size_t s = 0; s < model.size(); ++s) {
        const auto& idx = members[s];
        if (idx.empty()) continue;
        std::vector<double> rho(idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j) rho[j] = loc[idx[j]].rho;
        std::vector<Vec2> pts(idx.size()), tan(idx.size());
        eval_curve_batch(model.segments()[s].curve, rho, pts, tan);
        for (std::size_t j = 0; j < idx.size(); ++j) {
            const std::size_t i = idx[j];
            out[i] = assemble(points[i], model.segments()[s], loc[i], {pts[j], tan[j]}, params);
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (!singular[i]) continue;
        FieldSample& fs = out[i];
        fs.segment_id = loc[i].segment_id;
        fs.critical = true;
        fs.e = fs.distance = fs.rho = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

}  // namespace encircle
