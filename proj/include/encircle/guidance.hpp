#pragma once

// Guiding vector field for a fitted boundary: χ = τ − k·e·n with n = E·τ,
// E = [[0, 1], [−1, 0]], and the speed-normalized reference control v_d·χ/‖χ‖.

#include <cstdint>
#include <span>
#include <vector>

#include "encircle/boundary.hpp"

namespace encircle {

/// How the polar-radius error is signed.
///   Signed:   positive on the side the normal n points to, negative on the other.
///   Unsigned: the raw distance, as a literal square root.
enum class ErrorSign { Signed, Unsigned };

struct GuidanceParams {
    double k = 1.0;
    double v_d = 1.0;
    double e_d = 0.0;
    double eps_tau = 1e-6;
    double escape_speed = 0.05;
    ErrorSign error_sign = ErrorSign::Signed;

    /// Throws ValidationError on a violated bound.
    void validate() const;
};

struct TrackingError {
    double e = 0.0;         // signed (or raw) distance minus e_d
    double distance = 0.0;  // ‖p − c(ρ)‖ ≥ 0
    double rho = 0.0;
    std::size_t segment_id = 0;
    bool clamped = false;   // ρ fell outside the segment domain and was clamped
};

struct FieldSample {
    Vec2 chi = Vec2::Zero();
    Vec2 tau = Vec2::Zero();
    Vec2 n = Vec2::Zero();
    double e = 0.0;
    double distance = 0.0;
    double rho = 0.0;
    std::size_t segment_id = 0;
    bool critical = false;
    bool clamped = false;
};

TrackingError tracking_error(const Vec2& p, const BoundaryModel& model,
                             const GuidanceParams& params);

FieldSample vector_field(const Vec2& p, const BoundaryModel& model, const GuidanceParams& params);

/// v_d·χ/‖χ‖. Throws CriticalPoint when the field vanishes at p.
Vec2 reference_control(const Vec2& p, const BoundaryModel& model, const GuidanceParams& params);
Vec2 reference_control(const FieldSample& sample, const GuidanceParams& params);

/// Seeded direction scaled to escape_speed; same seed, same vector.
Vec2 escape_control(const GuidanceParams& params, std::uint64_t seed);

/// vector_field over many points, evaluating curves through the batched
/// kernels. Points at a reference point come back critical with NaN error.
std::vector<FieldSample> field_batch(std::span<const Vec2> points, const BoundaryModel& model,
                                     const GuidanceParams& params);

}  // namespace encircle
