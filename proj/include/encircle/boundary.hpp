#pragma once

// Polar-angle parameterized truncated-Fourier boundary curves.
//
// A segment is fitted about a reference point s: each sample p gets the polar
// angle ρ of (p − s), and x(ρ), y(ρ) are each approximated by H harmonics plus
// a constant. Non-star-shaped boundaries are split into segments, each owning
// a half-plane region of the workspace.

#include <Eigen/Core>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "encircle/geometry.hpp"

namespace encircle {

using SamplePoint = Vec2;
using ReferencePoint = Vec2;

inline constexpr double kZeroRadiusTol = 1e-12;
inline constexpr double kAngleTol = 1e-9;

/// Interval of polar angles on the circle. A wrapping interval crosses the
/// 0/2π seam, i.e. lo > hi after normalization.
class AngleDomain {
public:
    /// The whole circle [0, 2π).
    static AngleDomain full();
    /// [lo, hi] with both ends normalized to [0, 2π). Throws if lo == hi.
    static AngleDomain interval(double lo, double hi);

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    bool wraps() const { return wraps_; }
    bool is_full() const { return full_; }
    double length() const;

    bool contains(double rho, double tol = 1e-12) const;
    /// `rho` itself if inside, else the angularly nearest endpoint.
    double clamp(double rho) const;

    friend bool operator==(const AngleDomain&, const AngleDomain&) = default;

private:
    AngleDomain(double lo, double hi, bool wraps, bool full)
        : lo_(lo), hi_(hi), wraps_(wraps), full_(full) {}

    double lo_;
    double hi_;
    bool wraps_;
    bool full_;
};

class FourierCurve {
public:
    /// coeffs = [a_1 b_1 c_1 d_1 ... a_H b_H c_H d_H e f]; length must be 4H+2.
    FourierCurve(int harmonics, Eigen::VectorXd coeffs, ReferencePoint ref,
                 AngleDomain domain);

    int harmonics() const { return harmonics_; }
    const Eigen::VectorXd& coeffs() const { return coeffs_; }
    const ReferencePoint& ref() const { return ref_; }
    const AngleDomain& domain() const { return domain_; }

    double a(int h) const { return coeffs_[4 * (h - 1)]; }
    double b(int h) const { return coeffs_[4 * (h - 1) + 1]; }
    double c(int h) const { return coeffs_[4 * (h - 1) + 2]; }
    double d(int h) const { return coeffs_[4 * (h - 1) + 3]; }
    double e() const { return coeffs_[4 * harmonics_]; }
    double f() const { return coeffs_[4 * harmonics_ + 1]; }

private:
    int harmonics_;
    Eigen::VectorXd coeffs_;
    ReferencePoint ref_;
    AngleDomain domain_;
};

struct FitReport {
    double rms_residual = 0.0;
    double max_residual = 0.0;
    std::size_t n_points = 0;
    double condition_estimate = 0.0;
};

struct FitResult {
    FourierCurve curve;
    FitReport report;
};

struct StarCheck {
    bool star_shaped = true;
    // Conflicting sample indices when star_shaped is false.
    std::size_t first = 0;
    std::size_t second = 0;
};

struct CurveSample {
    Vec2 point;
    Vec2 tangent;
};

/// Full-quadrant angle of p − s in [0, 2π). Throws ZeroRadius when p ≈ s.
double polar_angle(const SamplePoint& p, const ReferencePoint& s);

/// Checks that the polar angles of `points` about `s` are pairwise distinct
/// (up to `tol` rad). Needs at least 3 points.
StarCheck check_star_shaped(std::span<const SamplePoint> points, const ReferencePoint& s,
                            double tol = kAngleTol);

/// G(ρ), the 2 × (4H+2) map from coefficients to the curve point at ρ.
Eigen::Matrix<double, 2, Eigen::Dynamic> build_regressor(double rho, int harmonics);

/// Least-squares fit of one star-shaped segment. Requires N ≥ 2H+2 samples,
/// all with polar angle inside `domain`.
FitResult fit_segment(std::span<const SamplePoint> points, const ReferencePoint& s,
                      int harmonics, const AngleDomain& domain);

SamplePoint eval_curve(const FourierCurve& c, double rho);
Vec2 eval_tangent(const FourierCurve& c, double rho);
/// Point and tangent together; same domain rule as eval_curve.
CurveSample sample_curve(const FourierCurve& c, double rho);

/// Batched evaluation through the dispatching SIMD kernels. No domain check.
void eval_curve_batch(const FourierCurve& c, std::span<const double> rhos,
                      std::span<Vec2> points, std::span<Vec2> tangents = {});

enum class Winding { Ccw, Cw };

/// Closed half-plane {p : (p − point)·normal ≤ 0}; `normal` points out of the region.
struct HalfPlane {
    Vec2 point;
    Vec2 normal;

    bool contains(const Vec2& p) const { return (p - point).dot(normal) <= 0.0; }
    bool strictly_contains(const Vec2& p) const { return (p - point).dot(normal) < 0.0; }
};

struct Segment {
    FourierCurve curve;
    std::optional<HalfPlane> region;  // nullopt: the whole plane
    Winding winding = Winding::Ccw;
};

struct PartitionCheck {
    bool ok = true;
    std::size_t uncovered = 0;    // grid points in no region
    std::size_t overlapping = 0;  // grid points strictly inside two regions
};

class BoundaryModel {
public:
    explicit BoundaryModel(std::vector<Segment> segments);

    const std::vector<Segment>& segments() const { return segments_; }
    std::size_t size() const { return segments_.size(); }

    /// Index of the first segment whose region contains p. Points on a
    /// switching line therefore go to the lower-indexed segment.
    std::optional<std::size_t> locate(const Vec2& p) const;

    /// Samples an n × n grid over [lo, hi] and counts coverage defects.
    PartitionCheck check_partition(const Vec2& lo, const Vec2& hi, int n = 101) const;

    /// Cut-off points are where a segment's curve crosses its region line.
    /// Returns the largest distance from one to the nearest cut-off point of
    /// another segment. A lone partial segment reports the distance between
    /// its two ends; a lone full segment reports 0.
    double cutoff_gap() const;

private:
    std::vector<Segment> segments_;
};

/// Reads "x y" per line; '#' starts a comment line; blank lines are skipped.
std::vector<SamplePoint> read_samples(std::istream& in, const std::string& source = "<stream>");
std::vector<SamplePoint> read_samples_file(const std::string& path);

}  // namespace encircle
