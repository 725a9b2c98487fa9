#include "encircle/boundary.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "encircle/error.hpp"
#include "encircle/kernels.hpp"

namespace encircle {

namespace {

constexpr double kMaxCondition = 1e12;

double angular_distance(double a, double b) {
    const double d = std::abs(wrap_two_pi(a) - wrap_two_pi(b));
    return std::min(d, kTwoPi - d);
}

std::string fmt_point(const Vec2& p) {
    std::ostringstream os;
    os << "(" << p.x() << ", " << p.y() << ")";
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------- AngleDomain

AngleDomain AngleDomain::full() { return {0.0, kTwoPi, false, true}; }

AngleDomain AngleDomain::interval(double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi))
        throw Error(ErrorCode::ValidationError, "angle domain bounds must be finite");
    const double l = wrap_two_pi(lo);
    const double h = wrap_two_pi(hi);
    if (l == h) throw Error(ErrorCode::ValidationError, "angle domain has lo == hi");
    return {l, h, l > h, false};
}

double AngleDomain::length() const {
    if (full_) return kTwoPi;
    return wraps_ ? kTwoPi - lo_ + hi_ : hi_ - lo_;
}

bool AngleDomain::contains(double rho, double tol) const {
    if (full_) return true;
    const double r = wrap_two_pi(rho);
    const bool inside = wraps_ ? (r >= lo_ || r <= hi_) : (r >= lo_ && r <= hi_);
    return inside || angular_distance(r, lo_) <= tol || angular_distance(r, hi_) <= tol;
}

double AngleDomain::clamp(double rho) const {
    if (contains(rho, 0.0)) return wrap_two_pi(rho);
    return angular_distance(rho, lo_) <= angular_distance(rho, hi_) ? lo_ : hi_;
}

// --------------------------------------------------------------- FourierCurve

FourierCurve::FourierCurve(int harmonics, Eigen::VectorXd coeffs, ReferencePoint ref,
                           AngleDomain domain)
    : harmonics_(harmonics), coeffs_(std::move(coeffs)), ref_(ref), domain_(domain) {
    if (harmonics_ < 1)
        throw Error(ErrorCode::ValidationError, "harmonic count must be at least 1");
    if (coeffs_.size() != 4 * harmonics_ + 2)
        throw Error(ErrorCode::ValidationError,
                    "coefficient vector length " + std::to_string(coeffs_.size()) +
                        " does not match 4H+2 = " + std::to_string(4 * harmonics_ + 2));
    if (!coeffs_.allFinite() || !ref_.allFinite())
        throw Error(ErrorCode::ValidationError, "curve coefficients must be finite");
}

// ----------------------------------------------------------------- operations

double polar_angle(const SamplePoint& p, const ReferencePoint& s) {
    const Vec2 r = p - s;
    if (r.norm() < kZeroRadiusTol)
        throw Error(ErrorCode::ZeroRadius,
                    "point " + fmt_point(p) + " coincides with reference point " + fmt_point(s));
    return wrap_two_pi(std::atan2(r.y(), r.x()));
}

StarCheck check_star_shaped(std::span<const SamplePoint> points, const ReferencePoint& s,
                            double tol) {
    const std::size_t n = points.size();
    if (n < 3)
        throw Error(ErrorCode::TooFewPoints, "star-shape check needs at least 3 points");

    std::vector<double> angle(n);
    for (std::size_t i = 0; i < n; ++i) {
        if ((points[i] - s).norm() < kZeroRadiusTol) return {false, i, i};
        angle[i] = polar_angle(points[i], s);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return angle[a] < angle[b]; });

    auto conflict = [](std::size_t i, std::size_t j) {
        return StarCheck{false, std::min(i, j), std::max(i, j)};
    };
    for (std::size_t k = 1; k < n; ++k) {
        if (angle[order[k]] - angle[order[k - 1]] <= tol) return conflict(order[k - 1], order[k]);
    }
    if (angle[order.front()] + kTwoPi - angle[order.back()] <= tol)
        return conflict(order.back(), order.front());
    return {};
}

Eigen::Matrix<double, 2, Eigen::Dynamic> build_regressor(double rho, int harmonics) {
    if (harmonics < 1) throw Error(ErrorCode::ValidationError, "harmonic count must be at least 1");
    Eigen::Matrix<double, 2, Eigen::Dynamic> g =
        Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, 4 * harmonics + 2);
    for (int h = 1; h <= harmonics; ++h) {
        const double c = std::cos(h * rho);
        const double s = std::sin(h * rho);
        const int col = 4 * (h - 1);
        g(0, col) = c;
        g(0, col + 1) = s;
        g(1, col + 2) = c;
        g(1, col + 3) = s;
    }
    g(0, 4 * harmonics) = 1.0;
    g(1, 4 * harmonics + 1) = 1.0;
    return g;
}

FitResult fit_segment(std::span<const SamplePoint> points, const ReferencePoint& s,
                      int harmonics, const AngleDomain& domain) {
    if (harmonics < 1) throw Error(ErrorCode::ValidationError, "harmonic count must be at least 1");
    const std::size_t n = points.size();
    const std::size_t needed = 2 * static_cast<std::size_t>(harmonics) + 2;
    if (n < needed)
        throw Error(ErrorCode::TooFewPoints,
                    std::to_string(n) + " samples cannot fit H = " + std::to_string(harmonics) +
                        " (need 2H+1 < N, i.e. N >= " + std::to_string(needed) + ")");

    const StarCheck star = check_star_shaped(points, s);
    if (!star.star_shaped)
        throw Error(ErrorCode::NotStarShaped,
                    "samples " + std::to_string(star.first) + " and " +
                        std::to_string(star.second) + " share a polar angle about " +
                        fmt_point(s));

    std::vector<double> angle(n);
    for (std::size_t i = 0; i < n; ++i) {
        angle[i] = polar_angle(points[i], s);
        if (!domain.contains(angle[i], kAngleTol))
            throw Error(ErrorCode::OutOfDomain,
                        "sample " + std::to_string(i) + " has polar angle " +
                            std::to_string(angle[i]) + " outside the segment domain");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return angle[a] < angle[b]; });

    std::vector<double> rho(n);
    Eigen::VectorXd target(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
        rho[k] = angle[order[k]];
        target[2 * k] = points[order[k]].x();
        target[2 * k + 1] = points[order[k]].y();
    }

    const std::size_t cols = 4 * static_cast<std::size_t>(harmonics) + 2;
    std::vector<double> cos_tab(harmonics * n), sin_tab(harmonics * n);
    kernels::harmonic_table(rho, harmonics, cos_tab, sin_tab);

    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(2 * n, cols);
    for (int h = 0; h < harmonics; ++h) {
        for (std::size_t k = 0; k < n; ++k) {
            const double c = cos_tab[h * n + k];
            const double sn = sin_tab[h * n + k];
            gamma(2 * k, 4 * h) = c;
            gamma(2 * k, 4 * h + 1) = sn;
            gamma(2 * k + 1, 4 * h + 2) = c;
            gamma(2 * k + 1, 4 * h + 3) = sn;
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        gamma(2 * k, cols - 2) = 1.0;
        gamma(2 * k + 1, cols - 1) = 1.0;
    }

    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gamma);
    const Eigen::MatrixXd r =
        qr.matrixR().topLeftCorner(cols, cols).triangularView<Eigen::Upper>();
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues();
    const double cond = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1]
                                                 : std::numeric_limits<double>::infinity();
    if (!(cond <= kMaxCondition))
        throw Error(ErrorCode::RankDeficient,
                    "regressor condition estimate " + std::to_string(cond) + " exceeds 1e12");

    FourierCurve curve(harmonics, qr.solve(target), s, domain);

    std::vector<Vec2> fitted(n);
    eval_curve_batch(curve, rho, fitted);
    FitReport report;
    report.n_points = n;
    report.condition_estimate = cond;
    double sq = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = (fitted[k] - points[order[k]]).norm();
        sq += d * d;
        report.max_residual = std::max(report.max_residual, d);
    }
    report.rms_residual = std::sqrt(sq / static_cast<double>(n));
    return {std::move(curve), report};
}

CurveSample sample_curve(const FourierCurve& c, double rho) {
    if (!c.domain().contains(rho))
        throw Error(ErrorCode::OutOfDomain,
                    "angle " + std::to_string(rho) + " is outside the curve domain");
    double x, y, dx, dy;
    kernels::scalar::eval_fourier({c.coeffs().data(), static_cast<std::size_t>(c.coeffs().size())},
                                  c.harmonics(), {&rho, 1},
                                  {{&x, 1}, {&y, 1}, {&dx, 1}, {&dy, 1}});
    return {{x, y}, {dx, dy}};
}

SamplePoint eval_curve(const FourierCurve& c, double rho) { return sample_curve(c, rho).point; }

Vec2 eval_tangent(const FourierCurve& c, double rho) { return sample_curve(c, rho).tangent; }

void eval_curve_batch(const FourierCurve& c, std::span<const double> rhos,
                      std::span<Vec2> points, std::span<Vec2> tangents) {
    const std::size_t n = rhos.size();
    std::vector<double> buf(4 * n);
    const std::span<double> all(buf);
    kernels::CurveBatch out{all.subspan(0, n), all.subspan(n, n), {}, {}};
    if (!tangents.empty()) {
        out.dx = all.subspan(2 * n, n);
        out.dy = all.subspan(3 * n, n);
    }
    kernels::eval_fourier({c.coeffs().data(), static_cast<std::size_t>(c.coeffs().size())},
                          c.harmonics(), rhos, out);
    for (std::size_t i = 0; i < n; ++i) {
        if (!points.empty()) points[i] = {out.x[i], out.y[i]};
        if (!tangents.empty()) tangents[i] = {out.dx[i], out.dy[i]};
    }
}

// -------------------------------------------------------------- BoundaryModel

BoundaryModel::BoundaryModel(std::vector<Segment> segments) : segments_(std::move(segments)) {
    if (segments_.empty())
        throw Error(ErrorCode::ValidationError, "boundary model needs at least one segment");
    if (segments_.size() > 1) {
        for (std::size_t i = 0; i < segments_.size(); ++i) {
            const auto& r = segments_[i].region;
            if (!r)
                throw Error(ErrorCode::ValidationError,
                            "segment " + std::to_string(i) +
                                " needs a region half-plane in a multi-segment boundary");
            if (!(r->normal.norm() > 0.0) || !r->normal.allFinite() || !r->point.allFinite())
                throw Error(ErrorCode::ValidationError,
                            "segment " + std::to_string(i) + " region normal must be nonzero");
        }
    }
}

std::optional<std::size_t> BoundaryModel::locate(const Vec2& p) const {
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const auto& r = segments_[i].region;
        if (!r || r->contains(p)) return i;
    }
    return std::nullopt;
}

PartitionCheck BoundaryModel::check_partition(const Vec2& lo, const Vec2& hi, int n) const {
    PartitionCheck out;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double tx = n > 1 ? static_cast<double>(i) / (n - 1) : 0.5;
            const double ty = n > 1 ? static_cast<double>(j) / (n - 1) : 0.5;
            const Vec2 p{lo.x() + tx * (hi.x() - lo.x()), lo.y() + ty * (hi.y() - lo.y())};
            int covering = 0, strict = 0;
            for (const auto& seg : segments_) {
                if (!seg.region || seg.region->contains(p)) ++covering;
                if (!seg.region || seg.region->strictly_contains(p)) ++strict;
            }
            if (covering == 0) ++out.uncovered;
            if (strict > 1) ++out.overlapping;
        }
    }
    out.ok = out.uncovered == 0 && out.overlapping == 0;
    return out;
}

namespace {

// Points where the curve leaves its region, i.e. crosses the region's line.
// Falls back to the domain end points when there is no crossing.
std::vector<Vec2> cutoff_points(const Segment& seg) {
    const FourierCurve& c = seg.curve;
    const AngleDomain& dom = c.domain();
    auto at = [&](double t) { return eval_curve(c, dom.clamp(wrap_two_pi(dom.lo() + t * dom.length()))); };
    if (!seg.region) {
        if (dom.is_full()) return {};
        return {at(0.0), at(1.0)};
    }
    const HalfPlane& hp = *seg.region;
    auto side = [&](double t) { return (at(t) - hp.point).dot(hp.normal); };
    constexpr int kScan = 2048;
    std::vector<Vec2> out;
    double t0 = 0.0, f0 = side(0.0);
    for (int k = 1; k <= kScan; ++k) {
        const double t1 = static_cast<double>(k) / kScan;
        const double f1 = side(t1);
        if ((f0 <= 0.0) != (f1 <= 0.0)) {
            double a = t0, b = t1, fa = f0;
            for (int it = 0; it < 60; ++it) {
                const double m = 0.5 * (a + b);
                const double fm = side(m);
                if ((fm <= 0.0) == (fa <= 0.0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            out.push_back(at(0.5 * (a + b)));
        }
        t0 = t1;
        f0 = f1;
    }
    if (out.empty() && !dom.is_full()) out = {at(0.0), at(1.0)};
    return out;
}

}  // namespace

double BoundaryModel::cutoff_gap() const {
    if (segments_.size() == 1) {
        const auto pts = cutoff_points(segments_.front());
        return pts.size() == 2 ? (pts[0] - pts[1]).norm() : 0.0;
    }
    std::vector<std::vector<Vec2>> cut;
    for (const auto& seg : segments_) cut.push_back(cutoff_points(seg));
    double gap = 0.0;
    for (std::size_t a = 0; a < cut.size(); ++a) {
        for (const Vec2& p : cut[a]) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t b = 0; b < cut.size(); ++b) {
                if (b == a) continue;
                for (const Vec2& q : cut[b]) best = std::min(best, (p - q).norm());
            }
            gap = std::max(gap, best);
        }
    }
    return gap;
}

// -------------------------------------------------------------------- sample I/O

std::vector<SamplePoint> read_samples(std::istream& in, const std::string& source) {
    std::vector<SamplePoint> pts;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::replace(line.begin(), line.end(), '\t', ' ');
        const auto first = line.find_first_not_of(" \r");
        if (first == std::string::npos || line[first] == '#') continue;

        double v[2];
        int count = 0;
        const char* p = line.data() + first;
        const char* end = line.data() + line.size();
        while (p < end) {
            while (p < end && (*p == ' ' || *p == '\r')) ++p;
            if (p == end) break;
            if (count == 2)
                throw Error(ErrorCode::ParseError,
                            source + ":" + std::to_string(lineno) + ": expected two fields");
            auto [next, ec] = std::from_chars(p, end, v[count]);
            if (ec != std::errc() || !std::isfinite(v[count]))
                throw Error(ErrorCode::ParseError,
                            source + ":" + std::to_string(lineno) + ": bad number");
            if (next < end && *next != ' ' && *next != '\r')
                throw Error(ErrorCode::ParseError,
                            source + ":" + std::to_string(lineno) + ": bad number");
            p = next;
            ++count;
        }
        if (count != 2)
            throw Error(ErrorCode::ParseError,
                        source + ":" + std::to_string(lineno) + ": expected two fields");
        pts.emplace_back(v[0], v[1]);
    }
    return pts;
}

std::vector<SamplePoint> read_samples_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open sample file " + path);
    return read_samples(in, path);
}

}  // namespace encircle
