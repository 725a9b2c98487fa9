#pragma once

// Batched truncated-Fourier kernels. Each entry point has a scalar reference
// implementation and, on x86-64, an AVX2/FMA variant chosen at runtime.
//
// Coefficient layout matches FourierCurve: [a_1 b_1 c_1 d_1 ... a_H b_H c_H d_H e f].
// Harmonics are generated by the angle-addition recurrence from (cos ρ, sin ρ),
// so both variants walk the same arithmetic and agree to a few ulps.

#include <span>
#include <string_view>

namespace encircle::kernels {

enum class Backend { Scalar, Avx2 };

std::string_view to_string(Backend b);

bool backend_available(Backend b);

/// Backend used by the dispatching entry points below.
Backend active_backend();

/// Pins the dispatcher to `b` (must be available). Intended for tests and benchmarks.
void force_backend(Backend b);

/// Restores automatic selection (best available).
void reset_backend();

/// cos_out[(h-1)*N + i] = cos(h·angles[i]), likewise sin_out, for h = 1..harmonics.
void harmonic_table(std::span<const double> angles, int harmonics,
                    std::span<double> cos_out, std::span<double> sin_out);

/// Curve point and dρ-derivative at every angle. Any output span may be empty
/// to skip it; non-empty spans must have angles.size() elements.
struct CurveBatch {
    std::span<double> x, y, dx, dy;
};
void eval_fourier(std::span<const double> coeffs, int harmonics,
                  std::span<const double> angles, CurveBatch out);

namespace scalar {
void harmonic_table(std::span<const double> angles, int harmonics,
                    std::span<double> cos_out, std::span<double> sin_out);
void eval_fourier(std::span<const double> coeffs, int harmonics,
                  std::span<const double> angles, CurveBatch out);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void harmonic_table(std::span<const double> angles, int harmonics,
                    std::span<double> cos_out, std::span<double> sin_out);
void eval_fourier(std::span<const double> coeffs, int harmonics,
                  std::span<const double> angles, CurveBatch out);
}  // namespace avx2
#endif

}  // namespace encircle::kernels
