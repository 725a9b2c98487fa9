// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include "encircle/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstddef>

namespace encircle::kernels::avx2 {

namespace {

constexpr std::size_t kLanes = 4;

inline void load_base(const double* angles, __m256d& c1, __m256d& s1) {
    alignas(32) double c[kLanes], s[kLanes];
    for (std::size_t l = 0; l < kLanes; ++l) {
        c[l] = std::cos(angles[l]);
        s[l] = std::sin(angles[l]);
    }
    c1 = _mm256_load_pd(c);
    s1 = _mm256_load_pd(s);
}

// (c, s) <- (c·c1 − s·s1, s·c1 + c·s1)
inline void advance(__m256d& c, __m256d& s, __m256d c1, __m256d s1) {
    const __m256d cn = _mm256_fmsub_pd(c, c1, _mm256_mul_pd(s, s1));
    s = _mm256_fmadd_pd(s, c1, _mm256_mul_pd(c, s1));
    c = cn;
}

}  // namespace

void harmonic_table(std::span<const double> angles, int harmonics,
                    std::span<double> cos_out, std::span<double> sin_out) {
    const std::size_t n = angles.size();
    const std::size_t body = n - n % kLanes;
    for (std::size_t i = 0; i < body; i += kLanes) {
        __m256d c1, s1;
        load_base(angles.data() + i, c1, s1);
        __m256d c = c1, s = s1;
        for (int h = 0; h < harmonics; ++h) {
            _mm256_storeu_pd(cos_out.data() + h * n + i, c);
            _mm256_storeu_pd(sin_out.data() + h * n + i, s);
            advance(c, s, c1, s1);
        }
    }
    if (body < n) {
        // Tail goes through the scalar path one column at a time so the
        // output layout (stride n) is preserved.
        for (std::size_t i = body; i < n; ++i) {
            const double c1 = std::cos(angles[i]);
            const double s1 = std::sin(angles[i]);
            double c = c1, s = s1;
            for (int h = 0; h < harmonics; ++h) {
                cos_out[h * n + i] = c;
                sin_out[h * n + i] = s;
                const double cn = c * c1 - s * s1;
                s = s * c1 + c * s1;
                c = cn;
            }
        }
    }
}

void eval_fourier(std::span<const double> coeffs, int harmonics,
                  std::span<const double> angles, CurveBatch out) {
    const std::size_t n = angles.size();
    const std::size_t body = n - n % kLanes;
    const double* z = coeffs.data();
    const __m256d e = _mm256_set1_pd(z[4 * harmonics]);
    const __m256d f = _mm256_set1_pd(z[4 * harmonics + 1]);

    alignas(32) double buf[4][kLanes];
    for (std::size_t i = 0; i < body; i += kLanes) {
        __m256d c1, s1;
        load_base(angles.data() + i, c1, s1);
        __m256d c = c1, s = s1;
        __m256d x = e, y = f;
        __m256d dx = _mm256_setzero_pd(), dy = _mm256_setzero_pd();
        for (int h = 0; h < harmonics; ++h) {
            const double* eta = z + 4 * h;
            const __m256d a = _mm256_set1_pd(eta[0]);
            const __m256d b = _mm256_set1_pd(eta[1]);
            const __m256d cc = _mm256_set1_pd(eta[2]);
            const __m256d d = _mm256_set1_pd(eta[3]);
            const __m256d hh = _mm256_set1_pd(static_cast<double>(h + 1));
            x = _mm256_fmadd_pd(a, c, _mm256_fmadd_pd(b, s, x));
            y = _mm256_fmadd_pd(cc, c, _mm256_fmadd_pd(d, s, y));
            dx = _mm256_fmadd_pd(hh, _mm256_fmsub_pd(b, c, _mm256_mul_pd(a, s)), dx);
            dy = _mm256_fmadd_pd(hh, _mm256_fmsub_pd(d, c, _mm256_mul_pd(cc, s)), dy);
            advance(c, s, c1, s1);
        }
        _mm256_store_pd(buf[0], x);
        _mm256_store_pd(buf[1], y);
        _mm256_store_pd(buf[2], dx);
        _mm256_store_pd(buf[3], dy);
        for (std::size_t l = 0; l < kLanes; ++l) {
            if (!out.x.empty()) out.x[i + l] = buf[0][l];
            if (!out.y.empty()) out.y[i + l] = buf[1][l];
            if (!out.dx.empty()) out.dx[i + l] = buf[2][l];
            if (!out.dy.empty()) out.dy[i + l] = buf[3][l];
        }
    }
    if (body < n) {
        auto tail = [&](std::span<double> s) { return s.empty() ? s : s.subspan(body); };
        scalar::eval_fourier(coeffs, harmonics, angles.subspan(body),
                             {tail(out.x), tail(out.y), tail(out.dx), tail(out.dy)});
    }
}

}  // namespace encircle::kernels::avx2
