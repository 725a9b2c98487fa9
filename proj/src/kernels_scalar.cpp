#include "encircle/kernels.hpp"

#include <cmath>
#include <cstddef>

namespace encircle::kernels::scalar {

void harmonic_table(std::span<const double> angles, int harmonics,
                    std::span<double> cos_out, std::span<double> sin_out) {
    const std::size_t n = angles.size();
    for (std::size_t i = 0; i < n; ++i) {
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

void eval_fourier(std::span<const double> coeffs, int harmonics,
                  std::span<const double> angles, CurveBatch out) {
    const double* z = coeffs.data();
    const double e = z[4 * harmonics];
    const double f = z[4 * harmonics + 1];
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const double c1 = std::cos(angles[i]);
        const double s1 = std::sin(angles[i]);
        double c = c1, s = s1;
        double x = e, y = f, dx = 0.0, dy = 0.0;
        for (int h = 0; h < harmonics; ++h) {
            const double* eta = z + 4 * h;
            const double hh = h + 1;
            x += eta[0] * c + eta[1] * s;
            y += eta[2] * c + eta[3] * s;
            dx += hh * (eta[1] * c - eta[0] * s);
            dy += hh * (eta[3] * c - eta[2] * s);
            const double cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
        }
        if (!out.x.empty()) out.x[i] = x;
        if (!out.y.empty()) out.y[i] = y;
        if (!out.dx.empty()) out.dx[i] = dx;
        if (!out.dy.empty()) out.dy[i] = dy;
    }
}

}  // namespace encircle::kernels::scalar
