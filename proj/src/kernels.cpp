#include "encircle/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace encircle::kernels {

namespace {

Backend detect() {
#if defined(__x86_64__) || defined(_M_X64)
    if (backend_available(Backend::Avx2)) return Backend::Avx2;
#endif
    return Backend::Scalar;
}

std::atomic<Backend>& selected() {
    static std::atomic<Backend> b{detect()};
    return b;
}

}  // namespace

std::string_view to_string(Backend b) {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

bool backend_available(Backend b) {
    switch (b) {
        case Backend::Scalar: return true;
        case Backend::Avx2:
#if (defined(__x86_64__) || defined(_M_X64)) && defined(__GNUC__)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

Backend active_backend() { return selected().load(std::memory_order_relaxed); }

void force_backend(Backend b) {
    if (!backend_available(b))
        throw std::invalid_argument("kernel backend not available on this CPU");
    selected().store(b, std::memory_order_relaxed);
}

void reset_backend() { selected().store(detect(), std::memory_order_relaxed); }

void harmonic_table(std::span<const double> angles, int harmonics,
                    std::span<double> cos_out, std::span<double> sin_out) {
#if defined(__x86_64__) || defined(_M_X64)
    if (active_backend() == Backend::Avx2)
        return avx2::harmonic_table(angles, harmonics, cos_out, sin_out);
#endif
    scalar::harmonic_table(angles, harmonics, cos_out, sin_out);
}

void eval_fourier(std::span<const double> coeffs, int harmonics,
                  std::span<const double> angles, CurveBatch out) {
#if defined(__x86_64__) || defined(_M_X64)
    if (active_backend() == Backend::Avx2)
        return avx2::eval_fourier(coeffs, harmonics, angles, out);
#endif
    scalar::eval_fourier(coeffs, harmonics, angles, out);
}

}  // namespace encircle::kernels
