#include "mvlab/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace mvlab::simd {
namespace {

Backend detect() noexcept {
    if (const char* env = std::getenv("MVLAB_SIMD")) {
        if (std::string(env) == "scalar") return Backend::Scalar;
    }
    return backend_supported(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& current() {
    static std::atomic<Backend> b{detect()};
    return b;
}

}  // namespace

bool backend_supported(Backend b) noexcept {
    switch (b) {
        case Backend::Scalar:
            return true;
        case Backend::Avx2:
#if defined(__x86_64__) || defined(__i386__)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
    if (!backend_supported(b))
        throw std::invalid_argument("SIMD backend not supported on this CPU: " +
                                    std::string(backend_name(b)));
    current().store(b, std::memory_order_relaxed);
}

std::string_view backend_name(Backend b) noexcept {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

void tanh_self_interaction(std::span<const double> x, double scale, std::span<double> out) {
    if (active_backend() == Backend::Avx2) return avx2::tanh_self_interaction(x, scale, out);
    scalar::tanh_self_interaction(x, scale, out);
}

void tanh_cross_interaction(std::span<const double> targets, std::span<const double> sources,
                            double scale, std::span<double> out) {
    if (active_backend() == Backend::Avx2)
        return avx2::tanh_cross_interaction(targets, sources, scale, out);
    scalar::tanh_cross_interaction(targets, sources, scale, out);
}

void phase_accumulate(std::span<const double> x, std::span<const double> w, double xi0,
                      double dxi, std::span<double> re, std::span<double> im) {
    if (active_backend() == Backend::Avx2) return avx2::phase_accumulate(x, w, xi0, dxi, re, im);
    scalar::phase_accumulate(x, w, xi0, dxi, re, im);
}

void gaussian_mixture_derivatives(std::span<const double> x, std::span<const double> amp,
                                  std::span<const double> center, std::span<const double> var,
                                  std::span<double> grad, std::span<double> hess) {
    if (active_backend() == Backend::Avx2)
        return avx2::gaussian_mixture_derivatives(x, amp, center, var, grad, hess);
    scalar::gaussian_mixture_derivatives(x, amp, center, var, grad, hess);
}

}  // namespace mvlab::simd
