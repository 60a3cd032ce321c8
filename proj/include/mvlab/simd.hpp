#pragma once
// Data-parallel inner loops used by the particle, Fourier and noise code.
//
// Every kernel has a scalar reference implementation (namespace `scalar`)
// and an AVX2/FMA implementation (namespace `avx2`).  The free functions in
// `mvlab::simd` dispatch to the backend selected at startup: AVX2 when the
// CPU reports avx2+fma, scalar otherwise.  MVLAB_SIMD=scalar in the
// environment forces the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace mvlab::simd {

enum class Backend { Scalar, Avx2 };

Backend active_backend() noexcept;
bool backend_supported(Backend b) noexcept;
/// Throws std::invalid_argument if the CPU cannot run `b`.
void set_backend(Backend b);
std::string_view backend_name(Backend b) noexcept;

/// out[i] = scale * sum_j tanh(x[j] - x[i]); the j == i term is included.
void tanh_self_interaction(std::span<const double> x, double scale, std::span<double> out);

/// out[i] = scale * sum_j tanh(sources[j] - targets[i]).
void tanh_cross_interaction(std::span<const double> targets, std::span<const double> sources,
                            double scale, std::span<double> out);

/// Direct (unbinned) Fourier phase sums along a uniform frequency axis:
///   re[k] += sum_j w[j] cos(xi_k x[j]),  im[k] -= sum_j w[j] sin(xi_k x[j]),
/// with xi_k = xi0 + k * dxi and k in [0, re.size()).
void phase_accumulate(std::span<const double> x, std::span<const double> w, double xi0,
                      double dxi, std::span<double> re, std::span<double> im);

/// 1-D Gaussian mixture derivatives at many points.  Bump b is
/// amp[b] * exp(-(x - center[b])^2 / (2 var[b])).  Writes the first
/// derivative to `grad` and, when non-empty, the second derivative to `hess`.
void gaussian_mixture_derivatives(std::span<const double> x, std::span<const double> amp,
                                  std::span<const double> center, std::span<const double> var,
                                  std::span<double> grad, std::span<double> hess);

namespace scalar {
void tanh_self_interaction(std::span<const double> x, double scale, std::span<double> out);
void tanh_cross_interaction(std::span<const double> targets, std::span<const double> sources,
                            double scale, std::span<double> out);
void phase_accumulate(std::span<const double> x, std::span<const double> w, double xi0,
                      double dxi, std::span<double> re, std::span<double> im);
void gaussian_mixture_derivatives(std::span<const double> x, std::span<const double> amp,
                                  std::span<const double> center, std::span<const double> var,
                                  std::span<double> grad, std::span<double> hess);
}  // namespace scalar

namespace avx2 {
void tanh_self_interaction(std::span<const double> x, double scale, std::span<double> out);
void tanh_cross_interaction(std::span<const double> targets, std::span<const double> sources,
                            double scale, std::span<double> out);
void phase_accumulate(std::span<const double> x, std::span<const double> w, double xi0,
                      double dxi, std::span<double> re, std::span<double> im);
void gaussian_mixture_derivatives(std::span<const double> x, std::span<const double> amp,
                                  std::span<const double> center, std::span<const double> var,
                                  std::span<double> grad, std::span<double> hess);
}  // namespace avx2

}  // namespace mvlab::simd
