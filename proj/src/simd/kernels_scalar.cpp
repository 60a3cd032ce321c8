#include "mvlab/simd.hpp"

#include <cassert>
#include <cmath>

namespace mvlab::simd::scalar {

void tanh_self_interaction(std::span<const double> x, double scale, std::span<double> out) {
    assert(out.size() == x.size());
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += std::tanh(x[j] - x[i]);
        out[i] = scale * acc;
    }
}

void tanh_cross_interaction(std::span<const double> targets, std::span<const double> sources,
                            double scale, std::span<double> out) {
    assert(out.size() == targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        double acc = 0.0;
        for (double s : sources) acc += std::tanh(s - targets[i]);
        out[i] = scale * acc;
    }
}

void phase_accumulate(std::span<const double> x, std::span<const double> w, double xi0,
                      double dxi, std::span<double> re, std::span<double> im) {
    assert(x.size() == w.size() && re.size() == im.size());
    for (std::size_t k = 0; k < re.size(); ++k) {
        const double xi = xi0 + static_cast<double>(k) * dxi;
        double sr = 0.0, si = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double ph = xi * x[j];
            sr += w[j] * std::cos(ph);
            si += w[j] * std::sin(ph);
        }
        re[k] += sr;
        im[k] -= si;
    }
}

void gaussian_mixture_derivatives(std::span<const double> x, std::span<const double> amp,
                                  std::span<const double> center, std::span<const double> var,
                                  std::span<double> grad, std::span<double> hess) {
    const bool want_hess = !hess.empty();
    for (std::size_t i = 0; i < x.size(); ++i) {
        double g = 0.0, h = 0.0;
        for (std::size_t b = 0; b < amp.size(); ++b) {
            const double u = x[i] - center[b];
            const double e = amp[b] * std::exp(-0.5 * u * u / var[b]);
            g -= e * u / var[b];
            if (want_hess) h += e * (u * u / var[b] - 1.0) / var[b];
        }
        grad[i] = g;
        if (want_hess) hess[i] = h;
    }
}

}  // namespace mvlab::simd::scalar
