// AVX2/FMA variants of the kernels in kernels_scalar.cpp.  This file is the
// only one compiled with -mavx2 -mfma; nothing here may run unless the
// dispatcher has confirmed CPU support.
#include "mvlab/simd.hpp"

#include <immintrin.h>

#include <cassert>
#include <cmath>
#include <vector>

namespace mvlab::simd::avx2 {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// exp(x) for |x| <= 708: Cody-Waite reduction x = n ln2 + r, |r| <= ln2/2,
// degree-13 Taylor polynomial for exp(r) (truncation < 1e-17 relative) and
// 2^n assembled in the exponent field.
inline __m256d exp_pd(__m256d x) {
    const __m256d hi = _mm256_set1_pd(708.0);
    const __m256d lo = _mm256_set1_pd(-708.0);
    x = _mm256_max_pd(_mm256_min_pd(x, hi), lo);

    const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
    const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
    r = _mm256_fnmadd_pd(n, ln2_lo, r);

    // Horner, coefficients 1/k! for k = 13 .. 0.
    __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

    // n is integral with |n| <= 1022; adding 1.5*2^52 places it in the low
    // mantissa bits.
    const __m256d magic = _mm256_set1_pd(6755399441055744.0);
    const __m256i ni = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, magic)),
                                        _mm256_castpd_si256(magic));
    const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
    return _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
}

// tanh via (e^{2z} - 1) / (e^{2z} + 1).  Absolute error ~1e-16; |z| > 20 is
// saturated, where tanh rounds to +-1 anyway.
inline __m256d tanh_pd(__m256d z) {
    const __m256d lim = _mm256_set1_pd(20.0);
    z = _mm256_max_pd(_mm256_min_pd(z, lim), _mm256_sub_pd(_mm256_setzero_pd(), lim));
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d e = exp_pd(_mm256_add_pd(z, z));
    return _mm256_div_pd(_mm256_sub_pd(e, one), _mm256_add_pd(e, one));
}

}  // namespace

void tanh_self_interaction(std::span<const double> x, double scale, std::span<double> out) {
    assert(out.size() == x.size());
    const std::size_t n = x.size();
    // tanh is odd, so each unordered pair is evaluated once and scattered
    // with opposite signs.
    std::vector<double> acc(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const __m256d xi = _mm256_set1_pd(x[i]);
        __m256d vsum = _mm256_setzero_pd();
        std::size_t j = i + 1;
        for (; j + 4 <= n; j += 4) {
            const __m256d t = tanh_pd(_mm256_sub_pd(_mm256_loadu_pd(&x[j]), xi));
            vsum = _mm256_add_pd(vsum, t);
            _mm256_storeu_pd(&acc[j], _mm256_sub_pd(_mm256_loadu_pd(&acc[j]), t));
        }
        double s = hsum(vsum);
        for (; j < n; ++j) {
            const double t = std::tanh(x[j] - x[i]);
            s += t;
            acc[j] -= t;
        }
        acc[i] += s;
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = scale * acc[i];
}

void tanh_cross_interaction(std::span<const double> targets, std::span<const double> sources,
                            double scale, std::span<double> out) {
    assert(out.size() == targets.size());
    const std::size_t m = sources.size();
    std::size_t i = 0;
    // Four targets per pass so every source load feeds four tanh evaluations.
    for (; i + 4 <= targets.size(); i += 4) {
        const __m256d t0 = _mm256_set1_pd(targets[i]);
        const __m256d t1 = _mm256_set1_pd(targets[i + 1]);
        const __m256d t2 = _mm256_set1_pd(targets[i + 2]);
        const __m256d t3 = _mm256_set1_pd(targets[i + 3]);
        __m256d a0 = _mm256_setzero_pd(), a1 = a0, a2 = a0, a3 = a0;
        std::size_t j = 0;
        for (; j + 4 <= m; j += 4) {
            const __m256d s = _mm256_loadu_pd(&sources[j]);
            a0 = _mm256_add_pd(a0, tanh_pd(_mm256_sub_pd(s, t0)));
            a1 = _mm256_add_pd(a1, tanh_pd(_mm256_sub_pd(s, t1)));
            a2 = _mm256_add_pd(a2, tanh_pd(_mm256_sub_pd(s, t2)));
            a3 = _mm256_add_pd(a3, tanh_pd(_mm256_sub_pd(s, t3)));
        }
        double r[4] = {hsum(a0), hsum(a1), hsum(a2), hsum(a3)};
        for (; j < m; ++j)
            for (int q = 0; q < 4; ++q) r[q] += std::tanh(sources[j] - targets[i + q]);
        for (int q = 0; q < 4; ++q) out[i + q] = scale * r[q];
    }
    for (; i < targets.size(); ++i) {
        const __m256d ti = _mm256_set1_pd(targets[i]);
        __m256d a = _mm256_setzero_pd();
        std::size_t j = 0;
        for (; j + 4 <= m; j += 4)
            a = _mm256_add_pd(a, tanh_pd(_mm256_sub_pd(_mm256_loadu_pd(&sources[j]), ti)));
        double r = hsum(a);
        for (; j < m; ++j) r += std::tanh(sources[j] - targets[i]);
        out[i] = scale * r;
    }
}

void phase_accumulate(std::span<const double> x, std::span<const double> w, double xi0,
                      double dxi, std::span<double> re, std::span<double> im) {
    assert(x.size() == w.size() && re.size() == im.size());
    const std::size_t K = re.size();
    if (K == 0 || x.empty()) return;
    // The phase e^{-i xi_k x} is advanced by complex rotation along k and
    // re-anchored with libm sin/cos every kResync steps, which bounds the
    // accumulated rounding drift to a few hundred ulps.
    constexpr std::size_t kResync = 256;
    std::vector<double> lane_re(4 * K, 0.0), lane_im(4 * K, 0.0);

    const std::size_t n = x.size();
    for (std::size_t b = 0; b < n; b += 4) {
        alignas(32) double xb[4] = {0, 0, 0, 0}, wb[4] = {0, 0, 0, 0};
        for (std::size_t q = 0; q < 4 && b + q < n; ++q) {
            xb[q] = x[b + q];
            wb[q] = w[b + q];
        }
        alignas(32) double rr[4], ri[4], zr[4], zi[4];
        for (int q = 0; q < 4; ++q) {
            rr[q] = std::cos(dxi * xb[q]);
            ri[q] = -std::sin(dxi * xb[q]);
        }
        const __m256d vw = _mm256_load_pd(wb);
        const __m256d vrr = _mm256_load_pd(rr);
        const __m256d vri = _mm256_load_pd(ri);
        for (std::size_t k0 = 0; k0 < K; k0 += kResync) {
            const double xi = xi0 + static_cast<double>(k0) * dxi;
            for (int q = 0; q < 4; ++q) {
                zr[q] = std::cos(xi * xb[q]);
                zi[q] = -std::sin(xi * xb[q]);
            }
            __m256d vzr = _mm256_load_pd(zr);
            __m256d vzi = _mm256_load_pd(zi);
            const std::size_t k1 = std::min(K, k0 + kResync);
            for (std::size_t k = k0; k < k1; ++k) {
                double* pr = &lane_re[4 * k];
                double* pi = &lane_im[4 * k];
                _mm256_storeu_pd(pr, _mm256_fmadd_pd(vw, vzr, _mm256_loadu_pd(pr)));
                _mm256_storeu_pd(pi, _mm256_fmadd_pd(vw, vzi, _mm256_loadu_pd(pi)));
                const __m256d nr = _mm256_fmsub_pd(vzr, vrr, _mm256_mul_pd(vzi, vri));
                const __m256d ni = _mm256_fmadd_pd(vzr, vri, _mm256_mul_pd(vzi, vrr));
                vzr = nr;
                vzi = ni;
            }
        }
    }
    for (std::size_t k = 0; k < K; ++k) {
        re[k] += hsum(_mm256_loadu_pd(&lane_re[4 * k]));
        im[k] += hsum(_mm256_loadu_pd(&lane_im[4 * k]));
    }
}

void gaussian_mixture_derivatives(std::span<const double> x, std::span<const double> amp,
                                  std::span<const double> center, std::span<const double> var,
                                  std::span<double> grad, std::span<double> hess) {
    const bool want_hess = !hess.empty();
    const std::size_t n = x.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(&x[i]);
        __m256d g = _mm256_setzero_pd();
        __m256d h = _mm256_setzero_pd();
        for (std::size_t b = 0; b < amp.size(); ++b) {
            const __m256d inv = _mm256_set1_pd(1.0 / var[b]);
            const __m256d u = _mm256_sub_pd(vx, _mm256_set1_pd(center[b]));
            const __m256d uu = _mm256_mul_pd(_mm256_mul_pd(u, u), inv);
            const __m256d e = _mm256_mul_pd(_mm256_set1_pd(amp[b]),
                                            exp_pd(_mm256_mul_pd(_mm256_set1_pd(-0.5), uu)));
            const __m256d eu = _mm256_mul_pd(_mm256_mul_pd(e, u), inv);
            g = _mm256_sub_pd(g, eu);
            if (want_hess)
                h = _mm256_fmadd_pd(_mm256_mul_pd(e, inv), _mm256_sub_pd(uu, _mm256_set1_pd(1.0)), h);
        }
        _mm256_storeu_pd(&grad[i], g);
        if (want_hess) _mm256_storeu_pd(&hess[i], h);
    }
    if (i < n) {
        scalar::gaussian_mixture_derivatives(x.subspan(i), amp, center, var, grad.subspan(i),
                                             want_hess ? hess.subspan(i) : std::span<double>{});
    }
}

}  // namespace mvlab::simd::avx2
