#include "doctest.h"

#include "mvlab/rng.hpp"
#include "mvlab/simd.hpp"

#include <cmath>
#include <vector>

using namespace mvlab;

namespace {

std::vector<double> random_points(std::size_t n, std::uint32_t stream, double scale) {
    const CounterRng rng(42);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = scale * rng.normal(stream, static_cast<std::uint32_t>(i), 0, StreamTag::Misc);
    return x;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Odd sizes exercise the scalar tails of the vector loops.
const std::size_t kSizes[] = {1, 3, 4, 7, 33, 130};

}  // namespace

TEST_CASE("scalar tanh interaction matches a naive double loop") {
    const auto x = random_points(37, 1, 2.0);
    std::vector<double> out(x.size());
    simd::scalar::tanh_self_interaction(x, 0.5, out);
    for (std::size_t i = 0; i < x.size(); ++i) {
        double s = 0.0;
        for (double y : x) s += std::tanh(y - x[i]);
        CHECK(out[i] == doctest::Approx(0.5 * s).epsilon(1e-13));
    }
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
    if (!simd::backend_supported(simd::Backend::Avx2)) {
        MESSAGE("AVX2 not available on this host; equivalence test skipped");
        return;
    }
    for (std::size_t n : kSizes) {
        CAPTURE(n);
        const auto x = random_points(n, 2, 3.0);
        const auto y = random_points(n + 5, 3, 3.0);
        std::vector<double> a(n), b(n);

        simd::scalar::tanh_self_interaction(x, 1.0 / n, a);
        simd::avx2::tanh_self_interaction(x, 1.0 / n, b);
        CHECK(max_abs_diff(a, b) < 1e-13);

        simd::scalar::tanh_cross_interaction(x, y, 0.25, a);
        simd::avx2::tanh_cross_interaction(x, y, 0.25, b);
        CHECK(max_abs_diff(a, b) < 1e-13 * (n + 5));

        std::vector<double> w(n, 1.0 / n), re1(17), im1(17), re2(17), im2(17);
        simd::scalar::phase_accumulate(x, w, -4.0, 0.5, re1, im1);
        simd::avx2::phase_accumulate(x, w, -4.0, 0.5, re2, im2);
        CHECK(max_abs_diff(re1, re2) < 1e-12);
        CHECK(max_abs_diff(im1, im2) < 1e-12);

        const std::vector<double> amp{1.0, -0.4, 0.3}, center{0.0, 1.0, -2.0}, var{1.0, 0.3, 2.5};
        std::vector<double> g1(n), h1(n), g2(n), h2(n);
        simd::scalar::gaussian_mixture_derivatives(x, amp, center, var, g1, h1);
        simd::avx2::gaussian_mixture_derivatives(x, amp, center, var, g2, h2);
        CHECK(max_abs_diff(g1, g2) < 1e-13);
        CHECK(max_abs_diff(h1, h2) < 1e-13);
    }
}

TEST_CASE("avx2 tanh saturates cleanly for large arguments") {
    if (!simd::backend_supported(simd::Backend::Avx2)) return;
    const std::vector<double> t{0.0}, s{-800.0, -30.0, -1e-9, 1e-9, 30.0, 800.0, 0.0, 0.0};
    std::vector<double> a(1), b(1);
    simd::scalar::tanh_cross_interaction(t, s, 1.0, a);
    simd::avx2::tanh_cross_interaction(t, s, 1.0, b);
    CHECK(std::isfinite(b[0]));
    CHECK(std::abs(a[0] - b[0]) < 1e-14);
}

TEST_CASE("gaussian mixture derivatives match finite differences") {
    const std::vector<double> amp{0.7, 0.2}, center{0.5, -1.0}, var{0.8, 2.0};
    auto f = [&](double x) {
        double s = 0.0;
        for (std::size_t k = 0; k < amp.size(); ++k) s += amp[k] * std::exp(-0.5 * (x - center[k]) * (x - center[k]) / var[k]);
        return s;
    };
    const std::vector<double> x{-2.0, -0.3, 0.0, 0.9, 2.4};
    std::vector<double> g(x.size()), h(x.size());
    simd::gaussian_mixture_derivatives(x, amp, center, var, g, h);
    const double e = 1e-4;
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(g[i] == doctest::Approx((f(x[i] + e) - f(x[i] - e)) / (2 * e)).epsilon(1e-7));
        CHECK(h[i] == doctest::Approx((f(x[i] + e) - 2 * f(x[i]) + f(x[i] - e)) / (e * e)).epsilon(1e-5));
    }
}

TEST_CASE("dispatcher switches backends and dispatched calls follow") {
    const auto before = simd::active_backend();
    const auto x = random_points(21, 4, 1.5);
    std::vector<double> ref(x.size()), out(x.size());
    simd::scalar::tanh_self_interaction(x, 1.0, ref);
    simd::set_backend(simd::Backend::Scalar);
    CHECK(simd::active_backend() == simd::Backend::Scalar);
    simd::tanh_self_interaction(x, 1.0, out);
    CHECK(max_abs_diff(ref, out) == 0.0);
    if (simd::backend_supported(simd::Backend::Avx2)) {
        simd::set_backend(simd::Backend::Avx2);
        CHECK(simd::backend_name(simd::active_backend()) == "avx2");
    }
    simd::set_backend(before);
}
