#include "doctest.h"

#include "mvlab/semigroup.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <numbers>

using namespace mvlab;

namespace {

// S_t h(x) = E h(x + sqrt(t) Z), by adaptive quadrature.
double heat_oracle(const TestFunction& h, double t, double x) {
    auto f = [&](double z) { return h.value(x + std::sqrt(t) * z) * std::exp(-0.5 * z * z); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -12.0, 12.0, 10, 1e-14) /
           std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

TEST_CASE("closed-form heat flow matches Gaussian convolution") {
    const auto lib = test_function_library(1, 6, 17);
    for (const auto& h : lib)
        for (double t : {1e-3, 0.3, 2.0})
            for (double x : {-2.0, 0.1, 1.7}) CHECK(apply_heat(h, t).value(x) == doctest::Approx(heat_oracle(h, t, x)).epsilon(1e-11));
}

TEST_CASE("heat flow of N(0, 1) is N(0, 1 + t)") {
    const TestFunction phi = TestFunction::gaussian_density({0.0}, 1.0);
    const TestFunction out = apply_heat(phi, 0.5);
    const double v = 1.5;
    for (double x : {0.0, 0.7, -2.0})
        CHECK(out.value(x) == doctest::Approx(std::exp(-x * x / (2 * v)) / std::sqrt(2 * std::numbers::pi * v)).epsilon(1e-14));
}

TEST_CASE("semigroup law and identity at t = 0") {
    const auto lib = test_function_library(1, 5, 4);
    for (const auto& h : lib) {
        for (double x : {-1.0, 0.0, 2.0}) {
            CHECK(std::abs(apply_heat(apply_heat(h, 0.3), 0.9).value(x) - apply_heat(h, 1.2).value(x)) < 1e-14);
            CHECK(apply_heat(h, 0.0).value(x) == h.value(x));
        }
    }
}

TEST_CASE("gradient bounds hold on a small library") {
    const auto lib = test_function_library(1, 4, 8);
    const GradientBoundReport r = check_gradient_identity_bounds(lib, {1e-3, 0.1, 1.0, 5.0});
    CHECK(r.violations == 0);
    CHECK(r.rows.size() == 16);
    CHECK(r.worst_ratio_sqrt <= 1.0);
    CHECK(r.worst_ratio_linear <= 1.0);
}

TEST_CASE("resolvent constant equals a brute-force sup") {
    for (double eta : {0.5, 1.5, 0.75 * std::numbers::pi, 3.0}) {
        double best = 0.0;
        for (int i = 0; i <= 2000000; ++i) {
            const double x = i * 1e-5;
            best = std::max(best, (1.0 + x) / std::abs(std::polar(1.0, eta) + x));
        }
        CHECK(resolvent_constant(eta) == doctest::Approx(best * best).epsilon(1e-6));
    }
}

TEST_CASE("resolvent solves (lambda - Delta/2) u = h on the grid") {
    const TestFunction h = TestFunction::bump(1.0, {0.4}, 0.7);
    const FrequencyGrid g = default_function_grid(h);
    CHECK(resolvent_identity_residual(h, std::polar(4.0, 2.0), g) < 1e-12);
}

TEST_CASE("resolvent gradient norm matches quadrature") {
    const double a = 1.0, s = 0.8, eps = 0.1, m = 1.6;
    const TestFunction h = TestFunction::bump(a, {0.0}, s);
    const ResolventPoint p{9.0, 0.75 * std::numbers::pi, eps};
    const std::complex<double> lam = p.lambda();
    auto integrand = [&](double xi) {
        const double mult = std::norm(std::complex<double>(0.0, xi) / (lam + 0.5 * xi * xi));
        return std::pow(1.0 + xi * xi, m - 2 * eps) * mult * a * a * s * s * std::exp(-s * s * xi * xi);
    };
    const double exact = 2.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 60.0, 15, 1e-14);
    const double got = resolvent_gradient_norm(h, p, m - 2 * eps, default_function_grid(h));
    CHECK(got * got == doctest::Approx(exact).epsilon(1e-8));
}

TEST_CASE("resolvent decay: norms fall with rho faster than the bound") {
    const TestFunction h = TestFunction::bump(1.0, {0.0}, 1.0);
    const auto r = resolvent_decay_study(h, 0.75 * std::numbers::pi, 0.25, 1.6, {1, 4, 16, 64}, default_function_grid(h));
    for (std::size_t i = 1; i < r.norm_sq.size(); ++i) CHECK(r.norm_sq[i] < r.norm_sq[i - 1]);
    for (double q : r.ratio) CHECK(q <= 1.0);
    CHECK(r.slope <= -1.4);
}

TEST_CASE("heat gradient norm decreases in time") {
    const TestFunction h = TestFunction::bump(1.0, {0.0}, 0.5);
    const FrequencyGrid g = default_function_grid(h);
    double prev = INFINITY;
    for (double t : {0.0, 0.1, 1.0, 10.0}) {
        const double v = heat_gradient_norm(h, t, 1.0, g);
        CHECK(v < prev);
        prev = v;
    }
}
