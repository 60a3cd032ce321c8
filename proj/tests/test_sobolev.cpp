#include "doctest.h"

#include "mvlab/sobolev.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <numbers>
#include <vector>

using namespace mvlab;

namespace {

// |delta|_{-m}^2 = (2 pi)^{-1} int (1 + xi^2)^{-m} dxi, by quadrature.
double point_mass_oracle(double m) {
    boost::math::quadrature::exp_sinh<double> q;
    const double half = q.integrate([m](double x) { return std::pow(1.0 + x * x, -m); });
    return std::sqrt(2.0 * half / (2.0 * std::numbers::pi));
}

}  // namespace

TEST_CASE("point mass norm matches quadrature") {
    for (double m : {0.75, 1.0, 1.6, 2.5}) {
        CAPTURE(m);
        CHECK(point_mass_norm(m, 1) == doctest::Approx(point_mass_oracle(m)).epsilon(1e-10));
    }
    CHECK(point_mass_norm(1.0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("grid norm of a single atom with tail correction") {
    const FrequencyGrid g = default_measure_grid(1);
    for (double x0 : {0.0, 3.7}) {
        const std::vector<double> atom{x0};
        const EmpiricalMeasureView mu{1, atom, {}};
        const NormReport r = hminus_norm(mu, 1.0, g);
        CHECK(std::abs(r.value - 1.0 / std::sqrt(2.0)) < 1e-3);
        CHECK(r.tail_term > 0.0);
        const NormReport off = weighted_norm(spectrum(mu, g), -1.0, AtomicTail::Off);
        CHECK(off.tail_term == 0.0);
        CHECK(off.value < r.value);
    }
}

TEST_CASE("standard normal density has L2 norm (4 pi)^{-1/4}") {
    const TestFunction phi = TestFunction::gaussian_density({0.0}, 1.0);
    CHECK(hs_norm(phi, 0.0) == doctest::Approx(std::pow(4.0 * std::numbers::pi, -0.25)).epsilon(1e-8));
}

TEST_CASE("H^1 norm of a bump matches the real-space integral") {
    // |h|_1^2 = int h^2 + h'^2 = a^2 s sqrt(pi) (1 + 1/(2 s^2)).
    const double a = 0.8, s = 0.6;
    const TestFunction h = TestFunction::bump(a, {1.3}, s);
    const double exact = a * a * s * std::sqrt(std::numbers::pi) * (1.0 + 0.5 / (s * s));
    CHECK(hs_norm(h, 1.0) * hs_norm(h, 1.0) == doctest::Approx(exact).epsilon(1e-8));
}

TEST_CASE("negative norms decrease in m") {
    const FrequencyGrid g = default_measure_grid(1);
    const std::vector<double> atoms{-1.0, 0.2, 0.3, 2.5};
    const EmpiricalMeasureView mu{1, atoms, {}};
    double prev = INFINITY;
    for (double m : {0.8, 1.0, 1.6, 2.0, 3.0}) {
        const double v = hminus_norm(mu, m, g).value;
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("duality: pairing bounded by the product of norms") {
    const FrequencyGrid g = default_measure_grid(1);
    const std::vector<double> atoms{-0.5, 0.1, 1.4, 2.0, -2.2};
    const EmpiricalMeasureView mu{1, atoms, {}};
    const auto lib = test_function_library(1, 10, 3);
    for (const auto& h : lib) CHECK(std::abs(dual_pairing(mu, h)) <= hminus_norm(mu, 1.6, g).value * hs_norm(h, 1.6) + 1e-12);
}

TEST_CASE("empirical and grid distance shrink for a matching grid measure") {
    const FrequencyGrid g = default_measure_grid(1);
    const GridMeasure nu = GridMeasure::gaussian(1, 10.0, 800, 0.0, 1.0);
    const std::vector<double> same{0.0};
    const EmpiricalMeasureView one{1, same, {}};
    // A single atom cannot match nu; mid-quantile atoms of N(0, 1) nearly do.
    const double d1 = hminus_distance(one, nu, 1.6, g).value;
    const auto q = two_cluster_quantiles(2000, 0.0, 0.0, 1.0);
    const EmpiricalMeasureView spread{1, q, {}};
    const double d2 = hminus_distance(spread, nu, 1.6, g).value;
    CHECK(d2 < 0.05 * d1);
}

TEST_CASE("atomic fields flag divergence when s >= -d/2") {
    const FrequencyGrid g = default_measure_grid(1);
    const std::vector<double> atom{0.0};
    const EmpiricalMeasureView mu{1, atom, {}};
    CHECK(weighted_norm(spectrum(mu, g), -0.4).divergent);
    CHECK_FALSE(weighted_norm(spectrum(mu, g), -0.6).divergent);
}

TEST_CASE("smooth fields raise the truncation alarm on a short grid") {
    const TestFunction narrow = TestFunction::bump(1.0, {0.0}, 0.05);
    const FrequencyGrid short_grid = FrequencyGrid::make(1, 10.0, 201);
    CHECK(hs_norm_report(narrow, 0.0, short_grid).truncation_alarm);
    CHECK_FALSE(hs_norm_report(narrow, 0.0, default_function_grid(narrow)).truncation_alarm);
}

TEST_CASE("frequency grid is symmetric and weights integrate constants") {
    const FrequencyGrid g = FrequencyGrid::make(1, 5.0, 101);
    CHECK(g.nodes[50] == 0.0);
    CHECK(g.nodes.front() == doctest::Approx(-5.0));
    double w = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) w += g.weight(k);
    CHECK(w == doctest::Approx(10.0));
    CHECK_THROWS(FrequencyGrid::make(1, 5.0, 100));
}

TEST_CASE("embedding probe: atomic measures never exceed the single-atom norm") {
    // Triangle inequality: |(1/n) sum delta_{x_j}|_{-m} <= |delta_0|_{-m}.
    const FrequencyGrid g = default_measure_grid(1);
    const EmbeddingProbe p = embedding_constant_probe(1.0, g, 1000, 7, 50);
    CHECK(p.trials == 1000);
    CHECK(p.max_atomic <= p.point_mass + 1e-9);
    CHECK(p.max_atomic <= 1.0 / std::sqrt(2.0) + 1e-3);
    CHECK(p.point_mass == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
    CHECK(std::isfinite(p.max_continuous));
}
