#include "doctest.h"

#include "mvlab/parallel.hpp"
#include "mvlab/stats.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

using namespace mvlab;

TEST_CASE("fit on an exact three-point line") {
    // y = 3 - 2x: slope, intercept and R^2 are exact, residual is zero.
    const std::vector<double> x{0.0, 1.0, 2.0}, y{3.0, 1.0, -1.0};
    const SlopeFit f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(f.intercept == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f.residual_se < 1e-14);
    CHECK(f.points == 3);
}

TEST_CASE("log-log fit recovers a power law and propagates errors") {
    // y = 5 n^{-1}, each mean with 10% relative error: var(log y) = 0.01 at
    // every point, so slope_se = 0.1 / sqrt(sum (log n - mean)^2).
    const std::vector<double> n{64, 256, 1024, 4096};
    std::vector<double> y, se;
    for (double v : n) {
        y.push_back(5.0 / v);
        se.push_back(0.5 / v);
    }
    const SlopeFit f = fit_loglog(n, y, se);
    CHECK(f.slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::exp(f.intercept) == doctest::Approx(5.0).epsilon(1e-12));
    double sxx = 0.0;
    const double mean = (std::log(64.0) + std::log(4096.0)) / 2.0;
    for (double v : n) sxx += (std::log(v) - mean) * (std::log(v) - mean);
    CHECK(f.slope_se == doctest::Approx(0.1 / std::sqrt(sxx)).epsilon(1e-10));
    CHECK(f.ci_low == doctest::Approx(-1.0 - 1.96 * f.slope_se));
    CHECK(f.ci_high == doctest::Approx(-1.0 + 1.96 * f.slope_se));
}

TEST_CASE("fits reject degenerate input") {
    const std::vector<double> one{1.0};
    CHECK_THROWS(fit_line(one, one));
    const std::vector<double> same{2.0, 2.0}, y{1.0, 3.0};
    CHECK_THROWS(fit_line(same, y));
    const std::vector<double> x{1.0, 2.0}, neg{1.0, -1.0};
    CHECK_THROWS(fit_loglog(x, neg));
}

TEST_CASE("mean, standard error and rms") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const MeanSe m = mean_se(v);
    CHECK(m.mean == doctest::Approx(2.5));
    CHECK(m.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(rms_se(v).mean == doctest::Approx(std::sqrt(7.5)));
}

TEST_CASE("pairwise sum is exact on representable data and order-stable") {
    std::vector<double> v(1000);
    std::iota(v.begin(), v.end(), 1.0);
    CHECK(pairwise_sum(v) == 500500.0);
    std::vector<double> tiny(1 << 16, 0.1);
    CHECK(std::abs(pairwise_sum(tiny) - 6553.6) < 1e-9);
}

TEST_CASE("parallel_for writes every slot independently of thread count") {
    for (int threads : {1, 2, 5}) {
        std::vector<double> out(97, -1.0);
        parallel_for(out.size(), threads, [&](std::size_t i) { out[i] = std::sqrt(double(i)); });
        for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == std::sqrt(double(i)));
    }
    CHECK_THROWS_AS(parallel_for(10, 2, [](std::size_t i) { if (i == 3) throw std::runtime_error("x"); }),
                    std::runtime_error);
}
