#include "doctest.h"

#include "mvlab/particles.hpp"

#include <cmath>
#include <sstream>

using namespace mvlab;

namespace {

SimConfig base_config(std::size_t n) {
    SimConfig c;
    c.T = 0.5;
    c.dt = 0.01;
    c.n = n;
    c.d = 1;
    c.save_times = {0.25, 0.5};
    c.initial = InitialLaw::gaussian(0.0, 1.0);
    c.seed = 99;
    return c;
}

}  // namespace

TEST_CASE("nested ladders share initial data and noise") {
    const auto small = simulate_paths(base_config(100), tanh_kernel(1));
    const auto large = simulate_paths(base_config(400), tanh_kernel(1));
    for (std::size_t i = 0; i < 100; ++i) CHECK(small.initial[i] == large.initial[i]);
    for (std::size_t k = 0; k < small.record.steps; ++k)
        for (std::size_t i = 0; i < 100; ++i) REQUIRE(small.record.step(k)[i] == large.record.step(k)[i]);
}

TEST_CASE("replaying the recorded increments reproduces the trajectory") {
    const auto run = simulate_paths(base_config(64), tanh_kernel(1));
    const auto end = replay(run, tanh_kernel(1));
    REQUIRE(end.size() == run.snapshots.back().size());
    for (std::size_t i = 0; i < end.size(); ++i) CHECK(end[i] == run.snapshots.back()[i]);
}

TEST_CASE("zero kernel gives initial position plus summed increments") {
    auto cfg = base_config(10);
    const auto run = simulate_paths(cfg, zero_kernel(1));
    for (std::size_t i = 0; i < 10; ++i) {
        double x = run.initial[i];
        for (std::size_t k = 0; k < run.record.steps; ++k) x += run.record.step(k)[i];
        CHECK(run.snapshots.back()[i] == doctest::Approx(x).epsilon(1e-14));
    }
}

TEST_CASE("a visible step is the sum of its base increments") {
    const BrownianDriver drv{5, 2, 0.001, {}};
    double step[2];
    drv.step_increment(3, 7, 4, step);
    double base[8];
    drv.base_increments(3, 28, 4, base);
    for (int a = 0; a < 2; ++a) CHECK(step[a] == doctest::Approx(base[a] + base[2 + a] + base[4 + a] + base[6 + a]));
}

TEST_CASE("brownian increments have variance dt") {
    const BrownianDriver drv{11, 1, 0.01, {}};
    double s2 = 0.0;
    const int n = 40000;
    std::vector<double> out(n);
    drv.base_increments(0, 0, n, out.data());
    for (double v : out) s2 += v * v;
    CHECK(std::abs(s2 / n - 0.01) < 5.0 * 0.01 * std::sqrt(2.0 / n));
}

TEST_CASE("mean-field drift matches the defining average") {
    auto cfg = base_config(9);
    const auto ens = make_ensemble(cfg);
    std::vector<double> all;
    mean_field_drifts(ens, tanh_kernel(1), all);
    for (std::size_t i = 0; i < 9; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 9; ++j) s += std::tanh(ens.positions[j] - ens.positions[i]);
        CHECK(all[i] == doctest::Approx(s / 9.0).epsilon(1e-13));
        CHECK(mean_field_drift(ens, tanh_kernel(1), i)[0] == doctest::Approx(s / 9.0).epsilon(1e-13));
    }
}

TEST_CASE("tanh interaction preserves the empirical mean up to noise") {
    // Antisymmetric pair forces cancel: the mean moves only by the noise.
    auto cfg = base_config(50);
    const auto run = simulate_paths(cfg, tanh_kernel(1));
    double m0 = 0.0, m1 = 0.0, noise = 0.0;
    for (std::size_t i = 0; i < 50; ++i) {
        m0 += run.initial[i];
        m1 += run.snapshots.back()[i];
        for (std::size_t k = 0; k < run.record.steps; ++k) noise += run.record.step(k)[i];
    }
    CHECK(std::abs((m1 - m0 - noise) / 50.0) < 1e-12);
}

TEST_CASE("two-cluster quantile placement is symmetric and deterministic") {
    const auto q = two_cluster_quantiles(100, -3.0, 3.0, 0.5);
    REQUIRE(q.size() == 100);
    for (std::size_t i = 0; i < 100; ++i) CHECK(q[i] == doctest::Approx(-q[99 - i]).epsilon(1e-9));
    for (std::size_t i = 1; i < 100; ++i) CHECK(q[i] > q[i - 1]);
    const auto pts = sample_initial(InitialLaw::list(q), 100, 1, 1);
    CHECK(pts == q);
}

TEST_CASE("increment records survive a binary round trip") {
    const auto run = simulate_paths(base_config(8), zero_kernel(1));
    std::stringstream ss;
    run.record.write_binary(ss);
    const auto back = IncrementRecord::read_binary(ss);
    CHECK(back.n == run.record.n);
    CHECK(back.steps == run.record.steps);
    CHECK(back.increments == run.record.increments);
}

TEST_CASE("invalid configurations are rejected") {
    auto cfg = base_config(10);
    cfg.dt = 0.0;
    CHECK_THROWS(cfg.validate());
    cfg = base_config(10);
    cfg.save_times = {0.7};
    CHECK_THROWS(cfg.validate());
    cfg = base_config(0);
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("without interaction the mean position from 0 stays at 0") {
    SimConfig c;
    c.T = 1.0;
    c.dt = 0.05;
    c.n = 10000;
    c.save_times = {1.0};
    c.initial = InitialLaw::list(std::vector<double>(10000, 0.0));
    c.seed = 31;
    const auto run = simulate_paths(c, zero_kernel(1));
    double s = 0.0, s2 = 0.0;
    for (double x : run.snapshots[0]) {
        s += x;
        s2 += x * x;
    }
    const double mean = s / 1e4, se = std::sqrt((s2 / 1e4 - mean * mean) / 1e4);
    CHECK(std::abs(mean) < 3.0 * se);
}
