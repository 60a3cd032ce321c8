#include "doctest.h"

#include "mvlab/mv_solver.hpp"

#include <cmath>
#include <numbers>

using namespace mvlab;

namespace {

double mean_of(const GridMeasure& g) {
    double s = 0.0;
    for (std::size_t c = 0; c < g.N; ++c) s += g.center(c) * g.density[c];
    return s * g.spacing();
}

MVSolverConfig small_config() {
    MVSolverConfig c;
    c.L = 10.0;
    c.N = 400;
    c.dt = 0.02;
    c.T = 0.5;
    return c;
}

}  // namespace

TEST_CASE("interaction field of a point mass at 2 is tanh(2) at the origin") {
    const std::vector<double> atom{2.0}, at{0.0};
    const EmpiricalMeasureView mu{1, atom, {}};
    CHECK(conv_gamma_at(mu, tanh_kernel(1), at)[0] == doctest::Approx(0.96402758007581690).epsilon(1e-14));
    // A narrow Gaussian around 2 gives tanh(2) + tanh''(2) sd^2 / 2 to leading order.
    const GridMeasure g = GridMeasure::gaussian(1, 10.0, 2000, 2.0, 0.05);
    const VelocityField v = conv_gamma(g, tanh_kernel(1));
    const double t = std::tanh(2.0), second = -2.0 * t * (1.0 - t * t);
    CHECK(v.at(999, 0) == doctest::Approx(std::tanh(2.0 + 0.005) + 0.5 * second * 0.0025).epsilon(2e-4));
}

TEST_CASE("correlation-based convolution matches a direct double sum") {
    const GridMeasure g = GridMeasure::from_law(InitialLaw::two_cluster(-2.0, 1.5, 0.7), 8.0, 320);
    const VelocityField v = conv_gamma(g, tanh_kernel(1));
    const double h = g.spacing();
    for (std::size_t i = 0; i < g.N; i += 17) {
        double s = 0.0;
        for (std::size_t j = 0; j < g.N; ++j) s += std::tanh(g.center(j) - g.center(i)) * g.density[j] * h;
        CHECK(v.at(i, 0) == doctest::Approx(s).epsilon(1e-11).scale(1e-13));
    }
    const VelocityField z = conv_gamma(g, zero_kernel(1));
    CHECK(z.sup_abs() == 0.0);
}

TEST_CASE("heat-only solve matches the closed-form Gaussian flow") {
    MVSolverConfig c = small_config();
    c.T = 1.0;
    const GridMeasure nu0 = GridMeasure::gaussian(1, c.L, c.N, 0.3, 1.0);
    const MVSolution sol = solve_mv(nu0, zero_kernel(1), c);
    const GridMeasure exact = GridMeasure::gaussian(1, c.L, c.N, 0.3, std::sqrt(2.0));
    CHECK(l1_distance(sol.states.back(), exact) < 1e-4);
}

TEST_CASE("transport by a whole number of cells is an exact shift") {
    const GridMeasure nu = GridMeasure::gaussian(1, 5.0, 200, 0.0, 0.8);
    VelocityField v{1, 5.0, 200, std::vector<double>(200, 1.0)};
    const GridMeasure out = transport_step(nu, v, 2.0 * nu.spacing());
    for (std::size_t c = 0; c < 200; ++c) CHECK(out.density[(c + 2) % 200] == doctest::Approx(nu.density[c]).epsilon(1e-12).scale(1e-14));
}

TEST_CASE("splitting steps conserve mass and positivity") {
    const MVSolverConfig c = small_config();
    const GridMeasure nu0 = GridMeasure::from_law(InitialLaw::two_cluster(-3.0, 3.0, 0.5), c.L, c.N);
    const MVSolution sol = solve_mv(nu0, tanh_kernel(1), c);
    for (const auto& s : sol.states) {
        CHECK(s.mass() == doctest::Approx(nu0.mass()).epsilon(1e-12));
        for (double d : s.density) REQUIRE(d >= 0.0);
    }
    CHECK(sol.log.steps == c.steps());
    CHECK(sol.log.max_step_drift < 1e-9);
}

TEST_CASE("symmetric data stay symmetric and the mean is preserved") {
    const MVSolverConfig c = small_config();
    const GridMeasure nu0 = GridMeasure::from_law(InitialLaw::two_cluster(-2.5, 2.5, 0.6), c.L, c.N);
    const MVSolution sol = solve_mv(nu0, tanh_kernel(1), c);
    const auto& last = sol.states.back();
    double asym = 0.0;
    for (std::size_t i = 0; i < last.N; ++i) asym = std::max(asym, std::abs(last.density[i] - last.density[last.N - 1 - i]));
    CHECK(asym < 1e-8);
    const GridMeasure shifted = GridMeasure::gaussian(1, c.L, c.N, 0.7, 1.0);
    const MVSolution s2 = solve_mv(shifted, tanh_kernel(1), c);
    CHECK(std::abs(mean_of(s2.states.back()) - mean_of(shifted)) < 1e-8);
}

TEST_CASE("Strang splitting beats Lie splitting against a fine reference") {
    MVSolverConfig c = small_config();
    const GridMeasure nu0 = GridMeasure::from_law(InitialLaw::two_cluster(-2.0, 2.0, 0.5), c.L, c.N);
    MVSolverConfig fine = c;
    fine.dt = c.dt / 8.0;
    const GridMeasure ref = solve_mv(nu0, tanh_kernel(1), fine).states.back();
    c.splitting = Splitting::Lie;
    const double lie = l1_distance(solve_mv(nu0, tanh_kernel(1), c).states.back(), ref);
    c.splitting = Splitting::Strang;
    const double strang = l1_distance(solve_mv(nu0, tanh_kernel(1), c).states.back(), ref);
    CHECK(strang < lie);
}

TEST_CASE("weak-mild residual vanishes on the exact heat flow and is small on solved paths") {
    const GaussianHeatPath heat(1, 0.0, 1.0, 1.0);
    const TestFunction h = TestFunction::bump(1.0, {0.5}, 0.7);
    CHECK(weak_mild_residual(heat, h, 1.0).residual < 1e-12);
    MVSolverConfig c = small_config();
    c.dt = 0.01;
    c.N = 800;
    const MVSolution sol = solve_mv(GridMeasure::gaussian(1, c.L, c.N, 0.0, 1.0), tanh_kernel(1), c);
    const GridSolutionPath path(sol);
    CHECK(weak_mild_residual(path, h, 0.5).residual < 5e-3);
}

TEST_CASE("growth factor is zero for equal data and at most one without interaction") {
    const MVSolverConfig c = small_config();
    const FrequencyGrid g = default_measure_grid(1);
    const GridMeasure a = GridMeasure::gaussian(1, c.L, c.N, 0.0, 1.0);
    CHECK(gronwall_growth_factor(a, a, tanh_kernel(1), c, 1.6, g) == 0.0);
    const GridMeasure b = GridMeasure::gaussian(1, c.L, c.N, 0.5, 1.2);
    CHECK(gronwall_growth_factor(a, b, zero_kernel(1), c, 1.6, g) <= 1.0 + 1e-12);
}

TEST_CASE("empirical distance to the grid solution decreases in m") {
    SimConfig sc;
    sc.T = 0.5;
    sc.dt = 0.02;
    sc.n = 400;
    sc.save_times = {0.5};
    sc.seed = 12;
    const auto run = simulate_paths(sc, tanh_kernel(1));
    const MVSolution sol = solve_mv(GridMeasure::gaussian(1, 10.0, 400, 0.0, 1.0), tanh_kernel(1), small_config());
    const EmpiricalMeasureView mu{1, run.snapshots[0], {}};
    const FrequencyGrid g = default_measure_grid(1);
    double prev = INFINITY;
    for (double m : {1.0, 1.6, 2.5}) {
        const double v = hminus_distance(mu, sol.states.back(), m, g).value;
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("configuration guards") {
    MVSolverConfig c = small_config();
    c.dt = 1.0;  // dt * sup|Gamma| far beyond four cells
    CHECK_THROWS(c.validate(tanh_kernel(1)));
    c = small_config();
    c.T = 0.51;
    CHECK_THROWS(c.validate(tanh_kernel(1)));
    OracleConfig o;
    o.N = 500;
    CHECK_THROWS(o.validate());
    o = OracleConfig{};
    o.K = 2;
    CHECK_THROWS(o.validate());
}

TEST_CASE("clipping is logged and renormalised") {
    // A single-cell spike rings under cubic interpolation.
    GridMeasure nu = GridMeasure::zeros(1, 5.0, 100);
    nu.density[50] = 1.0 / nu.spacing();
    VelocityField v{1, 5.0, 100, std::vector<double>(100, 1.0)};
    StepLog log;
    const GridMeasure out = transport_step(nu, v, 0.37 * nu.spacing(), &log);
    CHECK(log.clip_events > 0);
    CHECK(out.mass() == doctest::Approx(1.0).epsilon(1e-12));
    for (double d : out.density) CHECK(d >= 0.0);
}

TEST_CASE("without interaction the Picard oracle is fixed after one iterate") {
    OracleConfig o;
    o.T = 0.2;
    o.save_every = 5;
    const OracleResult r = nonlinear_process_oracle(zero_kernel(1), o);
    REQUIRE(r.increments.size() == 3);
    CHECK(r.increments[1] <= r.noise_floor);
    CHECK(r.increments[2] <= r.noise_floor);
    CHECK(r.noise_floor == doctest::Approx(point_mass_norm(1.6, 1) / 100.0));
}
