#include "doctest.h"

#include "mvlab/rng.hpp"
#include "mvlab/roughpath.hpp"
#include "mvlab/semigroup.hpp"

#include <cmath>
#include <vector>

using namespace mvlab;

namespace {

std::vector<double> normals(std::size_t count, double sd, std::uint64_t seed) {
    const CounterRng rng(seed);
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = sd * rng.normal(0, static_cast<std::uint32_t>(i), 0, StreamTag::Misc);
    return v;
}

}  // namespace

TEST_CASE("Chen relation holds on a two-dimensional lift") {
    const auto sub = normals(40 * 4 * 2, 0.05, 1);
    const RoughLift lift = RoughLift::from_subincrements(2, 0.01, 4, sub);
    double worst = 0.0;
    for (std::size_t s = 0; s <= 40; s += 3)
        for (std::size_t u = s; u <= 40; u += 4)
            for (std::size_t t = u; t <= 40; t += 5) worst = std::max(worst, lift.chen_residual(s, u, t));
    CHECK(worst < 1e-14);
}

TEST_CASE("one-dimensional Ito area is (B^2 - discrete quadratic variation) / 2") {
    const int refine = 3;
    const auto sub = normals(30 * refine, 0.1, 2);
    const RoughLift lift = RoughLift::from_subincrements(1, 0.03, refine, sub);
    for (std::size_t s : {0u, 4u, 11u})
        for (std::size_t t : {12u, 20u, 30u}) {
            double qv = 0.0;
            for (std::size_t i = s * refine; i < t * refine; ++i) qv += sub[i] * sub[i];
            const double b = lift.increment1(s, t);
            CHECK(lift.iterated1(s, t) == doctest::Approx(0.5 * (b * b - qv)).epsilon(1e-12));
        }
}

TEST_CASE("a frozen driver has vanishing lift and germ") {
    const std::vector<double> zero(16 * 2, 0.0);
    const RoughLift lift = RoughLift::from_subincrements(1, 0.0625, 2, zero);
    CHECK(lift.increment1(0, 16) == 0.0);
    CHECK(lift.iterated1(0, 16) == 0.0);
    const ControlledPath x = ControlledPath::frozen(lift, {0.3});
    const GermA A(TestFunction::bump(1.0, {0.0}, 1.0), x, lift);
    const HolderReport r = germ_holder_norms(A, 5000);
    CHECK(r.germ_norm == 0.0);
    CHECK(r.delta_norm == 0.0);
}

TEST_CASE("frozen-path germ is grad S h(x0) times the increment") {
    const auto sub = normals(32, 0.15, 3);
    const RoughLift lift = RoughLift::from_subincrements(1, 1.0 / 32, 1, sub);
    const TestFunction h = TestFunction::bump(0.9, {0.2}, 0.6);
    const ControlledPath x = ControlledPath::frozen(lift, {0.5});
    const GermA A(h, x, lift);
    for (std::size_t s : {0u, 7u})
        for (std::size_t t : {9u, 32u}) {
            const double g = apply_heat(h, (t - s) / 32.0).derivative1(0.5);
            CHECK(A(t, s) == doctest::Approx(g * lift.increment1(s, t)).epsilon(1e-13));
        }
}

TEST_CASE("twisted coboundary: dhat dhat q = 0 and S = Id gives the classical delta") {
    const TestFunction f = TestFunction::bump(1.0, {0.1}, 0.8);
    const std::vector<double> path = normals(25, 0.6, 4);
    const OneIncrement q = [&](const TestFunction& g, std::size_t t) { return g.value(path[t]); };
    const HeatFamily S{0.04, 1.0};
    const ThreeIncrement z = delta_hat_2(delta_hat_1(q, S), S);
    for (std::size_t s = 0; s < 25; s += 4)
        for (std::size_t u = s; u < 25; u += 3)
            for (std::size_t t = u; t < 25; t += 5) CHECK(std::abs(z(f, t, u, s)) < 1e-14);

    // Random two-increment; with rate 0 the twisted and classical deltas agree.
    const std::vector<double> r = normals(25 * 25, 1.0, 5);
    const TwoIncrement A = [&](const TestFunction& g, std::size_t t, std::size_t s) { return r[t * 25 + s] * g.value(0.3); };
    const HeatFamily id{0.04, 0.0};
    const ThreeIncrement twisted = delta_hat_2(A, id), classical = delta_2(A);
    for (std::size_t s = 0; s < 25; s += 6)
        for (std::size_t u = s; u < 25; u += 5)
            for (std::size_t t = u; t < 25; t += 4) CHECK(twisted(f, t, u, s) == classical(f, t, u, s));
}

TEST_CASE("germ coboundary: cached form, generic form and four-term split agree") {
    const auto sub = normals(48 * 4, 0.1, 6);
    const RoughLift lift = RoughLift::from_subincrements(1, 1.0 / 48, 4, sub);
    ControlledPath x;
    x.driver = &lift;
    x.x.resize(49);
    for (std::size_t k = 0; k <= 48; ++k) x.x[k] = 0.2 + lift.increment1(0, k) + 0.1 * k / 48.0;
    const TestFunction f = TestFunction::bump(1.0, {0.0}, 0.7);
    const GermA A(f, x, lift);
    const ThreeIncrement generic = delta_hat_2(A.as_two_increment(), HeatFamily{1.0 / 48, 1.0});
    for (std::size_t s = 0; s < 48; s += 5)
        for (std::size_t u = s; u <= 48; u += 7)
            for (std::size_t t = u; t <= 48; t += 6) {
                const double d = A.delta_hat(t, u, s);
                CHECK(d == doctest::Approx(generic(f, t, u, s)).epsilon(1e-10).scale(1e-12));
                CHECK(std::abs(A.split(t, u, s).sum() - d) < 1e-13);
            }
}

TEST_CASE("finest sewing level equals the full partition sum") {
    const auto sub = normals(64 * 2, 0.09, 7);
    const RoughLift lift = RoughLift::from_subincrements(1, 1.0 / 64, 2, sub);
    ControlledPath x;
    x.driver = &lift;
    x.x.resize(65);
    for (std::size_t k = 0; k <= 64; ++k) x.x[k] = lift.increment1(0, k);
    const GermA A(TestFunction::bump(1.0, {0.0}, 1.0), x, lift);
    const SewingResult r = sewing_integral(A, 64, 5);
    std::vector<std::size_t> nodes(65);
    for (std::size_t k = 0; k <= 64; ++k) nodes[k] = k;
    CHECK(r.value == doctest::Approx(partition_sum(A, nodes)).epsilon(1e-13));
    CHECK(r.intervals.back() == 64);
    CHECK(r.diffs.size() == 4);
    CHECK_THROWS(sewing_integral(A, 63, 5));
}

TEST_CASE("Cauchy gaps pooled over realizations decay under refinement") {
    std::vector<SewingResult> runs;
    for (std::uint64_t r = 0; r < 40; ++r) {
        const auto sub = normals(256 * 4, std::sqrt(1.0 / 1024), 100 + r);
        const RoughLift lift = RoughLift::from_subincrements(1, 1.0 / 256, 4, sub);
        ControlledPath x;
        x.driver = &lift;
        x.x.resize(257);
        for (std::size_t k = 0; k <= 256; ++k) x.x[k] = lift.increment1(0, k);
        const GermA A(TestFunction::bump(1.0, {0.0}, 1.0), x, lift);
        runs.push_back(sewing_integral(A, 256, 5));
    }
    const CauchyDecay c = pooled_cauchy_decay(runs);
    CHECK(c.ratios.size() == 3);
    CHECK(c.pass);
}
