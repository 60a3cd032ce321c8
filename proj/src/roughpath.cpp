#include "mvlab/roughpath.hpp"

#include "mvlab/rng.hpp"
#include "mvlab/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvlab {

RoughLift RoughLift::from_subincrements(int d, double dt, int refine, std::span<const double> sub,
                                        double alpha) {
    if (d < 1 || refine < 1 || !(dt > 0.0)) throw std::invalid_argument("RoughLift: bad grid");
    const std::size_t per_step = static_cast<std::size_t>(refine) * d;
    if (sub.size() % per_step != 0) throw std::invalid_argument("RoughLift: increment count not a multiple of refine*d");
    RoughLift L;
    L.d_ = d;
    L.dt_ = dt;
    L.alpha_ = alpha;
    L.steps_ = sub.size() / per_step;
    const std::size_t dd = static_cast<std::size_t>(d) * d;
    L.b0_.assign((L.steps_ + 1) * d, 0.0);
    L.bb0_.assign((L.steps_ + 1) * dd, 0.0);
    std::vector<double> run(d), step_bb(dd), step_b(d);
    for (std::size_t k = 0; k < L.steps_; ++k) {
        std::fill(run.begin(), run.end(), 0.0);
        std::fill(step_bb.begin(), step_bb.end(), 0.0);
        const double* q = sub.data() + k * per_step;
        for (int r = 0; r < refine; ++r) {
            const double* delta = q + static_cast<std::size_t>(r) * d;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) step_bb[i * d + j] += run[i] * delta[j];
            for (int i = 0; i < d; ++i) run[i] += delta[i];
        }
        step_b = run;
        const double* b_prev = &L.b0_[k * d];
        const double* bb_prev = &L.bb0_[k * dd];
        double* b_next = &L.b0_[(k + 1) * d];
        double* bb_next = &L.bb0_[(k + 1) * dd];
        for (int i = 0; i < d; ++i) b_next[i] = b_prev[i] + step_b[i];
        // Chen with s = 0, u = k, t = k + 1.
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                bb_next[i * d + j] = bb_prev[i * d + j] + step_bb[i * d + j] + b_prev[i] * step_b[j];
    }
    return L;
}

void RoughLift::increment(std::size_t s, std::size_t t, double* out) const {
    for (int i = 0; i < d_; ++i) out[i] = b0_[t * d_ + i] - b0_[s * d_ + i];
}

void RoughLift::iterated(std::size_t s, std::size_t t, double* out) const {
    const std::size_t dd = static_cast<std::size_t>(d_) * d_;
    for (int i = 0; i < d_; ++i) {
        const double bs = b0_[s * d_ + i];
        for (int j = 0; j < d_; ++j) {
            const double bts = b0_[t * d_ + j] - b0_[s * d_ + j];
            out[i * d_ + j] = bb0_[t * dd + i * d_ + j] - bb0_[s * dd + i * d_ + j] - bs * bts;
        }
    }
}

double RoughLift::increment1(std::size_t s, std::size_t t) const { return b0_[t] - b0_[s]; }

double RoughLift::iterated1(std::size_t s, std::size_t t) const {
    return bb0_[t] - bb0_[s] - b0_[s] * (b0_[t] - b0_[s]);
}

double RoughLift::chen_residual(std::size_t s, std::size_t u, std::size_t t) const {
    const std::size_t dd = static_cast<std::size_t>(d_) * d_;
    std::vector<double> ts(dd), us(dd), tu(dd), bus(d_), btu(d_);
    iterated(s, t, ts.data());
    iterated(s, u, us.data());
    iterated(u, t, tu.data());
    increment(s, u, bus.data());
    increment(u, t, btu.data());
    double worst = 0.0;
    for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j)
            worst = std::max(worst, std::abs(ts[i * d_ + j] - us[i * d_ + j] - tu[i * d_ + j] - bus[i] * btu[j]));
    return worst;
}

RoughLift ito_lift(const IncrementRecord& rec, std::size_t particle, double alpha) {
    if (particle >= rec.n) throw std::out_of_range("ito_lift: particle index out of range");
    if (!(rec.dt > 0.0) || std::abs(rec.driver.base_dt * rec.refine - rec.dt) > 1e-12 * rec.dt)
        throw std::invalid_argument("ito_lift: record grid is not uniform");
    std::vector<double> sub(rec.steps * rec.refine * rec.d);
    rec.driver.base_increments(particle, 0, static_cast<int>(rec.steps * rec.refine), sub.data());
    return RoughLift::from_subincrements(rec.d, rec.dt, rec.refine, sub, alpha);
}

// ---------------------------------------------------------------------------

ControlledPath ControlledPath::frozen(const RoughLift& lift, std::vector<double> x0) {
    ControlledPath p;
    p.d = lift.dim();
    if (static_cast<int>(x0.size()) != p.d) throw std::invalid_argument("ControlledPath::frozen: dimension");
    p.driver = &lift;
    p.follows_driver = false;
    p.x.reserve((lift.steps() + 1) * p.d);
    for (std::size_t k = 0; k <= lift.steps(); ++k) p.x.insert(p.x.end(), x0.begin(), x0.end());
    return p;
}

ControlledPath ControlledPath::from_simulation(const SimResult& run, std::size_t particle,
                                               const RoughLift& lift, double drift_bound) {
    const auto& rec = run.record;
    if (run.path.empty()) throw std::invalid_argument("ControlledPath: simulation did not store its path");
    if (lift.steps() != rec.steps) throw std::invalid_argument("ControlledPath: lift and path grids differ");
    ControlledPath p;
    p.d = rec.d;
    p.driver = &lift;
    p.drift_bound = drift_bound;
    p.x.resize((rec.steps + 1) * rec.d);
    for (std::size_t k = 0; k <= rec.steps; ++k)
        for (int a = 0; a < rec.d; ++a) p.x[k * rec.d + a] = run.path_at(k)[particle * rec.d + a];
    return p;
}

double ControlledPath::control_defect() const {
    const std::size_t K = x.size() / d - 1;
    std::vector<double> b(d);
    double worst = -INFINITY;
    for (std::size_t s = 0; s <= K; ++s)
        for (std::size_t t = s + 1; t <= K; ++t) {
            driver->increment(s, t, b.data());
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) {
                const double v = (x[t * d + a] - x[s * d + a]) - (follows_driver ? b[a] : 0.0);
                r2 += v * v;
            }
            worst = std::max(worst, std::sqrt(r2) - drift_bound * static_cast<double>(t - s) * driver->dt());
        }
    return worst;
}

// ---------------------------------------------------------------------------

TestFunction HeatFamily::apply(const TestFunction& f, std::size_t t, std::size_t s) const {
    if (t < s) throw std::invalid_argument("HeatFamily: need s <= t");
    return apply_heat(f, rate * static_cast<double>(t - s) * dt);
}

TwoIncrement delta_hat_1(OneIncrement q, HeatFamily S) {
    return [q = std::move(q), S](const TestFunction& f, std::size_t t, std::size_t s) {
        return q(f, t) - q(S.apply(f, t, s), s);
    };
}

ThreeIncrement delta_hat_2(TwoIncrement A, HeatFamily S) {
    return [A = std::move(A), S](const TestFunction& f, std::size_t t, std::size_t u, std::size_t s) {
        return A(f, t, s) - A(f, t, u) - A(S.apply(f, t, u), u, s);
    };
}

TwoIncrement delta_1(OneIncrement q) {
    return [q = std::move(q)](const TestFunction& f, std::size_t t, std::size_t s) { return q(f, t) - q(f, s); };
}

ThreeIncrement delta_2(TwoIncrement A) {
    return [A = std::move(A)](const TestFunction& f, std::size_t t, std::size_t u, std::size_t s) {
        return A(f, t, s) - A(f, t, u) - A(f, u, s);
    };
}

// ---------------------------------------------------------------------------

GermA::GermA(TestFunction f, const ControlledPath& x, const RoughLift& lift)
    : f_(std::move(f)), x_(&x), lift_(&lift) {
    if (f_.dim() != lift.dim() || x.d != lift.dim()) throw std::invalid_argument("GermA: dimension mismatch");
    cache_.reserve(lift.steps() + 1);
    for (std::size_t k = 0; k <= lift.steps(); ++k)
        cache_.push_back(apply_heat(f_, static_cast<double>(k) * lift.dt()));
}

const TestFunction& GermA::heated(std::size_t lag) const { return cache_.at(lag); }

void GermA::grad_hess(std::size_t lag, const double* x, double* g, double* h) const {
    const TestFunction& f = heated(lag);
    f.gradient(x, g);
    if (h) f.hessian(x, h);
}

double GermA::eval(std::size_t t, std::size_t s, std::size_t lag) const {
    if (t < s) throw std::invalid_argument("GermA: need s <= t");
    if (t == s) return 0.0;
    const int d = f_.dim();
    std::vector<double> g(d), h(d * d), b(d), bb(d * d);
    const bool second = x_->follows_driver;
    grad_hess(lag, x_->at(s), g.data(), second ? h.data() : nullptr);
    lift_->increment(s, t, b.data());
    double v = 0.0;
    for (int i = 0; i < d; ++i) v += g[i] * b[i];
    if (second) {
        lift_->iterated(s, t, bb.data());
        for (int k = 0; k < d * d; ++k) v += h[k] * bb[k];
    }
    return v;
}

double GermA::delta_hat(std::size_t t, std::size_t u, std::size_t s) const {
    return eval(t, s, t - s) - eval(t, u, t - u) - eval(u, s, t - s);
}

GermA::Split GermA::split(std::size_t t, std::size_t u, std::size_t s) const {
    const int d = f_.dim();
    const std::size_t dd = static_cast<std::size_t>(d) * d;
    std::vector<double> g_ts_u(d), g_tu_u(d), g_ts_s(d), h_ts_u(dd), h_tu_u(dd), h_ts_s(dd);
    std::vector<double> b_tu(d), b_us(d), bb_tu(dd);
    const double* xu = x_->at(u);
    const double* xs = x_->at(s);
    grad_hess(t - s, xu, g_ts_u.data(), h_ts_u.data());
    grad_hess(t - u, xu, g_tu_u.data(), h_tu_u.data());
    grad_hess(t - s, xs, g_ts_s.data(), h_ts_s.data());
    lift_->increment(u, t, b_tu.data());
    lift_->increment(s, u, b_us.data());
    lift_->iterated(u, t, bb_tu.data());
    Split r;
    const bool second = x_->follows_driver;
    for (int i = 0; i < d; ++i) r.a[0] += (g_ts_u[i] - g_tu_u[i]) * b_tu[i];
    if (second) {
        for (std::size_t k = 0; k < dd; ++k) {
            r.a[1] += (h_ts_u[k] - h_tu_u[k]) * bb_tu[k];
            r.a[2] += (h_ts_s[k] - h_ts_u[k]) * bb_tu[k];
        }
    }
    for (int j = 0; j < d; ++j) {
        double v = g_ts_s[j] - g_ts_u[j];
        if (second)
            for (int i = 0; i < d; ++i) v += h_ts_s[j * d + i] * b_us[i];
        r.a[3] += v * b_tu[j];
    }
    return r;
}

TwoIncrement GermA::as_two_increment() const {
    return [this](const TestFunction& g, std::size_t t, std::size_t s) {
        if (t == s) return 0.0;
        const int d = g.dim();
        const TestFunction gs = apply_heat(g, static_cast<double>(t - s) * lift_->dt());
        std::vector<double> grad(d), h(d * d), b(d), bb(d * d);
        gs.gradient(x_->at(s), grad.data());
        lift_->increment(s, t, b.data());
        double v = 0.0;
        for (int i = 0; i < d; ++i) v += grad[i] * b[i];
        if (x_->follows_driver) {
            gs.hessian(x_->at(s), h.data());
            lift_->iterated(s, t, bb.data());
            for (int k = 0; k < d * d; ++k) v += h[k] * bb[k];
        }
        return v;
    };
}

// ---------------------------------------------------------------------------

double partition_sum(const GermA& A, const std::vector<std::size_t>& nodes) {
    if (nodes.size() < 2) return 0.0;
    const std::size_t t = nodes.back();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const std::size_t v = nodes[i], u = nodes[i + 1];
        acc += A.eval(u, v, t - v);
    }
    return acc;
}

SewingResult sewing_integral(const GermA& A, std::size_t t_index, int levels) {
    if (levels < 1) throw std::invalid_argument("sewing_integral: need at least one level");
    if (t_index > A.lift().steps()) throw std::invalid_argument("sewing_integral: t beyond the grid");
    const std::size_t coarse = std::size_t{1} << (levels - 1);
    if (t_index % coarse != 0)
        throw std::invalid_argument("sewing_integral: t index not divisible by 2^(levels-1)");
    SewingResult r;
    for (int l = 0; l < levels; ++l) {
        const std::size_t pieces = (t_index / coarse) << l;
        const std::size_t stride = t_index / pieces;
        std::vector<std::size_t> nodes;
        for (std::size_t k = 0; k <= pieces; ++k) nodes.push_back(k * stride);
        r.intervals.push_back(pieces);
        r.sums.push_back(partition_sum(A, nodes));
    }
    for (std::size_t l = 0; l + 1 < r.sums.size(); ++l) r.diffs.push_back(r.sums[l + 1] - r.sums[l]);
    r.value = r.sums.back();
    return r;
}

double ito_riemann_sum(const GermA& A, std::size_t t_index, std::size_t stride) {
    if (stride == 0 || t_index % stride != 0) throw std::invalid_argument("ito_riemann_sum: bad stride");
    const int d = A.f().dim();
    std::vector<double> g(d), b(d);
    double acc = 0.0;
    for (std::size_t v = 0; v < t_index; v += stride) {
        apply_heat(A.f(), static_cast<double>(t_index - v) * A.lift().dt()).gradient(A.path().at(v), g.data());
        A.lift().increment(v, v + stride, b.data());
        for (int i = 0; i < d; ++i) acc += g[i] * b[i];
    }
    return acc;
}

CauchyDecay pooled_cauchy_decay(const std::vector<SewingResult>& runs, double threshold) {
    CauchyDecay c;
    if (runs.empty()) return c;
    const std::size_t L = runs.front().diffs.size();
    c.rms_diff.assign(L, 0.0);
    for (const auto& r : runs) {
        if (r.diffs.size() != L) throw std::invalid_argument("pooled_cauchy_decay: level counts differ");
        for (std::size_t l = 0; l < L; ++l) c.rms_diff[l] += r.diffs[l] * r.diffs[l];
    }
    for (auto& v : c.rms_diff) v = std::sqrt(v / static_cast<double>(runs.size()));
    c.min_ratio = INFINITY;
    double sum = 0.0;
    for (std::size_t l = 0; l + 1 < L; ++l) {
        const double r = c.rms_diff[l] / c.rms_diff[l + 1];
        c.ratios.push_back(r);
        sum += r;
        if (r < c.min_ratio) {
            c.min_ratio = r;
            c.worst_level = l;
        }
    }
    c.mean_ratio = c.ratios.empty() ? 0.0 : sum / static_cast<double>(c.ratios.size());
    c.pass = !c.ratios.empty() && c.mean_ratio >= threshold;
    return c;
}

HolderReport germ_holder_norms(const GermA& A, std::size_t max_triples, std::uint64_t seed) {
    HolderReport r;
    const std::size_t K = A.lift().steps();
    const double dt = A.lift().dt();
    const double alpha = A.lift().alpha();
    const CounterRng rng(seed);

    const std::size_t all_pairs = K * (K + 1) / 2;
    auto visit_pair = [&](std::size_t s, std::size_t t) {
        const double v = std::abs(A(t, s)) / std::pow(static_cast<double>(t - s) * dt, alpha);
        r.germ_norm = std::max(r.germ_norm, v);
        ++r.pairs;
    };
    if (all_pairs <= max_triples) {
        for (std::size_t s = 0; s < K; ++s)
            for (std::size_t t = s + 1; t <= K; ++t) visit_pair(s, t);
    } else {
        for (std::size_t q = 0; q < max_triples; ++q) {
            auto a = static_cast<std::size_t>(rng.uniform(static_cast<std::uint32_t>(q), 0, 0, StreamTag::Misc) * (K + 1));
            auto b = static_cast<std::size_t>(rng.uniform(static_cast<std::uint32_t>(q), 0, 1, StreamTag::Misc) * (K + 1));
            a = std::min(a, K);
            b = std::min(b, K);
            if (a == b) continue;
            visit_pair(std::min(a, b), std::max(a, b));
        }
    }

    // Exponents on (t - u, u - s) for the four parts.
    const double gam[4] = {alpha, 2 * alpha, 2 * alpha, alpha};
    const double rho[4] = {2 * alpha, alpha, alpha, 2 * alpha};
    auto visit_triple = [&](std::size_t s, std::size_t u, std::size_t t) {
        const double dh = A.delta_hat(t, u, s);
        const double len = static_cast<double>(t - s) * dt;
        r.delta_norm = std::max(r.delta_norm, std::abs(dh) / std::pow(len, 3 * alpha));
        const auto sp = A.split(t, u, s);
        r.split_residual = std::max(r.split_residual, std::abs(sp.sum() - dh));
        const double tu = static_cast<double>(t - u) * dt, us = static_cast<double>(u - s) * dt;
        for (int k = 0; k < 4; ++k)
            r.part_norms[k] = std::max(r.part_norms[k], std::abs(sp.a[k]) / (std::pow(tu, gam[k]) * std::pow(us, rho[k])));
        ++r.triples;
    };
    const double all_triples = static_cast<double>(K + 1) * K * (K - 1) / 6.0;
    if (K >= 2 && all_triples <= static_cast<double>(max_triples)) {
        for (std::size_t s = 0; s <= K; ++s)
            for (std::size_t u = s + 1; u <= K; ++u)
                for (std::size_t t = u + 1; t <= K; ++t) visit_triple(s, u, t);
    } else if (K >= 2) {
        for (std::size_t q = 0; q < max_triples; ++q) {
            std::size_t v[3];
            for (int k = 0; k < 3; ++k)
                v[k] = std::min<std::size_t>(
                    K, static_cast<std::size_t>(rng.uniform(static_cast<std::uint32_t>(q), 1, k, StreamTag::Misc) * (K + 1)));
            std::sort(v, v + 3);
            if (v[0] == v[1] || v[1] == v[2]) continue;
            visit_triple(v[0], v[1], v[2]);
        }
    }
    return r;
}

}  // namespace mvlab
