#include "mvlab/mv_solver.hpp"

#include "mvlab/parallel.hpp"
#include "mvlab/semigroup.hpp"
#include "mvlab/simd.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace mvlab {

namespace {

// Planner calls are not thread-safe in FFTW.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// fftw_malloc keeps alignment (and hence the chosen codelets) identical
// between runs, which the byte-identical output contract relies on.
template <class T>
struct FftwBuffer {
    T* p = nullptr;
    std::size_t n = 0;
    explicit FftwBuffer(std::size_t count) : p(static_cast<T*>(fftw_malloc(sizeof(T) * count))), n(count) {
        if (!p) throw std::bad_alloc();
        std::memset(static_cast<void*>(p), 0, sizeof(T) * count);
    }
    ~FftwBuffer() { fftw_free(p); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    T& operator[](std::size_t i) { return p[i]; }
};

struct Plan {
    fftw_plan p = nullptr;
    explicit Plan(fftw_plan q) : p(q) {
        if (!p) throw std::runtime_error("fftw: planning failed");
    }
    ~Plan() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(p);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    void run() const { fftw_execute(p); }
};

std::size_t ipow(std::size_t b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

// Linear correlation u_i = sum_c g((c - i) h) m_c h, i, c in [0, N), by a
// zero-padded FFT of length 2N.
std::vector<double> correlate(const std::vector<double>& m, const std::function<double(double)>& g, double h) {
    const std::size_t N = m.size(), M = 2 * N, H = M / 2 + 1;
    FftwBuffer<double> a(M), b(M);
    FftwBuffer<fftw_complex> fa(H), fb(H);
    std::unique_ptr<Plan> pa, pb, pinv;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        pa = std::make_unique<Plan>(fftw_plan_dft_r2c_1d(static_cast<int>(M), a.p, fa.p, FFTW_ESTIMATE));
        pb = std::make_unique<Plan>(fftw_plan_dft_r2c_1d(static_cast<int>(M), b.p, fb.p, FFTW_ESTIMATE));
        pinv = std::make_unique<Plan>(fftw_plan_dft_c2r_1d(static_cast<int>(M), fa.p, a.p, FFTW_ESTIMATE));
    }
    for (std::size_t c = 0; c < N; ++c) a[c] = m[c] * h;
    // u = m * k with k[j] = g(-j h), j in (-N, N), stored circularly.
    for (std::size_t j = 0; j < N; ++j) b[j] = g(-static_cast<double>(j) * h);
    for (std::size_t j = 1; j < N; ++j) b[M - j] = g(static_cast<double>(j) * h);
    pa->run();
    pb->run();
    for (std::size_t k = 0; k < H; ++k) {
        const std::complex<double> x(fa[k][0], fa[k][1]), y(fb[k][0], fb[k][1]);
        const auto z = x * y / static_cast<double>(M);
        fa[k][0] = z.real();
        fa[k][1] = z.imag();
    }
    pinv->run();
    return std::vector<double>(a.p, a.p + N);
}

// Cubic Lagrange weights on nodes -1, 0, 1, 2 at offset f in [0, 1).
inline void lagrange4(double f, double w[4]) {
    w[0] = -f * (f - 1.0) * (f - 2.0) / 6.0;
    w[1] = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
    w[2] = -(f + 1.0) * f * (f - 2.0) / 2.0;
    w[3] = (f + 1.0) * f * (f - 1.0) / 6.0;
}

// Velocity at x from cell-centred values, clamped stencil.
double interp_velocity(const std::vector<double>& v, double x, double L, double h) {
    const auto N = static_cast<std::ptrdiff_t>(v.size());
    double s = (x + L) / h - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(N - 1));
    auto j = static_cast<std::ptrdiff_t>(std::floor(s));
    const double f = s - static_cast<double>(j);
    double w[4];
    lagrange4(f, w);
    double out = 0.0;
    for (int q = 0; q < 4; ++q) out += w[q] * v[std::clamp<std::ptrdiff_t>(j - 1 + q, 0, N - 1)];
    return out;
}

// One periodic line: rho (N cell averages) moved along v for time tau.
void transport_line(std::vector<double>& rho, const std::vector<double>& v, double L, double h, double tau,
                    StepLog* log, double& clipped) {
    const std::size_t N = rho.size();
    std::vector<double> M(N + 1, 0.0);
    for (std::size_t i = 0; i < N; ++i) M[i + 1] = M[i] + rho[i] * h;
    const double total = M[N];
    auto mass_at = [&](double X) {
        const double s = (X + L) / h;
        const double fl = std::floor(s);
        const double f = s - fl;
        double w[4];
        lagrange4(f, w);
        const auto j = static_cast<std::ptrdiff_t>(fl);
        const auto n = static_cast<std::ptrdiff_t>(N);
        double out = 0.0;
        for (int q = 0; q < 4; ++q) {
            const std::ptrdiff_t k = j - 1 + q;
            std::ptrdiff_t wraps = k >= 0 ? k / n : -((-k + n - 1) / n);
            const std::ptrdiff_t r = k - wraps * n;
            out += w[q] * (M[static_cast<std::size_t>(r)] + static_cast<double>(wraps) * total);
        }
        return out;
    };
    std::vector<double> Mn(N + 1);
    for (std::size_t i = 0; i < N; ++i) {
        const double x = -L + static_cast<double>(i) * h;
        const double v1 = interp_velocity(v, x, L, h);
        const double v2 = interp_velocity(v, x - 0.5 * tau * v1, L, h);
        Mn[i] = mass_at(x - tau * v2);
    }
    Mn[N] = Mn[0] + total;
    for (std::size_t i = 0; i < N; ++i) {
        double r = (Mn[i + 1] - Mn[i]) / h;
        if (r < 0.0) {
            clipped += -r * h;
            if (r < -1e-10 && log) ++log->clip_events;
            r = 0.0;
        }
        rho[i] = r;
    }
}

}  // namespace

void MVSolverConfig::validate(const InteractionKernel& gamma) const {
    if (d < 1 || gamma.d != d) throw std::invalid_argument("MVSolverConfig: dimension mismatch");
    if (N < 8 || !(L > 0.0)) throw std::invalid_argument("MVSolverConfig: bad grid");
    if (!(dt > 0.0) || !(T >= 0.0)) throw std::invalid_argument("MVSolverConfig: need dt > 0 and T >= 0");
    if (dt * gamma.sup_bound > 4.0 * spacing())
        throw std::invalid_argument("MVSolverConfig: dt * sup|Gamma| exceeds 4 grid spacings");
    const double k = T / dt;
    if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k))
        throw std::invalid_argument("MVSolverConfig: T must be a multiple of dt");
}

std::size_t MVSolverConfig::steps() const { return static_cast<std::size_t>(std::llround(T / dt)); }

double VelocityField::sup_abs() const {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

void StepLog::merge(const StepLog& o) {
    clipped_mass += o.clipped_mass;
    max_step_clip = std::max(max_step_clip, o.max_step_clip);
    renorm_drift += o.renorm_drift;
    max_step_drift = std::max(max_step_drift, o.max_step_drift);
    clip_events += o.clip_events;
    steps += o.steps;
}

VelocityField conv_gamma(const GridMeasure& nu, const InteractionKernel& gamma) {
    if (gamma.d != nu.d) throw std::invalid_argument("conv_gamma: dimension mismatch");
    const int d = nu.d;
    VelocityField out{d, nu.L, nu.N, std::vector<double>(nu.cells() * d, 0.0)};
    if (gamma.kind == KernelKind::Zero) return out;
    const double h = nu.spacing();
    if (gamma.axis_profile) {
        const std::size_t N = nu.N;
        const double side = std::pow(h, d - 1);
        for (int a = 0; a < d; ++a) {
            // Marginal on axis a.
            std::vector<double> marg(N, 0.0);
            const std::size_t stride = ipow(N, d - 1 - a);
            for (std::size_t k = 0; k < nu.cells(); ++k) marg[(k / stride) % N] += nu.density[k] * side;
            const auto u = correlate(marg, gamma.axis_profile, h);
            for (std::size_t k = 0; k < nu.cells(); ++k) out.v[k * d + a] = u[(k / stride) % N];
        }
        return out;
    }
    const double vol = nu.cell_volume();
    std::vector<double> x(d), y(d), g(d);
    for (std::size_t k = 0; k < nu.cells(); ++k) {
        nu.coordinates(k, x.data());
        for (std::size_t c = 0; c < nu.cells(); ++c) {
            if (nu.density[c] == 0.0) continue;
            nu.coordinates(c, y.data());
            gamma.eval(x.data(), y.data(), g.data());
            for (int a = 0; a < d; ++a) out.v[k * d + a] += g[a] * nu.density[c] * vol;
        }
    }
    return out;
}

std::vector<double> conv_gamma_at(const EmpiricalMeasureView& mu, const InteractionKernel& gamma,
                                  std::span<const double> points) {
    const int d = mu.d;
    if (gamma.d != d) throw std::invalid_argument("conv_gamma: dimension mismatch");
    const std::size_t P = points.size() / d, n = mu.count();
    std::vector<double> out(P * d, 0.0);
    if (gamma.kind == KernelKind::Zero || n == 0) return out;
    if (gamma.kind == KernelKind::Tanh && mu.weights.empty()) {
        std::vector<double> tx(P), sx(n), r(P);
        for (int a = 0; a < d; ++a) {
            for (std::size_t i = 0; i < P; ++i) tx[i] = points[i * d + a];
            for (std::size_t j = 0; j < n; ++j) sx[j] = mu.atoms[j * d + a];
            simd::tanh_cross_interaction(tx, sx, 1.0 / static_cast<double>(n), r);
            for (std::size_t i = 0; i < P; ++i) out[i * d + a] = r[i];
        }
        return out;
    }
    std::vector<double> g(d);
    for (std::size_t i = 0; i < P; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            gamma.eval(points.data() + i * d, mu.atoms.data() + j * d, g.data());
            for (int a = 0; a < d; ++a) out[i * d + a] += mu.weight(j) * g[a];
        }
    return out;
}

VelocityField conv_gamma(const EmpiricalMeasureView& mu, const InteractionKernel& gamma, const GridMeasure& layout) {
    if (layout.d != mu.d) throw std::invalid_argument("conv_gamma: dimension mismatch");
    std::vector<double> pts(layout.cells() * layout.d);
    for (std::size_t k = 0; k < layout.cells(); ++k) layout.coordinates(k, &pts[k * layout.d]);
    return VelocityField{layout.d, layout.L, layout.N, conv_gamma_at(mu, gamma, pts)};
}

GridMeasure heat_step(const GridMeasure& nu, double t) {
    if (t < 0.0) throw std::invalid_argument("heat_step: t must be nonnegative");
    if (t == 0.0) return nu;
    const int d = nu.d;
    const std::size_t N = nu.N, cells = nu.cells();
    const std::size_t half = N / 2 + 1, spec = cells / N * half;
    FftwBuffer<double> in(cells);
    FftwBuffer<fftw_complex> out(spec);
    std::vector<int> dims(d, static_cast<int>(N));
    std::unique_ptr<Plan> fwd, inv;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fwd = std::make_unique<Plan>(fftw_plan_dft_r2c(d, dims.data(), in.p, out.p, FFTW_ESTIMATE));
        inv = std::make_unique<Plan>(fftw_plan_dft_c2r(d, dims.data(), out.p, in.p, FFTW_ESTIMATE));
    }
    std::copy(nu.density.begin(), nu.density.end(), in.p);
    fwd->run();
    const double k0 = std::numbers::pi / nu.L;
    std::vector<double> mult(N);
    for (std::size_t j = 0; j < N; ++j) {
        const double jj = j <= N / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(N);
        mult[j] = std::exp(-0.5 * t * (k0 * jj) * (k0 * jj));
    }
    const double norm = 1.0 / static_cast<double>(cells);
    for (std::size_t k = 0; k < spec; ++k) {
        std::size_t r = k;
        double f = mult[r % half];
        r /= half;
        for (int a = 1; a < d; ++a) {
            f *= mult[r % N];
            r /= N;
        }
        out[k][0] *= f * norm;
        out[k][1] *= f * norm;
    }
    inv->run();
    GridMeasure res = nu;
    std::copy(in.p, in.p + cells, res.density.begin());
    return res;
}

GridMeasure transport_step(const GridMeasure& nu, const VelocityField& v, double tau, StepLog* log) {
    if (v.N != nu.N || v.d != nu.d) throw std::invalid_argument("transport_step: field does not match grid");
    if (tau == 0.0) return nu;
    GridMeasure res = nu;
    const int d = nu.d;
    const std::size_t N = nu.N;
    const double h = nu.spacing();
    const double before = nu.mass();
    double clipped = 0.0;
    std::vector<double> line(N), vel(N);
    for (int a = 0; a < d; ++a) {
        const std::size_t stride = ipow(N, d - 1 - a);
        const std::size_t lines = res.cells() / N;
        for (std::size_t l = 0; l < lines; ++l) {
            const std::size_t base = (l / stride) * stride * N + l % stride;
            for (std::size_t i = 0; i < N; ++i) {
                line[i] = res.density[base + i * stride];
                vel[i] = v.v[(base + i * stride) * d + a];
            }
            const double line_side = std::pow(h, d - 1);
            double c = 0.0;
            transport_line(line, vel, nu.L, h, tau, log, c);
            clipped += c * line_side;
            for (std::size_t i = 0; i < N; ++i) res.density[base + i * stride] = line[i];
        }
    }
    const double after = res.mass();
    if (after > 0.0 && after != before) {
        const double scale = before / after;
        for (auto& x : res.density) x *= scale;
    }
    if (log) {
        log->clipped_mass += clipped;
        log->max_step_clip = std::max(log->max_step_clip, clipped);
        log->renorm_drift += std::abs(after - before);
        log->max_step_drift = std::max(log->max_step_drift, std::abs(after - before));
    }
    return res;
}

namespace {

GridMeasure step_with(const GridMeasure& nu, const VelocityField& v_now, const InteractionKernel& gamma, double dt,
                      Splitting splitting, StepLog& log) {
    if (dt == 0.0) return nu;
    StepLog local;
    GridMeasure out;
    if (splitting == Splitting::Lie) {
        out = heat_step(transport_step(nu, v_now, dt, &local), dt);
    } else {
        GridMeasure a = transport_step(nu, v_now, 0.5 * dt, &local);
        a = heat_step(a, dt);
        out = transport_step(a, conv_gamma(a, gamma), 0.5 * dt, &local);
    }
    local.steps = 1;
    if (local.clipped_mass > 1e-6)
        throw std::runtime_error("mv_step: clipping added more than 1e-6 mass in one step");
    local.max_step_clip = local.clipped_mass;
    local.max_step_drift = local.renorm_drift;
    log.merge(local);
    return out;
}

}  // namespace

GridMeasure mv_step(const GridMeasure& nu, const InteractionKernel& gamma, double dt, Splitting splitting,
                    StepLog* log) {
    StepLog local;
    GridMeasure out = step_with(nu, conv_gamma(nu, gamma), gamma, dt, splitting, local);
    if (log) log->merge(local);
    return out;
}

std::size_t MVSolution::index_of(double t) const {
    const auto k = static_cast<std::size_t>(std::llround(t / cfg.dt));
    return std::min(k, times.size() - 1);
}

MVSolution solve_mv(const GridMeasure& nu0, const InteractionKernel& gamma, const MVSolverConfig& cfg) {
    cfg.validate(gamma);
    if (nu0.d != cfg.d || nu0.N != cfg.N || nu0.L != cfg.L)
        throw std::invalid_argument("solve_mv: initial measure does not match the solver grid");
    MVSolution sol;
    sol.cfg = cfg;
    const std::size_t K = cfg.steps();
    sol.times.reserve(K + 1);
    sol.states.reserve(K + 1);
    sol.velocities.reserve(K + 1);
    sol.times.push_back(0.0);
    sol.states.push_back(nu0);
    sol.velocities.push_back(conv_gamma(nu0, gamma));
    for (std::size_t k = 0; k < K; ++k) {
        sol.states.push_back(step_with(sol.states[k], sol.velocities[k], gamma, cfg.dt, cfg.splitting, sol.log));
        sol.velocities.push_back(conv_gamma(sol.states.back(), gamma));
        sol.times.push_back(static_cast<double>(k + 1) * cfg.dt);
    }
    return sol;
}

// ---------------------------------------------------------------------------

namespace {

double pair_drift_state(const GridMeasure& nu, const VelocityField& v, const TestFunction& g) {
    const int d = nu.d;
    std::vector<double> terms(nu.cells());
    if (d == 1) {
        std::vector<double> x(nu.N), grad(nu.N), amp, ctr, var;
        for (std::size_t c = 0; c < nu.N; ++c) x[c] = nu.center(c);
        g.mixture_arrays(amp, ctr, var);
        simd::gaussian_mixture_derivatives(x, amp, ctr, var, grad, {});
        for (std::size_t c = 0; c < nu.N; ++c) terms[c] = nu.density[c] * grad[c] * v.v[c];
    } else {
        std::vector<double> x(d), grad(d);
        for (std::size_t k = 0; k < nu.cells(); ++k) {
            if (nu.density[k] == 0.0) continue;
            nu.coordinates(k, x.data());
            g.gradient(x.data(), grad.data());
            double dot = 0.0;
            for (int a = 0; a < d; ++a) dot += grad[a] * v.v[k * d + a];
            terms[k] = nu.density[k] * dot;
        }
    }
    return pairwise_sum(terms) * nu.cell_volume();
}

std::pair<std::size_t, double> bracket(const MVSolution& sol, double s) {
    const double dt = sol.cfg.dt;
    const std::size_t last = sol.times.size() - 1;
    if (s < 0.0 || s > sol.times.back() * (1.0 + 1e-12)) throw std::invalid_argument("path: time outside horizon");
    auto k = static_cast<std::size_t>(std::floor(s / dt));
    if (k >= last) return {last, 0.0};
    return {k, s / dt - static_cast<double>(k)};
}

}  // namespace

double GridSolutionPath::pair(double s, const TestFunction& g) const {
    const auto [k, th] = bracket(*sol_, s);
    const double a = pair_grid(sol_->states[k], g);
    if (th == 0.0) return a;
    return (1.0 - th) * a + th * pair_grid(sol_->states[k + 1], g);
}

double GridSolutionPath::pair_drift(double s, const TestFunction& g) const {
    const auto [k, th] = bracket(*sol_, s);
    const double a = pair_drift_state(sol_->states[k], sol_->velocities[k], g);
    if (th == 0.0) return a;
    return (1.0 - th) * a + th * pair_drift_state(sol_->states[k + 1], sol_->velocities[k + 1], g);
}

double GaussianHeatPath::pair(double s, const TestFunction& g) const {
    const double v = var0_ + s;
    double acc = 0.0;
    for (const auto& b : g.bumps()) {
        const double w2 = b.width * b.width;
        double q = 0.0;
        for (int a = 0; a < d_; ++a) q += (mean_ - b.center[a]) * (mean_ - b.center[a]);
        acc += b.amplitude * std::pow(w2 / (w2 + v), 0.5 * d_) * std::exp(-0.5 * q / (w2 + v));
    }
    return acc;
}

MildResidual weak_mild_residual(const MeasurePath& path, const TestFunction& h, double t, std::size_t panels) {
    if (h.dim() != path.dim()) throw std::invalid_argument("weak_mild_residual: dimension mismatch");
    if (t < 0.0 || t > path.horizon() * (1.0 + 1e-12)) throw std::invalid_argument("weak_mild_residual: t outside path");
    if (panels == 0) throw std::invalid_argument("weak_mild_residual: need at least one panel");
    MildResidual r;
    r.lhs = path.pair(t, h);
    if (t == 0.0) {
        r.initial_term = r.lhs;
        return r;
    }
    r.initial_term = path.pair(0.0, apply_heat(h, t));
    // s = t - u^2 removes the (t - s)^{-1/2} singularity of the integrand.
    const double U = std::sqrt(t);
    const double w = U / static_cast<double>(panels);
    std::vector<double> parts(panels);
    for (std::size_t p = 0; p < panels; ++p) {
        const double a = static_cast<double>(p) * w;
        parts[p] = boost::math::quadrature::gauss<double, 20>::integrate(
            [&](double u) { return 2.0 * u * path.pair_drift(std::max(0.0, t - u * u), apply_heat(h, u * u)); }, a,
            a + w);
    }
    r.drift_term = pairwise_sum(parts);
    r.residual = std::abs(r.lhs - r.initial_term - r.drift_term);
    return r;
}

// ---------------------------------------------------------------------------

void OracleConfig::validate() const {
    if (N < 10000) throw std::invalid_argument("oracle: need N >= 10^4 copies");
    if (K < 3) throw std::invalid_argument("oracle: need K >= 3 Picard iterations");
    if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("oracle: need dt, T > 0");
    if (save_every == 0) throw std::invalid_argument("oracle: save_every must be positive");
    if (!(m > 0.0)) throw std::invalid_argument("oracle: m must be positive");
}

OracleResult nonlinear_process_oracle(const InteractionKernel& gamma, const OracleConfig& cfg) {
    cfg.validate();
    const int d = gamma.d;
    const std::size_t N = cfg.N;
    const auto steps = static_cast<std::size_t>(std::llround(cfg.T / cfg.dt));
    const std::size_t row = N * d;
    OracleResult res;
    for (std::size_t s = cfg.save_every; s <= steps; s += cfg.save_every) res.save_steps.push_back(s);
    if (res.save_steps.empty() || res.save_steps.back() != steps) res.save_steps.push_back(steps);
    for (auto s : res.save_steps) res.save_times.push_back(static_cast<double>(s) * cfg.dt);

    const std::vector<double> x0 = sample_initial(cfg.initial, N, d, cfg.seed);
    // Common random numbers: every iterate sees the same start and noise.
    BrownianDriver driver{cfg.seed, d, cfg.dt, {}};
    std::vector<double> dB(steps * row);
    parallel_for(N, cfg.threads, [&](std::size_t i) {
        for (std::size_t k = 0; k < steps; ++k) driver.step_increment(i, k, 1, &dB[k * row + i * d]);
    });

    const FrequencyGrid grid = default_measure_grid(d);
    auto spectra_of = [&](const std::vector<double>& path) {
        std::vector<SpectralField> out;
        for (auto s : res.save_steps)
            out.push_back(spectrum(EmpiricalMeasureView{d, std::span<const double>(path.data() + s * row, row), {}}, grid));
        return out;
    };

    std::vector<double> prev((steps + 1) * row), cur((steps + 1) * row);
    for (std::size_t k = 0; k <= steps; ++k) std::copy(x0.begin(), x0.end(), prev.begin() + k * row);
    auto prev_spec = spectra_of(prev);
    const std::size_t block = 256, blocks = (N + block - 1) / block;
    for (std::size_t it = 1; it <= cfg.K; ++it) {
        std::copy(x0.begin(), x0.end(), cur.begin());
        for (std::size_t k = 0; k < steps; ++k) {
            const EmpiricalMeasureView flow{d, std::span<const double>(prev.data() + k * row, row), {}};
            const double* xk = cur.data() + k * row;
            double* xn = cur.data() + (k + 1) * row;
            parallel_for(blocks, cfg.threads, [&](std::size_t b) {
                const std::size_t lo = b * block, hi = std::min(N, lo + block);
                const auto v = conv_gamma_at(flow, gamma, std::span<const double>(xk + lo * d, (hi - lo) * d));
                for (std::size_t q = 0; q < (hi - lo) * d; ++q)
                    xn[lo * d + q] = xk[lo * d + q] + v[q] * cfg.dt + dB[k * row + lo * d + q];
            });
        }
        auto cur_spec = spectra_of(cur);
        double inc = 0.0;
        for (std::size_t j = 0; j < cur_spec.size(); ++j)
            inc = std::max(inc, weighted_norm(cur_spec[j] - prev_spec[j], -cfg.m, AtomicTail::Off).value);
        res.increments.push_back(inc);
        std::swap(prev, cur);
        prev_spec = std::move(cur_spec);
    }
    for (auto s : res.save_steps) res.snapshots.emplace_back(prev.begin() + s * row, prev.begin() + (s + 1) * row);
    res.noise_floor = point_mass_norm(cfg.m, d) / std::sqrt(static_cast<double>(N));
    res.converged = res.increments.back() < 2.0 * res.noise_floor;
    res.contracting = true;
    for (std::size_t k = 1; k < res.increments.size(); ++k) {
        const double a = res.increments[k - 1], b = res.increments[k];
        if (!(b < a || b == 0.0)) res.contracting = false;
    }
    return res;
}

double oracle_grid_distance(const OracleResult& oracle, const MVSolution& sol, double m, const FrequencyGrid& grid) {
    double worst = 0.0;
    for (std::size_t j = 0; j < oracle.save_times.size(); ++j) {
        const std::size_t k = sol.index_of(oracle.save_times[j]);
        if (std::abs(sol.times[k] - oracle.save_times[j]) > 1e-9)
            throw std::invalid_argument("oracle_grid_distance: oracle time not on the solver grid");
        const EmpiricalMeasureView mu{sol.cfg.d, oracle.snapshots[j], {}};
        worst = std::max(worst, hminus_distance(mu, sol.states[k], m, grid).value);
    }
    return worst;
}

namespace {

std::vector<double> gap_series(const MVSolution& a, const MVSolution& b, double m, const FrequencyGrid& grid,
                               std::size_t upto) {
    if (a.states.size() != b.states.size()) throw std::invalid_argument("gap: solutions differ in length");
    upto = std::min(upto, a.states.size() - 1);
    std::vector<double> out(upto + 1);
    for (std::size_t k = 0; k <= upto; ++k) {
        GridMeasure diff = a.states[k];
        for (std::size_t c = 0; c < diff.cells(); ++c) diff.density[c] -= b.states[k].density[c];
        out[k] = hs_norm(diff, -m, grid).value;
    }
    return out;
}

}  // namespace

double sup_hminus_gap(const MVSolution& a, const MVSolution& b, double m, const FrequencyGrid& grid,
                      std::size_t upto) {
    const auto g = gap_series(a, b, m, grid, upto);
    return *std::max_element(g.begin(), g.end());
}

double gronwall_growth_factor(const GridMeasure& nu0, const GridMeasure& nu0p, const InteractionKernel& gamma,
                              const MVSolverConfig& cfg, double m, const FrequencyGrid& grid) {
    if (nu0.density == nu0p.density) return 0.0;
    const MVSolution a = solve_mv(nu0, gamma, cfg), b = solve_mv(nu0p, gamma, cfg);
    const auto g = gap_series(a, b, m, grid, a.states.size() - 1);
    if (!(g[0] > 0.0)) return 0.0;
    return *std::max_element(g.begin(), g.end()) / g[0];
}

StabilityResult gronwall_stability_check(const GridMeasure& nu0, const GridMeasure& q, const InteractionKernel& gamma,
                                         const MVSolverConfig& cfg, double m, const std::vector<double>& eps_ladder,
                                         const FrequencyGrid& grid) {
    if (q.d != nu0.d || q.N != nu0.N || q.L != nu0.L) throw std::invalid_argument("stability: grids differ");
    if (eps_ladder.size() < 2) throw std::invalid_argument("stability: need at least two perturbation sizes");
    StabilityResult res;
    const MVSolution base = solve_mv(nu0, gamma, cfg);
    const std::size_t last = base.states.size() - 1, mid = last / 2;
    std::vector<double> xs, ys;
    res.doubling_ok = true;
    for (double eps : eps_ladder) {
        if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("stability: eps must lie in (0, 1]");
        GridMeasure p = nu0;
        for (std::size_t c = 0; c < p.cells(); ++c) p.density[c] = (1.0 - eps) * nu0.density[c] + eps * q.density[c];
        p.tail_mass = (1.0 - eps) * nu0.tail_mass + eps * q.tail_mass;
        const MVSolution other = solve_mv(p, gamma, cfg);
        const auto g = gap_series(base, other, m, grid, last);
        StabilityRow row;
        row.eps = eps;
        row.initial_distance = g[0];
        row.sup_distance = *std::max_element(g.begin(), g.end());
        row.factor = row.sup_distance / row.initial_distance;
        row.factor_half = *std::max_element(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(mid) + 1) / row.initial_distance;
        if (!(row.factor <= 4.0 * row.factor_half * row.factor_half)) res.doubling_ok = false;
        res.rows.push_back(row);
        xs.push_back(eps);
        ys.push_back(row.sup_distance);
    }
    res.response = fit_loglog(xs, ys);
    res.linear_ok = std::abs(res.response.slope - 1.0) <= 0.15;
    res.pass = res.linear_ok && res.doubling_ok;
    return res;
}

}  // namespace mvlab
