#include "mvlab/particles.hpp"

#include "mvlab/simd.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace mvlab {

std::vector<double> InteractionKernel::operator()(const std::vector<double>& x,
                                                  const std::vector<double>& y) const {
    std::vector<double> out(d, 0.0);
    eval(x.data(), y.data(), out.data());
    return out;
}

InteractionKernel zero_kernel(int d) {
    InteractionKernel k;
    k.d = d;
    k.eval = [d](const double*, const double*, double* out) { std::fill(out, out + d, 0.0); };
    k.description = "zero";
    k.kind = KernelKind::Zero;
    k.axis_profile = [](double) { return 0.0; };
    k.hm_regular = true;
    return k;
}

InteractionKernel tanh_kernel(int d) {
    InteractionKernel k;
    k.d = d;
    k.eval = [d](const double* x, const double* y, double* out) {
        for (int a = 0; a < d; ++a) out[a] = std::tanh(y[a] - x[a]);
    };
    k.lip_bound = 1.0;
    k.sup_bound = std::sqrt(static_cast<double>(d));
    k.description = "tanh(y-x)";
    k.kind = KernelKind::Tanh;
    k.axis_profile = [](double u) { return std::tanh(u); };
    return k;
}

InteractionKernel custom_kernel(int d, std::function<void(const double*, const double*, double*)> eval,
                                double lip_bound, double sup_bound, std::string description) {
    InteractionKernel k;
    k.d = d;
    k.eval = std::move(eval);
    k.lip_bound = lip_bound;
    k.sup_bound = sup_bound;
    k.description = std::move(description);
    return k;
}

// ---------------------------------------------------------------------------

std::uint32_t BrownianDriver::stream_of(std::size_t i) const {
    if (stream_map.empty()) return static_cast<std::uint32_t>(i);
    return stream_map.at(i);
}

// Normal number q = base_step * d + axis of a stream lives in half q & 1 of
// the Philox block with step word q >> 1 and sub word q >> 33.
double BrownianDriver::base_increment(std::size_t i, std::uint64_t base_step, int axis) const {
    const CounterRng rng(seed);
    const std::uint64_t q = base_step * static_cast<std::uint64_t>(d) + static_cast<std::uint64_t>(axis);
    const auto z = rng.normal2(stream_of(i), static_cast<std::uint32_t>(q >> 1),
                               static_cast<std::uint32_t>(q >> 33), StreamTag::Brownian);
    return std::sqrt(base_dt) * ((q & 1) ? z.second : z.first);
}

void BrownianDriver::base_increments(std::size_t i, std::uint64_t first, int count, double* out) const {
    const CounterRng rng(seed);
    const std::uint32_t stream = stream_of(i);
    const double s = std::sqrt(base_dt);
    const std::uint64_t q0 = first * static_cast<std::uint64_t>(d);
    const std::uint64_t q1 = q0 + static_cast<std::uint64_t>(count) * static_cast<std::uint64_t>(d);
    std::uint64_t q = q0;
    while (q < q1) {
        const auto z = rng.normal2(stream, static_cast<std::uint32_t>(q >> 1),
                                   static_cast<std::uint32_t>(q >> 33), StreamTag::Brownian);
        if ((q & 1) == 0) {
            out[q - q0] = s * z.first;
            if (q + 1 < q1) out[q + 1 - q0] = s * z.second;
            q += 2;
        } else {
            out[q - q0] = s * z.second;
            q += 1;
        }
    }
}

void BrownianDriver::step_increment(std::size_t i, std::uint64_t step, int refine, double* out) const {
    std::vector<double> sub(static_cast<std::size_t>(refine) * d);
    base_increments(i, step * static_cast<std::uint64_t>(refine), refine, sub.data());
    for (int a = 0; a < d; ++a) {
        double acc = 0.0;
        for (int r = 0; r < refine; ++r) acc += sub[static_cast<std::size_t>(r) * d + a];
        out[a] = acc;
    }
}

// ---------------------------------------------------------------------------

InitialLaw InitialLaw::gaussian(double mean, double sd) {
    InitialLaw l;
    l.kind = Kind::IidGaussian;
    l.params = {mean, sd};
    return l;
}

InitialLaw InitialLaw::cauchy(double location, double scale) {
    InitialLaw l;
    l.kind = Kind::IidCauchy;
    l.params = {location, scale};
    return l;
}

InitialLaw InitialLaw::two_cluster(double left, double right, double sd) {
    InitialLaw l;
    l.kind = Kind::IidTwoCluster;
    l.params = {left, right, sd};
    return l;
}

InitialLaw InitialLaw::list(std::vector<double> points) {
    InitialLaw l;
    l.kind = Kind::DeterministicList;
    l.points = std::move(points);
    return l;
}

InitialLaw InitialLaw::custom(std::function<void(std::size_t, const CounterRng&, double*)> f) {
    InitialLaw l;
    l.kind = Kind::CustomSampler;
    l.sampler = std::move(f);
    return l;
}

std::string to_string(InitialLaw::Kind k) {
    switch (k) {
        case InitialLaw::Kind::DeterministicList: return "deterministic-list";
        case InitialLaw::Kind::IidGaussian: return "iid-gaussian";
        case InitialLaw::Kind::IidCauchy: return "iid-cauchy";
        case InitialLaw::Kind::IidTwoCluster: return "iid-two-cluster";
        case InitialLaw::Kind::CustomSampler: return "custom-sampler";
    }
    return "unknown";
}

std::vector<double> two_cluster_quantiles(std::size_t n, double left, double right, double sd) {
    const boost::math::normal_distribution<double> a(left, sd), b(right, sd);
    std::vector<double> x(n);
    const double lo = std::min(left, right) - 40.0 * sd;
    const double hi = std::max(left, right) + 40.0 * sd;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        auto f = [&](double z) { return 0.5 * (cdf(a, z) + cdf(b, z)) - p; };
        std::uintmax_t iters = 200;
        const auto r = boost::math::tools::toms748_solve(
            f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
        x[i] = 0.5 * (r.first + r.second);
    }
    return x;
}

std::vector<double> sample_initial(const InitialLaw& law, std::size_t n, int d, std::uint64_t seed) {
    std::vector<double> x(n * d);
    const CounterRng rng(seed);
    const auto stream = [](std::size_t i) { return static_cast<std::uint32_t>(i); };
    switch (law.kind) {
        case InitialLaw::Kind::DeterministicList:
            if (law.points.size() != n * static_cast<std::size_t>(d))
                throw std::invalid_argument("deterministic-list initial law has " +
                                            std::to_string(law.points.size()) +
                                            " coordinates, expected n*d = " +
                                            std::to_string(n * d));
            return law.points;
        case InitialLaw::Kind::IidGaussian:
            for (std::size_t i = 0; i < n; ++i)
                for (int a = 0; a < d; ++a)
                    x[i * d + a] = law.params.at(0) +
                                   law.params.at(1) * rng.normal(stream(i), 0, a, StreamTag::Initial);
            break;
        case InitialLaw::Kind::IidCauchy:
            for (std::size_t i = 0; i < n; ++i)
                for (int a = 0; a < d; ++a) {
                    const double u = rng.uniform(stream(i), 0, a, StreamTag::Initial);
                    x[i * d + a] = law.params.at(0) + law.params.at(1) * std::tan(std::numbers::pi * (u - 0.5));
                }
            break;
        case InitialLaw::Kind::IidTwoCluster:
            for (std::size_t i = 0; i < n; ++i) {
                const double u = rng.uniform(stream(i), 1, 0, StreamTag::Initial);
                const double c = u < 0.5 ? law.params.at(0) : law.params.at(1);
                for (int a = 0; a < d; ++a)
                    x[i * d + a] = c + law.params.at(2) * rng.normal(stream(i), 0, a, StreamTag::Initial);
            }
            break;
        case InitialLaw::Kind::CustomSampler:
            if (!law.sampler) throw std::invalid_argument("custom-sampler initial law without a sampler");
            for (std::size_t i = 0; i < n; ++i) law.sampler(i, rng, &x[i * d]);
            break;
    }
    return x;
}

// ---------------------------------------------------------------------------

std::size_t SimConfig::steps() const {
    return static_cast<std::size_t>(std::llround(T / dt));
}

void SimConfig::validate() const {
    if (!(dt > 0.0) || !(dt <= T)) throw std::invalid_argument("SimConfig: need 0 < dt <= T");
    if (n == 0) throw std::invalid_argument("SimConfig: n must be positive");
    if (d < 1) throw std::invalid_argument("SimConfig: d must be positive");
    if (refine < 1) throw std::invalid_argument("SimConfig: refine must be positive");
    const double tol = 1e-12 * std::max(1.0, T);
    if (std::abs(static_cast<double>(steps()) * dt - T) > tol)
        throw std::invalid_argument("SimConfig: dt does not divide T");
    double prev = 0.0;
    for (double s : save_times) {
        if (s < -tol || s > T + tol) throw std::invalid_argument("SimConfig: save time outside [0, T]");
        if (s < prev - tol) throw std::invalid_argument("SimConfig: save times must be sorted");
        const double gap = s - prev;
        if (std::abs(gap - std::round(gap / dt) * dt) > tol)
            throw std::invalid_argument("SimConfig: dt does not divide the gap before save time " +
                                        std::to_string(s));
        prev = s;
    }
    if (initial.kind == InitialLaw::Kind::DeterministicList &&
        initial.points.size() != n * static_cast<std::size_t>(d))
        throw std::invalid_argument("SimConfig: deterministic-list length must equal n*d");
}

std::vector<double> IncrementRecord::sub_increments(std::size_t i, std::size_t k) const {
    std::vector<double> out(static_cast<std::size_t>(refine) * d);
    driver.base_increments(i, static_cast<std::uint64_t>(k) * refine, refine, out.data());
    return out;
}

namespace {

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("increment record: truncated input");
    return v;
}

constexpr char kMagic[8] = {'M', 'V', 'L', 'B', 'I', 'N', 'C', '1'};

}  // namespace

void IncrementRecord::write_binary(std::ostream& os) const {
    os.write(kMagic, sizeof(kMagic));
    put<std::uint64_t>(os, n);
    put<std::int32_t>(os, d);
    put<std::uint64_t>(os, steps);
    put<double>(os, dt);
    put<std::int32_t>(os, refine);
    put<std::uint64_t>(os, driver.seed);
    put<double>(os, driver.base_dt);
    put<std::uint64_t>(os, driver.stream_map.size());
    for (auto s : driver.stream_map) put<std::uint32_t>(os, s);
    put<std::uint64_t>(os, increments.size());
    os.write(reinterpret_cast<const char*>(increments.data()),
             static_cast<std::streamsize>(increments.size() * sizeof(double)));
}

IncrementRecord IncrementRecord::read_binary(std::istream& is) {
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("increment record: bad magic");
    IncrementRecord r;
    r.n = get<std::uint64_t>(is);
    r.d = get<std::int32_t>(is);
    r.steps = get<std::uint64_t>(is);
    r.dt = get<double>(is);
    r.refine = get<std::int32_t>(is);
    r.driver.seed = get<std::uint64_t>(is);
    r.driver.d = r.d;
    r.driver.base_dt = get<double>(is);
    r.driver.stream_map.resize(get<std::uint64_t>(is));
    for (auto& s : r.driver.stream_map) s = get<std::uint32_t>(is);
    r.increments.resize(get<std::uint64_t>(is));
    is.read(reinterpret_cast<char*>(r.increments.data()),
            static_cast<std::streamsize>(r.increments.size() * sizeof(double)));
    if (!is) throw std::runtime_error("increment record: truncated input");
    return r;
}

// ---------------------------------------------------------------------------

ParticleEnsemble make_ensemble(const SimConfig& cfg, const std::vector<std::uint32_t>& stream_map) {
    ParticleEnsemble e;
    e.n = cfg.n;
    e.d = cfg.d;
    e.seed = cfg.seed;
    e.t = 0.0;
    if (stream_map.empty()) {
        e.positions = sample_initial(cfg.initial, cfg.n, cfg.d, cfg.seed);
    } else {
        // Particle i takes the initial draw of its stream, so a permuted map
        // permutes the whole particle, not only its noise.
        if (stream_map.size() != cfg.n) throw std::invalid_argument("stream map size must equal n");
        const std::uint32_t top = *std::max_element(stream_map.begin(), stream_map.end());
        const auto all = sample_initial(cfg.initial, std::max<std::size_t>(cfg.n, top + 1ull), cfg.d, cfg.seed);
        e.positions.resize(cfg.n * cfg.d);
        for (std::size_t i = 0; i < cfg.n; ++i)
            for (int a = 0; a < cfg.d; ++a) e.positions[i * cfg.d + a] = all[stream_map[i] * cfg.d + a];
    }
    const CounterRng rng(cfg.seed);
    e.particle_streams.resize(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i)
        e.particle_streams[i] =
            rng.substream_id(stream_map.empty() ? static_cast<std::uint32_t>(i) : stream_map[i]);
    return e;
}

std::vector<double> mean_field_drift(const ParticleEnsemble& ens, const InteractionKernel& gamma,
                                     std::size_t i) {
    if (i >= ens.n) throw std::out_of_range("mean_field_drift: particle index out of range");
    std::vector<double> acc(ens.d, 0.0), g(ens.d);
    for (std::size_t j = 0; j < ens.n; ++j) {
        gamma.eval(ens.particle(i), ens.particle(j), g.data());
        for (int a = 0; a < ens.d; ++a) acc[a] += g[a];
    }
    for (auto& v : acc) v /= static_cast<double>(ens.n);
    return acc;
}

void mean_field_drifts(const ParticleEnsemble& ens, const InteractionKernel& gamma,
                       std::vector<double>& out) {
    const std::size_t n = ens.n;
    const int d = ens.d;
    out.assign(n * d, 0.0);
    const double inv_n = 1.0 / static_cast<double>(n);
    switch (gamma.kind) {
        case KernelKind::Zero:
            return;
        case KernelKind::Tanh: {
            std::vector<double> col(n), res(n);
            for (int a = 0; a < d; ++a) {
                for (std::size_t i = 0; i < n; ++i) col[i] = ens.positions[i * d + a];
                simd::tanh_self_interaction(col, inv_n, res);
                for (std::size_t i = 0; i < n; ++i) out[i * d + a] = res[i];
            }
            return;
        }
        case KernelKind::Generic: {
            std::vector<double> g(d);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    gamma.eval(ens.particle(i), ens.particle(j), g.data());
                    for (int a = 0; a < d; ++a) out[i * d + a] += g[a];
                }
                for (int a = 0; a < d; ++a) out[i * d + a] *= inv_n;
            }
            return;
        }
    }
}

ParticleEnsemble em_step(const ParticleEnsemble& ens, const InteractionKernel& gamma, double dt,
                         const std::vector<double>& increments, const ExternalDrift& external) {
    if (increments.size() != ens.n * static_cast<std::size_t>(ens.d))
        throw std::invalid_argument("em_step: increments must have n*d entries");
    std::vector<double> drift;
    mean_field_drifts(ens, gamma, drift);
    ParticleEnsemble next = ens;
    std::vector<double> ext(ens.d, 0.0);
    for (std::size_t i = 0; i < ens.n; ++i) {
        if (external) external(ens.t, ens.particle(i), ext.data());
        for (int a = 0; a < ens.d; ++a) {
            const std::size_t k = i * ens.d + a;
            const double v = ens.positions[k] + (drift[k] + ext[a]) * dt + increments[k];
            if (!std::isfinite(v))
                throw std::runtime_error("em_step: particle " + std::to_string(i) +
                                         " has a non-finite position at t=" +
                                         std::to_string(ens.t + dt));
            next.positions[k] = v;
        }
    }
    next.t = ens.t + dt;
    return next;
}

SimResult simulate_paths(const SimConfig& cfg, const InteractionKernel& gamma,
                         const std::vector<std::uint32_t>& stream_map) {
    cfg.validate();
    if (gamma.d != cfg.d) throw std::invalid_argument("simulate_paths: kernel dimension mismatch");
    const std::size_t steps = cfg.steps();
    const std::size_t nd = cfg.n * cfg.d;

    SimResult out;
    out.save_times = cfg.save_times;
    auto& rec = out.record;
    rec.n = cfg.n;
    rec.d = cfg.d;
    rec.steps = steps;
    rec.dt = cfg.dt;
    rec.refine = cfg.refine;
    rec.driver.seed = cfg.seed;
    rec.driver.d = cfg.d;
    rec.driver.base_dt = cfg.dt / cfg.refine;
    rec.driver.stream_map = stream_map;
    rec.increments.resize(steps * nd);

    std::vector<std::size_t> save_idx;
    for (double s : cfg.save_times) save_idx.push_back(static_cast<std::size_t>(std::llround(s / cfg.dt)));

    ParticleEnsemble ens = make_ensemble(cfg, stream_map);
    out.initial = ens.positions;
    if (cfg.store_path) {
        out.path.reserve((steps + 1) * nd);
        out.path.insert(out.path.end(), ens.positions.begin(), ens.positions.end());
    }
    std::size_t next_save = 0;
    auto take_snapshots = [&](std::size_t k) {
        while (next_save < save_idx.size() && save_idx[next_save] == k) {
            out.snapshots.push_back(ens.positions);
            ++next_save;
        }
    };
    take_snapshots(0);
    std::vector<double> inc(nd);
    for (std::size_t k = 0; k < steps; ++k) {
        for (std::size_t i = 0; i < cfg.n; ++i)
            rec.driver.step_increment(i, k, cfg.refine, &inc[i * cfg.d]);
        std::copy(inc.begin(), inc.end(), rec.increments.begin() + static_cast<std::ptrdiff_t>(k * nd));
        ens = em_step(ens, gamma, cfg.dt, inc, cfg.external_drift);
        // Exact grid time, not the accumulated sum.
        ens.t = static_cast<double>(k + 1) * cfg.dt;
        if (cfg.store_path) out.path.insert(out.path.end(), ens.positions.begin(), ens.positions.end());
        take_snapshots(k + 1);
    }
    return out;
}

std::vector<double> replay(const SimResult& run, const InteractionKernel& gamma,
                           const ExternalDrift& external) {
    const auto& rec = run.record;
    ParticleEnsemble ens;
    ens.n = rec.n;
    ens.d = rec.d;
    ens.positions = run.initial;
    const std::size_t nd = rec.n * rec.d;
    std::vector<double> inc(nd);
    for (std::size_t k = 0; k < rec.steps; ++k) {
        std::copy(rec.step(k), rec.step(k) + nd, inc.begin());
        ens = em_step(ens, gamma, rec.dt, inc, external);
        ens.t = static_cast<double>(k + 1) * rec.dt;
    }
    return ens.positions;
}

void write_trajectory_csv(std::ostream& os, const SimResult& run) {
    const int d = run.record.d;
    os << "time,index";
    for (int a = 0; a < d; ++a) os << ",x" << a;
    os << '\n';
    char buf[64];
    for (std::size_t s = 0; s < run.snapshots.size(); ++s) {
        for (std::size_t i = 0; i < run.record.n; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", run.save_times[s]);
            os << buf << ',' << i;
            for (int a = 0; a < d; ++a) {
                std::snprintf(buf, sizeof(buf), "%.17g", run.snapshots[s][i * d + a]);
                os << ',' << buf;
            }
            os << '\n';
        }
    }
}

}  // namespace mvlab
