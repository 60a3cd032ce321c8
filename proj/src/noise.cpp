#include "mvlab/noise.hpp"

#include "mvlab/parallel.hpp"
#include "mvlab/rng.hpp"
#include "mvlab/roughpath.hpp"
#include "mvlab/semigroup.hpp"
#include "mvlab/simd.hpp"
#include "mvlab/sobolev.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvlab {

std::vector<double> step_quadratic_variation(const IncrementRecord& rec) {
    if (rec.d != 1) throw std::invalid_argument("step_quadratic_variation: d = 1 only");
    std::vector<double> q(rec.steps * rec.n, 0.0);
    std::vector<double> sub(rec.steps * rec.refine);
    for (std::size_t j = 0; j < rec.n; ++j) {
        rec.driver.base_increments(j, 0, static_cast<int>(sub.size()), sub.data());
        for (std::size_t k = 0; k < rec.steps; ++k) {
            double acc = 0.0;
            for (int r = 0; r < rec.refine; ++r) {
                const double v = sub[k * rec.refine + r];
                acc += v * v;
            }
            q[k * rec.n + j] = acc;
        }
    }
    return q;
}

double noise_term(const SimResult& run, const TestFunction& h, std::size_t t_index, NoiseMethod method) {
    const auto& rec = run.record;
    if (t_index > rec.steps) throw std::invalid_argument("noise_term: time index beyond the run");
    std::vector<double> per(rec.n);
    for (std::size_t j = 0; j < rec.n; ++j) {
        const RoughLift lift = ito_lift(rec, j);
        const ControlledPath x = ControlledPath::from_simulation(run, j, lift, 0.0);
        const GermA A(h, x, lift);
        if (method == NoiseMethod::ItoSum) {
            per[j] = ito_riemann_sum(A, t_index, 1);
        } else {
            std::vector<std::size_t> nodes(t_index + 1);
            for (std::size_t k = 0; k <= t_index; ++k) nodes[k] = k;
            per[j] = partition_sum(A, nodes);
        }
    }
    return pairwise_sum(per) / static_cast<double>(rec.n);
}

NoiseSeries noise_term_series(const SimResult& run, const TestFunction& h,
                              const std::vector<std::size_t>& t_indices, bool with_sewing) {
    const auto& rec = run.record;
    if (rec.d != 1 || h.dim() != 1) throw std::invalid_argument("noise_term_series: d = 1 only");
    if (run.path.empty()) throw std::invalid_argument("noise_term_series: run has no stored path");
    const std::size_t n = rec.n;
    const std::vector<double> q = with_sewing ? step_quadratic_variation(rec) : std::vector<double>{};

    // Heated mixtures depend only on the lag t - k.
    std::size_t max_t = 0;
    for (auto t : t_indices) {
        if (t > rec.steps) throw std::invalid_argument("noise_term_series: time index beyond the run");
        if (t % 2 != 0) throw std::invalid_argument("noise_term_series: time indices must be even");
        max_t = std::max(max_t, t);
    }
    std::vector<std::vector<double>> amp(max_t + 1), ctr(max_t + 1), var(max_t + 1);
    for (std::size_t lag = 1; lag <= max_t; ++lag)
        apply_heat(h, static_cast<double>(lag) * rec.dt).mixture_arrays(amp[lag], ctr[lag], var[lag]);

    // Per-step iterated integrals BB_k = (dB^2 - Q) / 2.
    std::vector<double> bb;
    if (with_sewing) {
        bb.resize(rec.steps * n);
        for (std::size_t k = 0; k < rec.steps; ++k)
            for (std::size_t j = 0; j < n; ++j) {
                const double db = rec.step(k)[j];
                bb[k * n + j] = 0.5 * (db * db - q[k * n + j]);
            }
    }

    NoiseSeries out;
    out.t_index = t_indices;
    std::vector<double> g(n), hs(with_sewing ? n : 0);
    for (std::size_t t : t_indices) {
        double ito = 0.0, sew = 0.0, ito2 = 0.0, sew2 = 0.0;
        for (std::size_t k = 0; k < t; ++k) {
            const std::size_t lag = t - k;
            const std::span<const double> x(run.path_at(k), n);
            simd::gaussian_mixture_derivatives(x, amp[lag], ctr[lag], var[lag], g,
                                               with_sewing ? std::span<double>(hs) : std::span<double>{});
            const double* db = rec.step(k);
            double a1 = 0.0, a2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) a1 += g[j] * db[j];
            if (with_sewing)
                for (std::size_t j = 0; j < n; ++j) a2 += hs[j] * bb[k * n + j];
            ito += a1;
            sew += a1 + a2;
            if (k % 2 == 0) {
                const double* db1 = rec.step(k + 1);
                double c1 = 0.0, c2 = 0.0;
                for (std::size_t j = 0; j < n; ++j) c1 += g[j] * (db[j] + db1[j]);
                if (with_sewing)
                    for (std::size_t j = 0; j < n; ++j)
                        c2 += hs[j] * (bb[k * n + j] + bb[(k + 1) * n + j] + db[j] * db1[j]);
                ito2 += c1;
                sew2 += c1 + c2;
            }
        }
        const double inv = 1.0 / static_cast<double>(n);
        out.ito.push_back(ito * inv);
        out.ito_half.push_back(ito2 * inv);
        if (with_sewing) {
            out.sewing.push_back(sew * inv);
            out.sewing_half.push_back(sew2 * inv);
            const double gap = std::max(std::abs(ito - ito2), std::abs(sew - sew2)) * inv;
            if (std::abs(sew - ito) * inv > 5.0 * gap) ++out.disagreements;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

void NoiseStudyConfig::validate() const {
    if (ladder.empty()) throw std::invalid_argument("noise study: empty ladder");
    for (std::size_t i = 1; i < ladder.size(); ++i)
        if (ladder[i] <= ladder[i - 1]) throw std::invalid_argument("noise study: ladder must be strictly increasing");
    if (replicas < 2) throw std::invalid_argument("noise study: need at least two replicas");
    if (!(dt > 0.0) || !(T >= dt)) throw std::invalid_argument("noise study: need 0 < dt <= T");
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    if (save_count == 0 || steps % save_count != 0 || (steps / save_count) % 2 != 0)
        throw std::invalid_argument("noise study: save times must sit on every (even) k-th step");
    if (h.dim() != 1) throw std::invalid_argument("noise study: d = 1 test function required");
}

namespace {

std::vector<std::size_t> save_indices(const NoiseStudyConfig& cfg) {
    const auto steps = static_cast<std::size_t>(std::llround(cfg.T / cfg.dt));
    const std::size_t stride = steps / cfg.save_count;
    std::vector<std::size_t> idx;
    for (std::size_t s = 1; s <= cfg.save_count; ++s) idx.push_back(s * stride);
    return idx;
}

SimResult run_replica(const NoiseStudyConfig& cfg, std::size_t n, std::size_t r) {
    SimConfig sc;
    sc.T = cfg.T;
    sc.dt = cfg.dt;
    sc.n = n;
    sc.d = 1;
    sc.initial = cfg.initial;
    sc.seed = replica_seed(cfg.seed, r);
    sc.refine = cfg.refine;
    sc.store_path = true;
    const InteractionKernel k = cfg.interacting ? tanh_kernel(1) : zero_kernel(1);
    return simulate_paths(sc, k);
}

}  // namespace

NoiseDecayResult noise_decay_study(const NoiseStudyConfig& cfg) {
    cfg.validate();
    NoiseDecayResult res;
    const double hn = hs_norm(cfg.h, cfg.m);
    res.h_norm_sq = hn * hn;
    const auto idx = save_indices(cfg);
    const std::size_t R = cfg.replicas;
    const std::size_t nt = idx.size();
    res.methods_consistent = true;
    std::vector<double> xs, ys, ses;
    for (std::size_t n : cfg.ladder) {
        std::vector<double> sup_ito(R), sup_sew(R), w(R * nt), method_sq(R), mesh_sq(R);
        std::vector<std::size_t> disagree(R);
        parallel_for(R, cfg.threads, [&](std::size_t r) {
            const SimResult run = run_replica(cfg, n, r);
            const NoiseSeries s = noise_term_series(run, cfg.h, idx, true);
            double a = 0.0, b = 0.0, ms = 0.0, hs = 0.0;
            for (std::size_t t = 0; t < nt; ++t) {
                a = std::max(a, s.ito[t] * s.ito[t]);
                b = std::max(b, s.sewing[t] * s.sewing[t]);
                w[r * nt + t] = s.ito[t];
                ms += (s.sewing[t] - s.ito[t]) * (s.sewing[t] - s.ito[t]);
                hs += (s.ito[t] - s.ito_half[t]) * (s.ito[t] - s.ito_half[t]);
            }
            sup_ito[r] = a;
            sup_sew[r] = b;
            method_sq[r] = ms;
            mesh_sq[r] = hs;
            disagree[r] = s.disagreements;
        });
        NoiseDecayRow row;
        row.n = n;
        const MeanSe e = mean_se(sup_ito);
        row.estimate = e.mean;
        row.se = e.se;
        row.sewing_estimate = mean_se(sup_sew).mean;
        row.c_hat = static_cast<double>(n) * e.mean / res.h_norm_sq;
        row.rms_method_gap = std::sqrt(pairwise_sum(method_sq) / static_cast<double>(R * nt));
        row.rms_mesh_gap = std::sqrt(pairwise_sum(mesh_sq) / static_cast<double>(R * nt));
        for (auto v : disagree) row.disagreements += v;
        std::vector<double> col(R);
        for (std::size_t t = 0; t < nt; ++t) {
            for (std::size_t r = 0; r < R; ++r) col[r] = w[r * nt + t];
            const MeanSe c = mean_se(col);
            if (c.se > 0.0) row.max_center_z = std::max(row.max_center_z, std::abs(c.mean) / c.se);
        }
        if (!(row.rms_method_gap < 3.0 * row.rms_mesh_gap)) res.methods_consistent = false;
        res.rows.push_back(row);
        xs.push_back(static_cast<double>(n));
        ys.push_back(row.estimate);
        ses.push_back(row.se);
    }
    if (xs.size() >= 2) {
        res.fit = fit_loglog(xs, ys, ses);
        res.pass = std::abs(res.fit.slope + 1.0) <= 0.25;
    }
    return res;
}

std::vector<TestFunction> uniform_probe_dictionary() {
    std::vector<TestFunction> dict;
    for (int k = 0; k < 10; ++k) {
        const double c = -2.0 + 4.0 * k / 9.0;
        const double w = (k % 2 == 0) ? 0.5 : 1.0;
        dict.push_back(TestFunction::bump(1.0, {c}, w));
    }
    return dict;
}

UniformProbeResult uniform_h_probe(const NoiseStudyConfig& cfg, const std::vector<TestFunction>& dictionary) {
    cfg.validate();
    UniformProbeResult res;
    for (const auto& h : dictionary) res.h_norms.push_back(hs_norm(h, cfg.m));
    const auto idx = save_indices(cfg);
    std::vector<double> xs, ys, ses;
    for (std::size_t n : cfg.ladder) {
        std::vector<double> stat(cfg.replicas);
        parallel_for(cfg.replicas, cfg.threads, [&](std::size_t r) {
            const SimResult run = run_replica(cfg, n, r);
            double best = 0.0;
            for (std::size_t q = 0; q < dictionary.size(); ++q) {
                const NoiseSeries s = noise_term_series(run, dictionary[q], idx, false);
                for (double v : s.ito) best = std::max(best, std::abs(v) / res.h_norms[q]);
            }
            stat[r] = best;
        });
        const MeanSe e = mean_se(stat);
        res.rows.push_back({n, e.mean, e.se});
        xs.push_back(static_cast<double>(n));
        ys.push_back(e.mean);
        ses.push_back(e.se);
    }
    if (xs.size() >= 2) res.fit = fit_loglog(xs, ys, ses);
    return res;
}

// ---------------------------------------------------------------------------

namespace {

// Exact OU(a) path from 0 for one particle, writing X at steps 1..K.
void ou_path(const CounterRng& rng, std::uint32_t particle, double a, double dt, std::size_t steps,
             double* out) {
    const double decay = std::exp(-a * dt);
    const double sd = std::sqrt((1.0 - std::exp(-2.0 * a * dt)) / (2.0 * a));
    double x = 0.0;
    for (std::size_t k = 0; k < steps; k += 2) {
        const auto z = rng.normal2(particle, static_cast<std::uint32_t>(k / 2), 0, StreamTag::OrnsteinUhlenbeck);
        x = decay * x + sd * z.first;
        out[k] = x;
        if (k + 1 < steps) {
            x = decay * x + sd * z.second;
            out[k + 1] = x;
        }
    }
}

}  // namespace

OuToyResult ou_toy_study(double a, const std::vector<std::size_t>& ladder, double T, std::size_t replicas,
                         std::size_t steps, std::uint64_t seed, int threads) {
    if (!(a > 0.0)) throw std::invalid_argument("ou_toy_study: a must be positive");
    if (ladder.empty() || steps == 0 || replicas < 2) throw std::invalid_argument("ou_toy_study: bad sizes");
    for (std::size_t i = 1; i < ladder.size(); ++i)
        if (ladder[i] <= ladder[i - 1]) throw std::invalid_argument("ou_toy_study: ladder must be increasing");
    const double dt = T / static_cast<double>(steps);
    const std::size_t L = ladder.size();
    std::vector<double> sup(replicas * L);
    parallel_for(replicas, threads, [&](std::size_t r) {
        const CounterRng rng(replica_seed(seed, r));
        std::vector<double> sum(steps, 0.0), x(steps);
        std::size_t j = 0;
        // Ladders are nested: the n-particle average reuses the first n paths.
        for (std::size_t li = 0; li < L; ++li) {
            for (; j < ladder[li]; ++j) {
                ou_path(rng, static_cast<std::uint32_t>(j), a, dt, steps, x.data());
                for (std::size_t k = 0; k < steps; ++k) sum[k] += x[k];
            }
            double best = 0.0;
            const double inv = 1.0 / static_cast<double>(ladder[li]);
            for (std::size_t k = 0; k < steps; ++k) best = std::max(best, (sum[k] * inv) * (sum[k] * inv));
            sup[r * L + li] = best;
        }
    });
    OuToyResult res;
    std::vector<double> xs, ys, ses, col(replicas);
    double rmin = INFINITY;
    for (std::size_t li = 0; li < L; ++li) {
        for (std::size_t r = 0; r < replicas; ++r) col[r] = sup[r * L + li];
        const MeanSe e = mean_se(col);
        OuToyRow row;
        row.n = ladder[li];
        row.estimate = e.mean;
        row.se = e.se;
        row.unit_bound = std::log(1.0 + 2.0 * a * T) / (2.0 * static_cast<double>(ladder[li]) * a);
        row.ratio = row.estimate / row.unit_bound;
        res.c_hat = std::max(res.c_hat, row.ratio);
        rmin = std::min(rmin, row.ratio);
        res.rows.push_back(row);
        xs.push_back(static_cast<double>(row.n));
        ys.push_back(row.estimate);
        ses.push_back(row.se);
    }
    res.ratio_spread = res.c_hat / rmin;
    if (L >= 2) {
        res.fit = fit_loglog(xs, ys, ses);
        res.pass = std::abs(res.fit.slope + 1.0) <= 0.2 && res.ratio_spread <= 1.5;
    }
    return res;
}

std::vector<double> ou_terminal_samples(double a, double T, std::size_t steps, std::size_t count,
                                        std::uint64_t seed) {
    const CounterRng rng(seed);
    std::vector<double> out(count), x(steps);
    for (std::size_t j = 0; j < count; ++j) {
        ou_path(rng, static_cast<std::uint32_t>(j), a, T / static_cast<double>(steps), steps, x.data());
        out[j] = x[steps - 1];
    }
    return out;
}

std::string to_string(MartingaleKind k) {
    switch (k) {
        case MartingaleKind::Zero: return "zero";
        case MartingaleKind::Brownian: return "brownian";
        case MartingaleKind::OuDerived: return "ou-derived";
    }
    return "unknown";
}

namespace {

// Grid path of the martingale and its bracket for one replica.
void martingale_path(MartingaleKind kind, const CounterRng& rng, double T, std::size_t steps, double a,
                     std::size_t n, std::vector<double>& m, std::vector<double>& qv) {
    const double dt = T / static_cast<double>(steps);
    m.assign(steps + 1, 0.0);
    qv.assign(steps + 1, 0.0);
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        qv[k] = kind == MartingaleKind::OuDerived ? std::expm1(2.0 * a * t) : t;
    }
    if (kind == MartingaleKind::Zero) return;
    if (kind == MartingaleKind::Brownian) {
        for (std::size_t k = 0; k < steps; ++k)
            m[k + 1] = m[k] + std::sqrt(dt) * rng.normal(0, static_cast<std::uint32_t>(k / 2),
                                                         static_cast<std::uint32_t>(k % 2), StreamTag::Martingale);
        return;
    }
    // M_t = sum_j sqrt(2a/n) int_0^t e^{as} dB^j_s with exact Gaussian
    // increments of the stochastic integrals.
    const double c = std::sqrt(2.0 * a / static_cast<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
        double integral = 0.0;
        for (std::size_t k = 0; k < steps; ++k) {
            const double t0 = static_cast<double>(k) * dt, t1 = t0 + dt;
            const double v = (std::exp(2.0 * a * t1) - std::exp(2.0 * a * t0)) / (2.0 * a);
            integral += std::sqrt(v) * rng.normal(static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(k / 2),
                                                  static_cast<std::uint32_t>(k % 2), StreamTag::Martingale);
            m[k + 1] += c * integral;
        }
    }
}

}  // namespace

GpResult gp_ratio_study(MartingaleKind kind, const std::vector<double>& T_ladder, std::size_t replicas,
                        double steps_per_unit_time, std::uint64_t seed, double a, std::size_t n, int threads) {
    if (T_ladder.empty() || replicas < 2) throw std::invalid_argument("gp_ratio_study: bad sizes");
    GpResult res;
    res.kind = kind;
    std::vector<double> logT, ratio;
    for (double T : T_ladder) {
        const auto steps = static_cast<std::size_t>(std::llround(T * steps_per_unit_time));
        std::vector<double> num(replicas);
        parallel_for(replicas, threads, [&](std::size_t r) {
            const CounterRng rng(replica_seed(seed, r));
            std::vector<double> m, qv;
            martingale_path(kind, rng, T, steps, a, n, m, qv);
            double best = 0.0;
            for (std::size_t k = 0; k <= steps; ++k) best = std::max(best, m[k] * m[k] / (1.0 + qv[k]));
            num[r] = best;
        });
        const MeanSe e = mean_se(num);
        GpRow row;
        row.T = T;
        row.numerator = e.mean;
        row.numerator_se = e.se;
        const double qT = kind == MartingaleKind::OuDerived ? std::expm1(2.0 * a * T) : T;
        row.denominator = std::log(1.0 + std::log(1.0 + qT));
        row.ratio = row.numerator / row.denominator;
        res.rows.push_back(row);
        logT.push_back(std::log(T));
        ratio.push_back(row.ratio);
    }
    if (kind == MartingaleKind::Zero) {
        res.pass = true;
        return res;
    }
    const double hi = *std::max_element(ratio.begin(), ratio.end());
    const double lo = *std::min_element(ratio.begin(), ratio.end());
    res.spread = lo > 0.0 ? hi / lo : INFINITY;
    if (ratio.size() >= 2) {
        std::vector<double> log_ratio;
        for (double r : ratio) log_ratio.push_back(std::log(r));
        res.trend = fit_line(logT, log_ratio);
        res.absolute_trend = fit_line(logT, ratio);
        res.pass = res.trend.slope <= 0.1 && res.spread <= 10.0;
    }
    return res;
}

OuMartingaleCheck ou_martingale_check(double a, double T, std::size_t n, std::size_t replicas,
                                      std::size_t steps, std::uint64_t seed, int threads) {
    std::vector<double> stat(replicas);
    const double dt = T / static_cast<double>(steps);
    parallel_for(replicas, threads, [&](std::size_t r) {
        const CounterRng rng(replica_seed(seed, r));
        std::vector<double> m, qv;
        martingale_path(MartingaleKind::OuDerived, rng, T, steps, a, n, m, qv);
        double best = 0.0;
        for (std::size_t k = 0; k <= steps; ++k)
            best = std::max(best, std::exp(-2.0 * a * static_cast<double>(k) * dt) * m[k] * m[k]);
        stat[r] = best;
    });
    const MeanSe e = mean_se(stat);
    OuMartingaleCheck c;
    c.estimate = e.mean;
    c.se = e.se;
    c.c_prime = e.mean / std::log(1.0 + 2.0 * a * T);
    return c;
}

}  // namespace mvlab
