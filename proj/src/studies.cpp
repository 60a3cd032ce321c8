#include "mvlab/studies.hpp"

#include "mvlab/grid_measure.hpp"
#include "mvlab/mv_solver.hpp"
#include "mvlab/noise.hpp"
#include "mvlab/parallel.hpp"
#include "mvlab/particles.hpp"
#include "mvlab/rng.hpp"
#include "mvlab/roughpath.hpp"
#include "mvlab/semigroup.hpp"
#include "mvlab/sobolev.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <cstdio>
#include <sstream>

namespace mvlab {

void Table::add(std::vector<std::string> row) {
    if (row.size() != columns.size()) throw std::logic_error("Table " + name + ": row width mismatch");
    rows.push_back(std::move(row));
}

std::string cell(double v) { return format_double(v); }
std::string cell(std::size_t v) { return std::to_string(v); }
std::string cell(const std::string& v) { return v; }

bool StudyResult::pass() const {
    if (exploratory) return true;
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

const Verdict* StudyResult::verdict(const std::string& name) const {
    for (const auto& v : verdicts)
        if (v.name == name) return &v;
    return nullptr;
}

namespace {

InteractionKernel kernel_by_name(const std::string& name, int d) {
    if (name == "tanh") return tanh_kernel(d);
    if (name == "zero") return zero_kernel(d);
    throw ConfigError("unknown kernel '" + name + "' (expected tanh or zero)");
}

InitialLaw law_by_name(const std::string& name, const std::vector<double>& p) {
    auto need = [&](std::size_t k) {
        if (p.size() != k) throw ConfigError("initial law '" + name + "' needs " + std::to_string(k) + " parameters");
    };
    if (name == "gaussian") {
        need(2);
        return InitialLaw::gaussian(p[0], p[1]);
    }
    if (name == "cauchy") {
        need(2);
        return InitialLaw::cauchy(p[0], p[1]);
    }
    if (name == "two-cluster") {
        need(3);
        return InitialLaw::two_cluster(p[0], p[1], p[2]);
    }
    throw ConfigError("unknown initial law '" + name + "'");
}

std::size_t cells_for(double L, double spacing) {
    const double n = 2.0 * L / spacing;
    const auto N = static_cast<std::size_t>(std::llround(n));
    if (std::abs(n - static_cast<double>(N)) > 1e-9 * n) throw ConfigError("window 2L is not a multiple of the spacing");
    return N;
}

// Short form for human-readable criteria; files keep full precision.
std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

Verdict verdict(std::string name, bool pass, double value, std::string criterion, std::string detail = {}) {
    return Verdict{std::move(name), pass, value, std::move(criterion), std::move(detail)};
}

std::string describe_fit(const SlopeFit& f) {
    std::ostringstream os;
    os.precision(4);
    os << "slope " << f.slope << " [" << f.ci_low << ", " << f.ci_high << "]";
    return os.str();
}


}  // namespace

// ---------------------------------------------------------------------------

void LlnParams::quick() {
    ladder = {100, 400, 1600};
    replicas = 6;
    save_count = 5;
    oracle_check = false;
}

StudyResult run_lln_convergence(const Config& cfg, const RunSettings& run) {
    const auto p = read_section<LlnParams>(cfg, "lln");
    auto q = p;
    if (run.quick) q.quick();
    StudyResult res;
    write_section(res.config, "lln", q);
    if (q.ladder.size() < 2 || q.replicas < 2 || q.save_count == 0) throw ConfigError("[lln] needs a ladder, replicas >= 2");
    const InteractionKernel gamma = kernel_by_name(q.kernel, 1);
    const FrequencyGrid fgrid = default_measure_grid(1);
    std::vector<double> save_times;
    for (std::size_t j = 1; j <= q.save_count; ++j)
        save_times.push_back(q.T * static_cast<double>(j) / static_cast<double>(q.save_count));

    Table dist{"distances", {"track", "n", "rms_sup_distance", "se", "mean_sup_distance", "replicas"}, {}};
    Table checks{"oracle", {"track", "iteration", "picard_increment", "noise_floor", "grid_error", "oracle_distance", "budget"}, {}};
    Table window{"window", {"track", "L", "cells", "grid_tail_mass", "clipped_mass", "max_renorm_drift"}, {}};

    for (const auto& track : q.tracks) {
        double L = 0.0, spacing = 0.0;
        InitialLaw law;
        std::function<InitialLaw(std::size_t)> particle_law;
        if (track == "gaussian") {
            L = q.gaussian_L;
            spacing = q.gaussian_spacing;
            law = InitialLaw::gaussian(0.0, 1.0);
            particle_law = [law](std::size_t) { return law; };
        } else if (track == "two-cluster") {
            L = q.cluster_L;
            spacing = q.cluster_spacing;
            law = InitialLaw::two_cluster(-q.cluster_center, q.cluster_center, q.cluster_sd);
            // Deterministic mid-quantile placement: no independence at all.
            particle_law = [&q](std::size_t n) {
                return InitialLaw::list(two_cluster_quantiles(n, -q.cluster_center, q.cluster_center, q.cluster_sd));
            };
        } else if (track == "cauchy") {
            L = q.cauchy_L;
            spacing = q.cauchy_spacing;
            law = InitialLaw::cauchy(0.0, q.cauchy_scale);
            particle_law = [law](std::size_t) { return law; };
        } else {
            throw ConfigError("[lln] unknown track '" + track + "'");
        }
        MVSolverConfig sc;
        sc.L = L;
        sc.N = cells_for(L, spacing);
        sc.dt = q.dt;
        sc.T = q.T;
        const GridMeasure nu0 = GridMeasure::from_law(law, L, sc.N);
        const MVSolution sol = solve_mv(nu0, gamma, sc);
        window.add({track, cell(L), cell(sc.N), cell(nu0.tail_mass), cell(sol.log.clipped_mass),
                    cell(sol.log.max_step_drift)});

        if (q.oracle_check) {
            MVSolverConfig half = sc;
            half.dt = 0.5 * sc.dt;
            const MVSolution fine = solve_mv(nu0, gamma, half);
            OracleConfig oc;
            oc.N = q.oracle_n;
            oc.T = q.T;
            oc.dt = q.oracle_dt;
            oc.K = q.oracle_iterations;
            oc.m = q.m;
            oc.seed = replica_seed(run.seed, 1000003);
            oc.initial = track == "two-cluster" ? particle_law(q.oracle_n) : law;
            const double every = (q.T / static_cast<double>(q.save_count)) / q.oracle_dt;
            oc.save_every = static_cast<std::size_t>(std::llround(every));
            if (std::abs(every - static_cast<double>(oc.save_every)) > 1e-9)
                throw ConfigError("[lln] save spacing must be a multiple of oracle_dt");
            oc.threads = run.threads;
            const OracleResult orc = nonlinear_process_oracle(gamma, oc);
            double grid_err = 0.0;
            for (double t : orc.save_times) {
                GridMeasure diff = sol.states[sol.index_of(t)];
                const GridMeasure& other = fine.states[fine.index_of(t)];
                for (std::size_t c = 0; c < diff.cells(); ++c) diff.density[c] -= other.density[c];
                grid_err = std::max(grid_err, hs_norm(diff, -q.m, fgrid).value);
            }
            const double distance = oracle_grid_distance(orc, sol, q.m, fgrid);
            const double budget = 3.0 * (grid_err + orc.noise_floor);
            for (std::size_t k = 0; k < orc.increments.size(); ++k)
                checks.add({track, cell(k + 1), cell(orc.increments[k]), cell(orc.noise_floor), cell(grid_err),
                            cell(distance), cell(budget)});
            res.verdicts.push_back(verdict(track + "_picard_contracting", orc.contracting, orc.increments.back(),
                                           "Picard increments decrease"));
            const bool agree = distance < budget;
            res.verdicts.push_back(verdict(track + "_oracle_agreement", agree, distance,
                                           "sup_t |oracle - grid|_{-m} < 3 (grid error + noise floor)"));
            if (!agree) {
                res.notes.push_back(track + ": PDE and Picard oracle disagree; particle runs skipped");
                continue;
            }
        }

        std::vector<SpectralField> ref;
        for (double t : save_times) ref.push_back(spectrum(sol.states[sol.index_of(t)], fgrid));
        Series s{track, {}, {}, {}};
        std::vector<double> rms;
        for (std::size_t n : q.ladder) {
            const InitialLaw init = particle_law(n);
            std::vector<double> sup(q.replicas);
            parallel_for(q.replicas, run.threads, [&](std::size_t r) {
                SimConfig c;
                c.T = q.T;
                c.dt = q.dt;
                c.n = n;
                c.d = 1;
                c.save_times = save_times;
                c.initial = init;
                c.seed = replica_seed(run.seed, r);
                const SimResult out = simulate_paths(c, gamma);
                double worst = 0.0;
                for (std::size_t j = 0; j < save_times.size(); ++j) {
                    const EmpiricalMeasureView mu{1, out.snapshots[j], {}};
                    worst = std::max(worst, weighted_norm(spectrum(mu, fgrid) - ref[j], -q.m).value);
                }
                sup[r] = worst;
            });
            const MeanSe e = rms_se(sup);
            dist.add({track, cell(n), cell(e.mean), cell(e.se), cell(mean_se(sup).mean), cell(q.replicas)});
            s.x.push_back(static_cast<double>(n));
            s.y.push_back(e.mean);
            s.yerr.push_back(e.se);
            rms.push_back(e.mean);
        }
        const SlopeFit fit = fit_loglog(s.x, s.y, s.yerr);
        res.series.push_back(s);
        res.fits.push_back({track, fit});
        bool decreasing = true;
        for (std::size_t i = 1; i < rms.size(); ++i) decreasing = decreasing && rms[i] < rms[i - 1];
        res.verdicts.push_back(verdict(track + "_decreasing", decreasing, fit.slope,
                                       "RMS sup distance strictly decreasing along the ladder", describe_fit(fit)));
        if (track == "gaussian") {
            const bool in_band = fit.slope >= q.slope_low && fit.slope <= q.slope_high;
            res.verdicts.push_back(verdict("gaussian_slope", in_band, fit.slope,
                                           "slope in [" + num(q.slope_low) + ", " +
                                               num(q.slope_high) + "]",
                                           describe_fit(fit)));
        }
        if (track == "two-cluster")
            res.verdicts.push_back(verdict("two-cluster_slope", fit.slope < q.cluster_slope_max, fit.slope,
                                           "slope < " + num(q.cluster_slope_max), describe_fit(fit)));
    }
    res.notes.push_back("rate band is an artifact-level expectation from the 1/n noise bound; the limit theorem itself carries no rate");
    res.tables = {dist, checks, window};
    return res;
}

// ---------------------------------------------------------------------------

void NoiseDecayParams::quick() {
    ladder = {64, 256};
    replicas = 10;
    refine = 4;
    probe_ladder = {64, 256};
    probe_replicas = 6;
}

StudyResult run_noise_decay(const Config& cfg, const RunSettings& run) {
    auto p = read_section<NoiseDecayParams>(cfg, "noise-decay");
    if (run.quick) p.quick();
    StudyResult res;
    write_section(res.config, "noise-decay", p);
    NoiseStudyConfig nc;
    nc.ladder = p.ladder;
    nc.replicas = p.replicas;
    nc.h = TestFunction::bump(p.h_amplitude, {p.h_center}, p.h_width);
    nc.T = p.T;
    nc.dt = p.dt;
    nc.save_count = p.save_count;
    nc.m = p.m;
    nc.alpha = p.alpha;
    nc.refine = p.refine;
    nc.seed = run.seed;
    nc.interacting = p.interacting;
    nc.threads = run.threads;
    const NoiseDecayResult r = noise_decay_study(nc);

    Table t{"decay",
            {"n", "replicas", "estimate", "se", "c_hat", "sewing_estimate", "rms_method_gap", "rms_mesh_gap",
             "max_center_z", "disagreements"},
            {}};
    Series s{"sup_w_squared", {}, {}, {}};
    for (const auto& row : r.rows) {
        t.add({cell(row.n), cell(p.replicas), cell(row.estimate), cell(row.se), cell(row.c_hat),
               cell(row.sewing_estimate), cell(row.rms_method_gap), cell(row.rms_mesh_gap), cell(row.max_center_z),
               cell(row.disagreements)});
        s.x.push_back(static_cast<double>(row.n));
        s.y.push_back(row.estimate);
        s.yerr.push_back(row.se);
    }
    res.tables.push_back(t);
    res.series.push_back(s);
    res.fits.push_back({"sup_w_squared", r.fit});
    res.verdicts.push_back(verdict("slope", std::abs(r.fit.slope + 1.0) <= p.slope_tolerance, r.fit.slope,
                                   "slope within -1 +/- " + num(p.slope_tolerance), describe_fit(r.fit)));
    res.verdicts.push_back(verdict("methods_consistent", r.methods_consistent, 0.0,
                                   "RMS(sewing - Ito) < 3 RMS(Ito mesh gap) at every n"));
    res.notes.push_back("sup over " + std::to_string(p.save_count) + " save times (grid lower bound of the continuous sup)");

    if (p.uniform_probe) {
        NoiseStudyConfig pc = nc;
        pc.ladder = p.probe_ladder;
        pc.replicas = p.probe_replicas;
        const auto dict = uniform_probe_dictionary();
        const UniformProbeResult u = uniform_h_probe(pc, dict);
        Table ut{"uniform_probe", {"n", "replicas", "estimate", "se"}, {}};
        Series us{"uniform_probe", {}, {}, {}};
        for (const auto& row : u.rows) {
            ut.add({cell(row.n), cell(pc.replicas), cell(row.estimate), cell(row.se)});
            us.x.push_back(static_cast<double>(row.n));
            us.y.push_back(row.estimate);
            us.yerr.push_back(row.se);
        }
        res.tables.push_back(ut);
        res.series.push_back(us);
        res.fits.push_back({"uniform_probe", u.fit});
        res.notes.push_back("uniform_probe is exploratory: the uniform-in-h bound is open; slope " +
                            num(u.fit.slope));
    }
    return res;
}

// ---------------------------------------------------------------------------

void OuToyParams::quick() {
    replicas = 200;
    variance_samples = 2000;
}

StudyResult run_ou_toy(const Config& cfg, const RunSettings& run) {
    auto p = read_section<OuToyParams>(cfg, "ou-toy");
    if (run.quick) p.quick();
    StudyResult res;
    write_section(res.config, "ou-toy", p);
    const OuToyResult r = ou_toy_study(p.a, p.ladder, p.T, p.replicas, p.steps, run.seed, run.threads);
    Table t{"ou_toy", {"n", "replicas", "estimate", "se", "unit_bound", "ratio"}, {}};
    Series s{"sup_v_squared", {}, {}, {}};
    for (const auto& row : r.rows) {
        t.add({cell(row.n), cell(p.replicas), cell(row.estimate), cell(row.se), cell(row.unit_bound), cell(row.ratio)});
        s.x.push_back(static_cast<double>(row.n));
        s.y.push_back(row.estimate);
        s.yerr.push_back(row.se);
    }
    res.tables.push_back(t);
    res.series.push_back(s);
    res.fits.push_back({"sup_v_squared", r.fit});
    res.verdicts.push_back(verdict("slope", std::abs(r.fit.slope + 1.0) <= p.slope_tolerance, r.fit.slope,
                                   "slope within -1 +/- " + num(p.slope_tolerance), describe_fit(r.fit)));
    res.verdicts.push_back(verdict("single_constant", r.ratio_spread <= p.max_spread, r.ratio_spread,
                                   "max/min of estimate / bound <= " + num(p.max_spread),
                                   "C_hat = " + num(r.c_hat)));

    const auto xs = ou_terminal_samples(p.a, p.T, p.steps, p.variance_samples, replica_seed(run.seed, 777));
    const MeanSe m = mean_se(xs);
    const double var = m.sd * m.sd;
    const double exact = -std::expm1(-2.0 * p.a * p.T) / (2.0 * p.a);
    const double se = exact * std::sqrt(2.0 / static_cast<double>(xs.size() - 1));
    res.verdicts.push_back(verdict("terminal_variance", std::abs(var - exact) <= 4.0 * se, var,
                                   "sample variance within 4 SE of (1 - e^{-2aT}) / (2a)",
                                   "exact " + num(exact)));
    const auto mc = ou_martingale_check(p.a, p.T, 64, std::min<std::size_t>(p.replicas, 1000), p.steps,
                                        replica_seed(run.seed, 778), run.threads);
    Table mt{"ou_martingale", {"a", "T", "n", "estimate", "se", "c_prime"}, {}};
    mt.add({cell(p.a), cell(p.T), cell(std::size_t{64}), cell(mc.estimate), cell(mc.se), cell(mc.c_prime)});
    res.tables.push_back(mt);
    return res;
}

// ---------------------------------------------------------------------------

void GpRatioParams::quick() {
    replicas = 100;
    T_ladder = {1.0, 4.0, 16.0};
}

StudyResult run_gp_ratio(const Config& cfg, const RunSettings& run) {
    auto p = read_section<GpRatioParams>(cfg, "gp-ratio");
    if (run.quick) p.quick();
    StudyResult res;
    write_section(res.config, "gp-ratio", p);
    Table t{"gp_ratio", {"martingale", "T", "numerator", "numerator_se", "denominator", "ratio"}, {}};
    for (std::size_t i = 0; i < p.martingales.size(); ++i) {
        const std::string& name = p.martingales[i];
        MartingaleKind kind;
        if (name == "zero") kind = MartingaleKind::Zero;
        else if (name == "brownian") kind = MartingaleKind::Brownian;
        else if (name == "ou-derived") kind = MartingaleKind::OuDerived;
        else throw ConfigError("[gp-ratio] unknown martingale '" + name + "'");
        const GpResult r = gp_ratio_study(kind, p.T_ladder, p.replicas, p.steps_per_unit, replica_seed(run.seed, i),
                                          p.a, p.n, run.threads);
        Series s{name, {}, {}, {}};
        for (const auto& row : r.rows) {
            t.add({name, cell(row.T), cell(row.numerator), cell(row.numerator_se), cell(row.denominator),
                   cell(row.ratio)});
            s.x.push_back(row.T);
            s.y.push_back(row.ratio);
            s.yerr.push_back(row.numerator_se / row.denominator);
        }
        res.series.push_back(s);
        if (kind == MartingaleKind::Zero) {
            double worst = 0.0;
            for (const auto& row : r.rows) worst = std::max(worst, std::abs(row.numerator));
            res.verdicts.push_back(verdict("zero_numerator", worst == 0.0, worst, "numerator exactly 0"));
            continue;
        }
        res.fits.push_back({name + "_trend_vs_logT", r.trend});
        res.fits.push_back({name + "_ratio_vs_logT", r.absolute_trend});
        const bool ok = r.trend.slope <= p.max_trend && r.spread <= p.max_spread;
        res.verdicts.push_back(verdict(name + "_bounded", ok, r.trend.slope,
                                       "slope of log ratio in log T <= " + num(p.max_trend) +
                                           " and max/min ratio <= " + num(p.max_spread),
                                       "spread " + num(r.spread) + ", absolute slope " + num(r.absolute_trend.slope)));
    }
    res.tables.push_back(t);
    res.notes.push_back("the universal constant is never asserted, only boundedness of the quotient across T");
    return res;
}

// ---------------------------------------------------------------------------

void SewingParams::quick() {
    realizations = 20;
    frozen_steps = 1024;
}

namespace {

std::vector<double> brownian_subincrements(std::uint64_t seed, int d, double base_dt, std::size_t count) {
    BrownianDriver drv{seed, d, base_dt, {}};
    std::vector<double> out(count * d);
    drv.base_increments(0, 0, static_cast<int>(count), out.data());
    return out;
}

}  // namespace

StudyResult run_sewing_check(const Config& cfg, const RunSettings& run) {
    auto p = read_section<SewingParams>(cfg, "sewing-check");
    if (run.quick) p.quick();
    StudyResult res;
    write_section(res.config, "sewing-check", p);
    if (p.levels < 4) throw ConfigError("[sewing-check] levels must be at least 4 (three ratios)");
    const TestFunction h = TestFunction::bump(p.h_amplitude, {p.h_center}, p.h_width);

    // Exact identities on a short grid.
    {
        const std::size_t K = 64;
        const double dt = p.T / static_cast<double>(K);
        const auto sub2 = brownian_subincrements(replica_seed(run.seed, 91), 2, dt / 8.0, K * 8);
        const RoughLift lift2 = RoughLift::from_subincrements(2, dt, 8, sub2, p.alpha);
        double chen = 0.0;
        for (std::size_t s = 0; s <= K; s += 3)
            for (std::size_t u = s; u <= K; u += 5)
                for (std::size_t t = u; t <= K; t += 7) chen = std::max(chen, lift2.chen_residual(s, u, t));

        const auto sub1 = brownian_subincrements(replica_seed(run.seed, 92), 1, dt / 8.0, K * 8);
        const RoughLift lift = RoughLift::from_subincrements(1, dt, 8, sub1, p.alpha);
        std::vector<double> xs(K + 1);
        for (std::size_t k = 0; k <= K; ++k) xs[k] = 0.3 + lift.increment1(0, k);
        const HeatFamily S{dt, 1.0};
        const OneIncrement q = [&xs](const TestFunction& f, std::size_t t) { return f.value(xs[t]); };
        const TwoIncrement A = delta_hat_1(q, S);
        const ThreeIncrement Z = delta_hat_2(A, S);
        double dd = 0.0;
        for (std::size_t s = 0; s <= K; s += 4)
            for (std::size_t u = s; u <= K; u += 6)
                for (std::size_t t = u; t <= K; t += 5) dd = std::max(dd, std::abs(Z(h, t, u, s)));
        // Telescoping over an uneven partition of [0, K].
        const std::vector<std::size_t> nodes{0, 1, 4, 9, 10, 22, 23, 40, 41, 57, 63, 64};
        double tele = 0.0;
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
            tele += A(S.apply(h, K, nodes[i + 1]), nodes[i + 1], nodes[i]);
        const double tele_exact = q(h, K) - q(S.apply(h, K, 0), 0);
        const double tele_err = std::abs(tele - tele_exact);

        ControlledPath x;
        x.d = 1;
        x.x = xs;
        x.driver = &lift;
        x.follows_driver = true;
        const GermA germ(h, x, lift);
        const HolderReport hr = germ_holder_norms(germ, 200000, run.seed);

        Table t{"identities", {"identity", "max_abs_error", "tolerance"}, {}};
        t.add({"chen", cell(chen), cell(p.identity_tolerance)});
        t.add({"delta_hat_squared", cell(dd), cell(p.identity_tolerance)});
        t.add({"telescoping", cell(tele_err), cell(p.identity_tolerance)});
        t.add({"germ_split", cell(hr.split_residual), cell(p.identity_tolerance)});
        res.tables.push_back(t);
        const std::string tol = "<= " + num(p.identity_tolerance);
        res.verdicts.push_back(verdict("chen", chen <= p.identity_tolerance, chen, tol));
        res.verdicts.push_back(verdict("delta_hat_squared", dd <= p.identity_tolerance, dd, tol));
        res.verdicts.push_back(verdict("telescoping", tele_err <= p.identity_tolerance, tele_err, tol));
        res.verdicts.push_back(verdict("germ_split", hr.split_residual <= p.identity_tolerance, hr.split_residual, tol));
        Table hn{"holder", {"germ_norm", "delta_norm", "A1", "A2", "A3", "A4", "pairs", "triples"}, {}};
        hn.add({cell(hr.germ_norm), cell(hr.delta_norm), cell(hr.part_norms[0]), cell(hr.part_norms[1]),
                cell(hr.part_norms[2]), cell(hr.part_norms[3]), cell(hr.pairs), cell(hr.triples)});
        res.tables.push_back(hn);
    }

    // Frozen path x = x0: the integral is the Wiener integral of
    // u -> grad S_{T-u} h(x0).  Germ sums at frozen_steps and frozen_steps / 4
    // are compared with a left-point Riemann sum on the shared fine mesh.
    {
        const std::size_t K = p.frozen_steps, fine = K * static_cast<std::size_t>(p.frozen_refine);
        if (K % 4 != 0) throw ConfigError("[sewing-check] frozen_steps must be a multiple of 4");
        const double base = p.T / static_cast<double>(fine);
        const std::vector<std::size_t> meshes{K / 4, K};
        std::vector<std::vector<double>> err(meshes.size(), std::vector<double>(p.realizations));
        std::vector<double> oracle(p.realizations);
        parallel_for(p.realizations, run.threads, [&](std::size_t r) {
            const auto sub = brownian_subincrements(replica_seed(run.seed, 10000 + r), 1, base, fine);
            std::vector<double> terms(fine);
            for (std::size_t i = 0; i < fine; ++i)
                terms[i] = apply_heat(h, p.T - static_cast<double>(i) * base).derivative1(p.frozen_x0) * sub[i];
            oracle[r] = pairwise_sum(terms);
            for (std::size_t j = 0; j < meshes.size(); ++j) {
                const std::size_t Kc = meshes[j];
                const RoughLift lift = RoughLift::from_subincrements(1, p.T / static_cast<double>(Kc),
                                                                     static_cast<int>(fine / Kc), sub, p.alpha);
                const ControlledPath x = ControlledPath::frozen(lift, {p.frozen_x0});
                const GermA A(h, x, lift);
                std::vector<std::size_t> nodes(Kc + 1);
                for (std::size_t k = 0; k <= Kc; ++k) nodes[k] = k;
                err[j][r] = partition_sum(A, nodes) - oracle[r];
            }
        });
        const double scale = rms_se(oracle).mean;
        Table t{"frozen", {"realizations", "steps", "oracle_steps", "rms_oracle", "rms_error", "relative_error"}, {}};
        std::vector<double> rel;
        for (std::size_t j = 0; j < meshes.size(); ++j) {
            rel.push_back(rms_se(err[j]).mean / scale);
            t.add({cell(p.realizations), cell(meshes[j]), cell(fine), cell(scale), cell(rms_se(err[j]).mean),
                   cell(rel.back())});
        }
        res.tables.push_back(t);
        res.verdicts.push_back(verdict("frozen_wiener", rel.back() <= p.frozen_tolerance, rel.back(),
                                       "RMS relative gap to the refined Riemann oracle <= " + num(p.frozen_tolerance)));
        res.verdicts.push_back(verdict("frozen_refines", rel[1] < rel[0], rel[1] / rel[0],
                                       "gap shrinks when the mesh is refined 4x",
                                       "coarse " + num(rel[0])));
    }

    // Cauchy gaps of dyadic partial sums along Brownian paths.
    {
        const std::size_t K = p.decay_steps;
        const int R = p.decay_refine;
        const double dt = p.T / static_cast<double>(K);
        std::vector<SewingResult> runs(p.realizations);
        parallel_for(p.realizations, run.threads, [&](std::size_t r) {
            const auto sub = brownian_subincrements(replica_seed(run.seed, 20000 + r), 1, dt / R, K * R);
            const RoughLift lift = RoughLift::from_subincrements(1, dt, R, sub, p.alpha);
            ControlledPath x;
            x.d = 1;
            x.driver = &lift;
            x.follows_driver = true;
            x.x.resize(K + 1);
            for (std::size_t k = 0; k <= K; ++k) x.x[k] = lift.increment1(0, k);
            const GermA A(h, x, lift);
            runs[r] = sewing_integral(A, K, p.levels);
        });
        const CauchyDecay c = pooled_cauchy_decay(runs, p.decay_threshold);
        Table t{"cauchy_gaps", {"level", "intervals", "rms_gap", "ratio_to_next"}, {}};
        Series s{"cauchy_gaps", {}, {}, {}};
        for (std::size_t l = 0; l < c.rms_diff.size(); ++l) {
            t.add({cell(l), cell(runs[0].intervals[l + 1]), cell(c.rms_diff[l]),
                   l < c.ratios.size() ? cell(c.ratios[l]) : std::string("")});
            s.x.push_back(static_cast<double>(runs[0].intervals[l + 1]));
            s.y.push_back(c.rms_diff[l]);
            s.yerr.push_back(0.0);
        }
        res.tables.push_back(t);
        res.series.push_back(s);
        res.verdicts.push_back(verdict("cauchy_decay", c.pass && c.ratios.size() >= 3, c.mean_ratio,
                                       "mean ratio of successive RMS gaps >= " + num(p.decay_threshold) +
                                           " over >= 3 ratios",
                                       "min ratio " + num(c.min_ratio)));
    }
    return res;
}

// ---------------------------------------------------------------------------

void SemigroupParams::quick() {
    functions = 5;
    times = 10;
}

StudyResult run_semigroup_bounds(const Config& cfg, const RunSettings& run) {
    auto p = read_section<SemigroupParams>(cfg, "semigroup-bounds");
    if (run.quick) p.quick();
    StudyResult res;
    write_section(res.config, "semigroup-bounds", p);
    if (p.times < 2 || !(p.t_min > 0.0 && p.t_max > p.t_min)) throw ConfigError("[semigroup-bounds] bad time grid");
    const auto lib = test_function_library(1, p.functions, run.seed);
    std::vector<double> times;
    for (std::size_t i = 0; i < p.times; ++i)
        times.push_back(p.t_min * std::pow(p.t_max / p.t_min, static_cast<double>(i) / static_cast<double>(p.times - 1)));
    const GradientBoundReport r = check_gradient_identity_bounds(lib, times, p.density);
    Table t{"bounds", {"function", "t", "lhs", "bound_sqrt", "bound_linear", "witness_x"}, {}};
    for (const auto& row : r.rows)
        t.add({cell(row.function), cell(row.t), cell(row.lhs), cell(row.bound_sqrt), cell(row.bound_linear),
               cell(row.witness_x)});
    res.tables.push_back(t);
    res.verdicts.push_back(verdict("gradient_bounds", r.violations == 0, static_cast<double>(r.violations),
                                   "zero violations over the function x time grid",
                                   r.violations ? r.first_violation
                                                : "worst ratios " + num(r.worst_ratio_sqrt) + " / " +
                                                      num(r.worst_ratio_linear)));
    // Semigroup law on the same library.
    double law = 0.0;
    for (const auto& h : lib)
        for (std::size_t i = 0; i < times.size(); i += 3)
            for (std::size_t j = 0; j < times.size(); j += 4) {
                const TestFunction a = apply_heat(apply_heat(h, times[i]), times[j]);
                const TestFunction b = apply_heat(h, times[i] + times[j]);
                for (int k = -20; k <= 20; ++k) {
                    const double x = 0.25 * k;
                    law = std::max(law, std::abs(a.value(x) - b.value(x)));
                }
            }
    res.verdicts.push_back(verdict("semigroup_law", law <= p.law_tolerance, law,
                                   "|S_t S_s h - S_{t+s} h| <= " + num(p.law_tolerance)));
    return res;
}

// ---------------------------------------------------------------------------

StudyResult run_resolvent_decay(const Config& cfg, const RunSettings& run) {
    auto p = read_section<ResolventParams>(cfg, "resolvent-decay");
    if (run.quick) p.quick();
    StudyResult res;
    write_section(res.config, "resolvent-decay", p);
    const TestFunction h = TestFunction::bump(p.h_amplitude, {p.h_center}, p.h_width);
    const FrequencyGrid grid = default_function_grid(h);
    Table t{"resolvent", {"eps", "rho", "norm_sq", "ratio_to_bound"}, {}};
    for (double eps : p.eps) {
        const ResolventDecayResult r = resolvent_decay_study(h, p.eta, eps, p.m, p.rho_ladder, grid);
        Series s{"eps_" + num(eps), r.rho, r.norm_sq, std::vector<double>(r.rho.size(), 0.0)};
        for (std::size_t i = 0; i < r.rho.size(); ++i)
            t.add({cell(eps), cell(r.rho[i]), cell(r.norm_sq[i]), cell(r.ratio[i])});
        res.series.push_back(s);
        res.fits.push_back({s.name, fit_loglog(r.rho, r.norm_sq)});
        const double target = -(1.0 + 2.0 * eps) + p.slope_margin;
        res.verdicts.push_back(verdict("slope_eps_" + num(eps), r.slope <= target, r.slope,
                                       "slope <= " + num(target), "C_eta " + num(r.c_eta)));
    }
    res.tables.push_back(t);
    return res;
}

// ---------------------------------------------------------------------------

void MildParams::quick() {
    N = 480;
    dt = 0.02;
}

namespace {

std::vector<TestFunction> mild_test_functions() {
    return {TestFunction::bump(1.0, {0.0}, 1.0), TestFunction::bump(0.7, {1.0}, 0.5),
            TestFunction(1, {{-0.5, {-1.5}, 0.8}, {0.4, {0.5}, 1.5}})};
}

}  // namespace

StudyResult run_mild_residual(const Config& cfg, const RunSettings& run) {
    auto p = read_section<MildParams>(cfg, "mild-residual");
    if (run.quick) p.quick();
    StudyResult res;
    write_section(res.config, "mild-residual", p);
    const auto fns = mild_test_functions();
    MVSolverConfig sc;
    sc.L = p.L;
    sc.N = p.N;
    sc.dt = p.dt;
    sc.T = p.T;
    const GridMeasure nu0 = GridMeasure::gaussian(1, p.L, p.N, 0.0, 1.0);
    const MVSolution sol = solve_mv(nu0, tanh_kernel(1), sc);
    const GridSolutionPath path(sol);
    const GaussianHeatPath heat(1, 0.0, 1.0, p.T);
    Table t{"residuals", {"path", "function", "t", "lhs", "initial_term", "drift_term", "residual"}, {}};
    double worst = 0.0, worst_heat = 0.0;
    for (std::size_t f = 0; f < fns.size(); ++f)
        for (double tc : p.check_times) {
            const MildResidual r = weak_mild_residual(path, fns[f], tc, p.panels);
            t.add({"tanh-grid", cell(f), cell(tc), cell(r.lhs), cell(r.initial_term), cell(r.drift_term),
                   cell(r.residual)});
            worst = std::max(worst, r.residual);
            const MildResidual z = weak_mild_residual(heat, fns[f], tc, p.panels);
            t.add({"heat-closed-form", cell(f), cell(tc), cell(z.lhs), cell(z.initial_term), cell(z.drift_term),
                   cell(z.residual)});
            worst_heat = std::max(worst_heat, z.residual);
        }
    // Heat-only solver run against the closed-form flow.
    const MVSolution hs = solve_mv(nu0, zero_kernel(1), sc);
    const GridMeasure exact = GridMeasure::gaussian(1, p.L, p.N, 0.0, std::sqrt(1.0 + p.T));
    const double l1 = l1_distance(hs.states.back(), exact);
    res.tables.push_back(t);
    Table lg{"solver_log", {"clipped_mass", "max_step_clip", "max_step_drift", "clip_events", "heat_only_l1"}, {}};
    lg.add({cell(sol.log.clipped_mass), cell(sol.log.max_step_clip), cell(sol.log.max_step_drift),
            cell(sol.log.clip_events), cell(l1)});
    res.tables.push_back(lg);
    res.verdicts.push_back(verdict("solved_path", worst < p.tolerance, worst, "residual < " + num(p.tolerance)));
    res.verdicts.push_back(verdict("heat_closed_form", worst_heat < p.heat_tolerance, worst_heat,
                                   "residual < " + num(p.heat_tolerance)));
    res.verdicts.push_back(verdict("heat_only_solver", l1 < 1e-4, l1, "L1 gap to N(0, 1 + T) < 1e-4"));
    return res;
}

// ---------------------------------------------------------------------------

void StabilityParams::quick() {
    N = 480;
    dt = 0.02;
}

StudyResult run_stability(const Config& cfg, const RunSettings& run) {
    auto p = read_section<StabilityParams>(cfg, "stability");
    if (run.quick) p.quick();
    StudyResult res;
    write_section(res.config, "stability", p);
    MVSolverConfig sc;
    sc.L = p.L;
    sc.N = p.N;
    sc.dt = p.dt;
    sc.T = p.T;
    const FrequencyGrid grid = default_measure_grid(1);
    const GridMeasure nu0 = GridMeasure::gaussian(1, p.L, p.N, 0.0, 1.0);
    const GridMeasure q = GridMeasure::gaussian(1, p.L, p.N, p.perturb_mean, p.perturb_sd);
    const StabilityResult r = gronwall_stability_check(nu0, q, tanh_kernel(1), sc, p.m, p.eps_ladder, grid);
    Table t{"stability", {"eps", "initial_distance", "sup_distance", "factor", "factor_half"}, {}};
    Series s{"response", {}, {}, {}};
    for (const auto& row : r.rows) {
        t.add({cell(row.eps), cell(row.initial_distance), cell(row.sup_distance), cell(row.factor), cell(row.factor_half)});
        s.x.push_back(row.eps);
        s.y.push_back(row.sup_distance);
        s.yerr.push_back(0.0);
    }
    GridMeasure p1 = nu0;
    for (std::size_t c = 0; c < p1.cells(); ++c) p1.density[c] = 0.99 * nu0.density[c] + 0.01 * q.density[c];
    const double heat_factor = gronwall_growth_factor(nu0, p1, zero_kernel(1), sc, p.m, grid);
    t.add({"heat-only", cell(0.01), "", cell(heat_factor), ""});
    res.tables.push_back(t);
    res.series.push_back(s);
    res.fits.push_back({"response", r.response});
    res.verdicts.push_back(verdict("linear_response", std::abs(r.response.slope - 1.0) <= p.slope_tolerance,
                                   r.response.slope, "slope 1 +/- " + num(p.slope_tolerance)));
    res.verdicts.push_back(verdict("doubling", r.doubling_ok, r.rows.front().factor,
                                   "factor(T) <= 4 factor(T/2)^2 on every row"));
    res.verdicts.push_back(verdict("heat_contraction", heat_factor <= 1.0 + 1e-12, heat_factor,
                                   "growth factor <= 1 without interaction"));
    return res;
}

// ---------------------------------------------------------------------------

void SimulateParams::quick() { n = 50; }

StudyResult run_simulate(const Config& cfg, const RunSettings& run) {
    auto p = read_section<SimulateParams>(cfg, "simulate");
    if (run.quick) p.quick();
    StudyResult res;
    write_section(res.config, "simulate", p);
    SimConfig c;
    c.T = p.T;
    c.dt = p.dt;
    c.n = p.n;
    c.d = p.d;
    c.refine = p.refine;
    c.save_times = p.save_times;
    c.initial = law_by_name(p.initial, p.initial_params);
    c.seed = run.seed;
    const SimResult out = simulate_paths(c, kernel_by_name(p.kernel, p.d));
    Table t{"snapshots", {"time", "index"}, {}};
    for (int a = 0; a < p.d; ++a) t.columns.push_back("x" + std::to_string(a));
    for (std::size_t j = 0; j < out.save_times.size(); ++j)
        for (std::size_t i = 0; i < p.n; ++i) {
            std::vector<std::string> row{cell(out.save_times[j]), cell(i)};
            for (int a = 0; a < p.d; ++a) row.push_back(cell(out.snapshots[j][i * p.d + a]));
            t.add(std::move(row));
        }
    res.tables.push_back(t);
    return res;
}

void SolvePdeParams::quick() { N = 480; }

StudyResult run_solve_pde(const Config& cfg, const RunSettings& run) {
    auto p = read_section<SolvePdeParams>(cfg, "solve-pde");
    if (run.quick) p.quick();
    StudyResult res;
    write_section(res.config, "solve-pde", p);
    MVSolverConfig sc;
    sc.L = p.L;
    sc.N = p.N;
    sc.dt = p.dt;
    sc.T = p.T;
    if (p.splitting == "strang") sc.splitting = Splitting::Strang;
    else if (p.splitting == "lie") sc.splitting = Splitting::Lie;
    else throw ConfigError("[solve-pde] splitting must be strang or lie");
    const GridMeasure nu0 = GridMeasure::from_law(law_by_name(p.initial, p.initial_params), p.L, p.N);
    const MVSolution sol = solve_mv(nu0, kernel_by_name(p.kernel, 1), sc);
    Table t{"density", {"time", "x", "density"}, {}};
    Table m{"mass", {"time", "mass", "tail_mass"}, {}};
    for (double ts : p.save_times) {
        const std::size_t k = sol.index_of(ts);
        const GridMeasure& g = sol.states[k];
        for (std::size_t c = 0; c < g.N; ++c) t.add({cell(sol.times[k]), cell(g.center(c)), cell(g.density[c])});
        m.add({cell(sol.times[k]), cell(g.mass()), cell(g.tail_mass)});
    }
    res.tables = {t, m};
    res.notes.push_back("clipped mass " + num(sol.log.clipped_mass) + ", max renormalisation drift per step " +
                        num(sol.log.max_step_drift));
    return res;
}

// ---------------------------------------------------------------------------

namespace {

struct Entry {
    StudyRunner run;
    std::function<void(const Config&)> validate;
};

template <class P>
std::function<void(const Config&)> validator(const std::string& kind) {
    return [kind](const Config& c) { (void)read_section<P>(c, kind); };
}

const std::map<std::string, Entry>& registry() {
    static const std::map<std::string, Entry> r{
        {"lln", {run_lln_convergence, validator<LlnParams>("lln")}},
        {"noise-decay", {run_noise_decay, validator<NoiseDecayParams>("noise-decay")}},
        {"ou-toy", {run_ou_toy, validator<OuToyParams>("ou-toy")}},
        {"gp-ratio", {run_gp_ratio, validator<GpRatioParams>("gp-ratio")}},
        {"sewing-check", {run_sewing_check, validator<SewingParams>("sewing-check")}},
        {"semigroup-bounds", {run_semigroup_bounds, validator<SemigroupParams>("semigroup-bounds")}},
        {"resolvent-decay", {run_resolvent_decay, validator<ResolventParams>("resolvent-decay")}},
        {"mild-residual", {run_mild_residual, validator<MildParams>("mild-residual")}},
        {"stability", {run_stability, validator<StabilityParams>("stability")}},
        {"simulate", {run_simulate, validator<SimulateParams>("simulate")}},
        {"solve-pde", {run_solve_pde, validator<SolvePdeParams>("solve-pde")}},
    };
    return r;
}

}  // namespace

const std::vector<std::string>& study_kinds() {
    static const std::vector<std::string> k{"lln",          "noise-decay",   "ou-toy",    "gp-ratio",
                                            "sewing-check", "semigroup-bounds", "resolvent-decay",
                                            "mild-residual", "stability",     "simulate",  "solve-pde"};
    return k;
}

const std::vector<std::string>& default_manifest() {
    static const std::vector<std::string> k{"semigroup-bounds", "resolvent-decay", "sewing-check",
                                            "mild-residual",    "stability",       "ou-toy",
                                            "gp-ratio",         "noise-decay",     "lln"};
    return k;
}

bool is_study_kind(const std::string& kind) { return registry().count(kind) != 0; }

void validate_config(const Config& cfg) {
    for (const auto& s : cfg.sections()) {
        if (s == "run") {
            (void)read_section<RunSection>(cfg, "run");
            continue;
        }
        const auto it = registry().find(s);
        if (it == registry().end()) throw ConfigError("unknown section [" + s + "]");
        it->second.validate(cfg);
    }
}

StudyResult run_study(const std::string& kind, const Config& cfg, const RunSettings& run) {
    const auto it = registry().find(kind);
    if (it == registry().end()) throw ConfigError("unknown study kind '" + kind + "'");
    const auto t0 = std::chrono::steady_clock::now();
    StudyResult r = it->second.run(cfg, run);
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.kind = kind;
    r.seed = run.seed;
    r.quick = run.quick;
    RunSection rs{kind, run.seed, run.threads, run.quick, run.out};
    write_section(r.config, "run", rs);
    return r;
}

SuiteReport run_all(const std::vector<std::string>& manifest, const Config& cfg, const RunSettings& run,
                    const std::function<void(const StudyResult&)>& on_result) {
    SuiteReport rep;
    for (const auto& kind : manifest) {
        StudyResult r;
        try {
            r = run_study(kind, cfg, run);
        } catch (const std::exception& e) {
            r.kind = kind;
            r.seed = run.seed;
            r.quick = run.quick;
            r.verdicts.push_back(verdict("error", false, 0.0, "study completes", e.what()));
        }
        if (!r.pass())
            for (const auto& v : r.verdicts)
                if (!v.pass) rep.failures.push_back(kind + ": " + v.name + (v.detail.empty() ? "" : " (" + v.detail + ")"));
        if (on_result) on_result(r);
        rep.results.push_back(std::move(r));
    }
    return rep;
}

}  // namespace mvlab
