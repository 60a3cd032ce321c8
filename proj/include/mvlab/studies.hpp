#pragma once
// Experiment registry: every study reads its parameter block from a Config
// section named after the study kind and returns a StudyResult with tables,
// fitted series and verdicts.

#include "mvlab/config.hpp"
#include "mvlab/stats.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mvlab {

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row);
};

std::string cell(double v);
std::string cell(std::size_t v);
std::string cell(const std::string& v);
inline std::string cell(const char* v) { return v; }
inline std::string cell(int v) { return std::to_string(v); }
inline std::string cell(bool v) { return v ? "true" : "false"; }

struct Series {
    std::string name;
    std::vector<double> x, y, yerr;
};

struct FitBlock {
    std::string series;
    SlopeFit fit;
};

struct Verdict {
    std::string name;
    bool pass = false;
    double value = 0.0;
    std::string criterion;  // human-readable tolerance
    std::string detail;
};

struct StudyResult {
    std::string kind;
    std::uint64_t seed = 0;
    bool quick = false;
    bool exploratory = false;   // verdicts are reported, not enforced
    Config config;              // resolved [run] and kind sections
    std::vector<Table> tables;
    std::vector<Series> series;
    std::vector<FitBlock> fits;
    std::vector<Verdict> verdicts;
    std::vector<std::string> notes;
    double wall_seconds = 0.0;

    bool pass() const;
    const Verdict* verdict(const std::string& name) const;
};

struct RunSettings {
    std::uint64_t seed = 1;
    int threads = 1;
    bool quick = false;
    std::string out = "mvlab_out";
};

/// Reads the [run] section (kind, seed, threads, quick, out).
struct RunSection {
    std::string kind;
    std::uint64_t seed = 1;
    int threads = 1;
    bool quick = false;
    std::string out = "mvlab_out";

    template <class B>
    void fields(B& b) {
        b("kind", kind);
        b("seed", seed);
        b("threads", threads);
        b("quick", quick);
        b("out", out);
    }
};

// ---- per-study parameter blocks -------------------------------------------

struct LlnParams {
    std::vector<std::size_t> ladder{100, 400, 1600, 6400};
    std::size_t replicas = 30;
    double T = 1.0;
    double dt = 0.01;
    std::size_t save_count = 10;
    double m = 1.6;
    std::string kernel = "tanh";
    std::vector<std::string> tracks{"gaussian", "two-cluster", "cauchy"};
    double gaussian_L = 12.0, gaussian_spacing = 0.025;
    double cluster_L = 14.0, cluster_spacing = 0.025, cluster_center = 3.0, cluster_sd = 0.5;
    double cauchy_L = 100.0, cauchy_spacing = 0.05, cauchy_scale = 1.0;
    bool oracle_check = true;
    std::size_t oracle_n = 10000;
    std::size_t oracle_iterations = 3;
    double oracle_dt = 0.02;
    double slope_low = -0.65, slope_high = -0.35;
    double cluster_slope_max = -0.25;

    template <class B>
    void fields(B& b) {
        b("ladder", ladder);
        b("replicas", replicas);
        b("T", T);
        b("dt", dt);
        b("save_count", save_count);
        b("m", m);
        b("kernel", kernel);
        b("tracks", tracks);
        b("gaussian_L", gaussian_L);
        b("gaussian_spacing", gaussian_spacing);
        b("cluster_L", cluster_L);
        b("cluster_spacing", cluster_spacing);
        b("cluster_center", cluster_center);
        b("cluster_sd", cluster_sd);
        b("cauchy_L", cauchy_L);
        b("cauchy_spacing", cauchy_spacing);
        b("cauchy_scale", cauchy_scale);
        b("oracle_check", oracle_check);
        b("oracle_n", oracle_n);
        b("oracle_iterations", oracle_iterations);
        b("oracle_dt", oracle_dt);
        b("slope_low", slope_low);
        b("slope_high", slope_high);
        b("cluster_slope_max", cluster_slope_max);
    }
    void quick();
};

struct NoiseDecayParams {
    std::vector<std::size_t> ladder{64, 256, 1024, 4096};
    std::size_t replicas = 50;
    double T = 1.0;
    double dt = 1.0 / 128.0;
    std::size_t save_count = 64;
    int refine = 16;
    double m = 1.6;
    double alpha = 0.4;
    double h_amplitude = 1.0, h_center = 0.0, h_width = 1.0;
    bool interacting = true;
    double slope_tolerance = 0.25;
    bool uniform_probe = true;
    std::vector<std::size_t> probe_ladder{64, 256, 1024};
    std::size_t probe_replicas = 30;

    template <class B>
    void fields(B& b) {
        b("ladder", ladder);
        b("replicas", replicas);
        b("T", T);
        b("dt", dt);
        b("save_count", save_count);
        b("refine", refine);
        b("m", m);
        b("alpha", alpha);
        b("h_amplitude", h_amplitude);
        b("h_center", h_center);
        b("h_width", h_width);
        b("interacting", interacting);
        b("slope_tolerance", slope_tolerance);
        b("uniform_probe", uniform_probe);
        b("probe_ladder", probe_ladder);
        b("probe_replicas", probe_replicas);
    }
    void quick();
};

struct OuToyParams {
    double a = 1.0;
    double T = 1.0;
    std::vector<std::size_t> ladder{64, 256, 1024};
    std::size_t replicas = 2000;
    std::size_t steps = 128;
    double slope_tolerance = 0.2;
    double max_spread = 1.5;
    std::size_t variance_samples = 10000;

    template <class B>
    void fields(B& b) {
        b("a", a);
        b("T", T);
        b("ladder", ladder);
        b("replicas", replicas);
        b("steps", steps);
        b("slope_tolerance", slope_tolerance);
        b("max_spread", max_spread);
        b("variance_samples", variance_samples);
    }
    void quick();
};

struct GpRatioParams {
    std::vector<double> T_ladder{1.0, 4.0, 16.0, 64.0};
    std::size_t replicas = 1000;
    double steps_per_unit = 64.0;
    double a = 1.0;
    std::size_t n = 64;
    std::vector<std::string> martingales{"zero", "brownian", "ou-derived"};
    double max_trend = 0.1;
    double max_spread = 10.0;

    template <class B>
    void fields(B& b) {
        b("T_ladder", T_ladder);
        b("replicas", replicas);
        b("steps_per_unit", steps_per_unit);
        b("a", a);
        b("n", n);
        b("martingales", martingales);
        b("max_trend", max_trend);
        b("max_spread", max_spread);
    }
    void quick();
};

struct SewingParams {
    std::size_t realizations = 200;
    double T = 1.0;
    std::size_t frozen_steps = 4096;
    int frozen_refine = 16;
    double frozen_tolerance = 1e-3;
    double frozen_x0 = 0.5;
    std::size_t decay_steps = 1024;
    int decay_refine = 4;
    int levels = 6;
    double decay_threshold = 1.1;
    double alpha = 0.4;
    double h_amplitude = 1.0, h_center = 0.0, h_width = 1.0;
    double identity_tolerance = 1e-10;

    template <class B>
    void fields(B& b) {
        b("realizations", realizations);
        b("T", T);
        b("frozen_steps", frozen_steps);
        b("frozen_refine", frozen_refine);
        b("frozen_tolerance", frozen_tolerance);
        b("frozen_x0", frozen_x0);
        b("decay_steps", decay_steps);
        b("decay_refine", decay_refine);
        b("levels", levels);
        b("decay_threshold", decay_threshold);
        b("alpha", alpha);
        b("h_amplitude", h_amplitude);
        b("h_center", h_center);
        b("h_width", h_width);
        b("identity_tolerance", identity_tolerance);
    }
    void quick();
};

struct SemigroupParams {
    std::size_t functions = 20;
    std::size_t times = 30;
    double t_min = 1e-4;
    double t_max = 10.0;
    double density = 50.0;
    double law_tolerance = 1e-10;

    template <class B>
    void fields(B& b) {
        b("functions", functions);
        b("times", times);
        b("t_min", t_min);
        b("t_max", t_max);
        b("density", density);
        b("law_tolerance", law_tolerance);
    }
    void quick();
};

struct ResolventParams {
    std::vector<double> eps{0.1, 0.25};
    double eta = 0.75 * 3.14159265358979323846;
    double m = 1.6;
    std::vector<double> rho_ladder{1.0, 4.0, 16.0, 64.0, 256.0};
    double h_amplitude = 1.0, h_center = 0.0, h_width = 1.0;
    double slope_margin = 0.1;

    template <class B>
    void fields(B& b) {
        b("eps", eps);
        b("eta", eta);
        b("m", m);
        b("rho_ladder", rho_ladder);
        b("h_amplitude", h_amplitude);
        b("h_center", h_center);
        b("h_width", h_width);
        b("slope_margin", slope_margin);
    }
    void quick() {}
};

struct MildParams {
    double L = 12.0;
    std::size_t N = 960;
    double dt = 0.01;
    double T = 1.0;
    std::vector<double> check_times{0.5, 1.0};
    std::size_t panels = 32;
    double tolerance = 5e-3;
    double heat_tolerance = 1e-6;

    template <class B>
    void fields(B& b) {
        b("L", L);
        b("N", N);
        b("dt", dt);
        b("T", T);
        b("check_times", check_times);
        b("panels", panels);
        b("tolerance", tolerance);
        b("heat_tolerance", heat_tolerance);
    }
    void quick();
};

struct StabilityParams {
    double L = 12.0;
    std::size_t N = 960;
    double dt = 0.01;
    double T = 1.0;
    double m = 1.6;
    std::vector<double> eps_ladder{1e-2, 1e-3, 1e-4};
    double perturb_mean = 1.0, perturb_sd = 0.5;
    double slope_tolerance = 0.15;

    template <class B>
    void fields(B& b) {
        b("L", L);
        b("N", N);
        b("dt", dt);
        b("T", T);
        b("m", m);
        b("eps_ladder", eps_ladder);
        b("perturb_mean", perturb_mean);
        b("perturb_sd", perturb_sd);
        b("slope_tolerance", slope_tolerance);
    }
    void quick();
};

struct SimulateParams {
    std::size_t n = 100;
    int d = 1;
    double T = 1.0;
    double dt = 0.01;
    int refine = 1;
    std::string kernel = "tanh";
    std::string initial = "gaussian";
    std::vector<double> initial_params{0.0, 1.0};
    std::vector<double> save_times{0.25, 0.5, 0.75, 1.0};

    template <class B>
    void fields(B& b) {
        b("n", n);
        b("d", d);
        b("T", T);
        b("dt", dt);
        b("refine", refine);
        b("kernel", kernel);
        b("initial", initial);
        b("initial_params", initial_params);
        b("save_times", save_times);
    }
    void quick();
};

struct SolvePdeParams {
    double L = 12.0;
    std::size_t N = 960;
    double dt = 0.01;
    double T = 1.0;
    std::string kernel = "tanh";
    std::string initial = "gaussian";
    std::vector<double> initial_params{0.0, 1.0};
    std::vector<double> save_times{0.25, 0.5, 0.75, 1.0};
    std::string splitting = "strang";

    template <class B>
    void fields(B& b) {
        b("L", L);
        b("N", N);
        b("dt", dt);
        b("T", T);
        b("kernel", kernel);
        b("initial", initial);
        b("initial_params", initial_params);
        b("save_times", save_times);
        b("splitting", splitting);
    }
    void quick();
};

// ---- registry --------------------------------------------------------------

using StudyRunner = std::function<StudyResult(const Config&, const RunSettings&)>;

/// Registered kinds in default-manifest order.
const std::vector<std::string>& study_kinds();
/// Kinds run by `all` (studies with verdicts).
const std::vector<std::string>& default_manifest();
bool is_study_kind(const std::string& kind);

/// Runs one study.  The config may hold any sections; only [kind] is read
/// (strictly).  Timing and the resolved config are filled in.
StudyResult run_study(const std::string& kind, const Config& cfg, const RunSettings& run);

StudyResult run_lln_convergence(const Config& cfg, const RunSettings& run);
StudyResult run_noise_decay(const Config& cfg, const RunSettings& run);
StudyResult run_ou_toy(const Config& cfg, const RunSettings& run);
StudyResult run_gp_ratio(const Config& cfg, const RunSettings& run);
StudyResult run_sewing_check(const Config& cfg, const RunSettings& run);
StudyResult run_semigroup_bounds(const Config& cfg, const RunSettings& run);
StudyResult run_resolvent_decay(const Config& cfg, const RunSettings& run);
StudyResult run_mild_residual(const Config& cfg, const RunSettings& run);
StudyResult run_stability(const Config& cfg, const RunSettings& run);
StudyResult run_simulate(const Config& cfg, const RunSettings& run);
StudyResult run_solve_pde(const Config& cfg, const RunSettings& run);

struct SuiteReport {
    std::vector<StudyResult> results;
    std::vector<std::string> failures;   // "kind: verdict" or "kind: error ..."
    bool pass() const { return failures.empty(); }
};

/// Runs every kind in `manifest`, collecting failures without stopping.
/// `on_result` (optional) sees each result as it completes.
SuiteReport run_all(const std::vector<std::string>& manifest, const Config& cfg, const RunSettings& run,
                    const std::function<void(const StudyResult&)>& on_result = {});

/// Validates every section of a config against the registry without running
/// anything: unknown sections or keys throw ConfigError.
void validate_config(const Config& cfg);

}  // namespace mvlab
