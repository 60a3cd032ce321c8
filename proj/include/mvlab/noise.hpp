#pragma once
// Noise term of the empirical measure,
//   w^n_t(h) = (1/n) sum_j int_0^t (grad S_{t-s} h)(x^j_s) . dB^j_s,
// computed by left-point Ito sums and by sewing of the second-order germ,
// plus the self-normalised martingale studies.

#include "mvlab/particles.hpp"
#include "mvlab/stats.hpp"
#include "mvlab/test_function.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mvlab {

enum class NoiseMethod { ItoSum, Sewing };

/// Per-particle sum of squared base increments within each visible step
/// (steps x n, d = 1).  Needed for the per-step iterated integral
/// BB_k = (dB_k^2 - Q_k) / 2.
std::vector<double> step_quadratic_variation(const IncrementRecord& rec);

/// Single value, any d, through the rough-path objects (slow, reference).
double noise_term(const SimResult& run, const TestFunction& h, std::size_t t_index, NoiseMethod method);

struct NoiseSeries {
    std::vector<std::size_t> t_index;
    std::vector<double> ito;          // Ito sum on the visible grid
    std::vector<double> sewing;       // germ sum on the visible grid
    std::vector<double> ito_half;     // same, nodes every second step
    std::vector<double> sewing_half;
    std::size_t disagreements = 0;    // |sew - ito| > 5 x self-convergence gap
};

/// d = 1 vectorised evaluation at the requested (even) grid indices.  The
/// run must have stored its path.
NoiseSeries noise_term_series(const SimResult& run, const TestFunction& h,
                              const std::vector<std::size_t>& t_indices, bool with_sewing = true);

struct NoiseStudyConfig {
    std::vector<std::size_t> ladder{64, 256, 1024, 4096};
    std::size_t replicas = 50;
    TestFunction h = TestFunction::bump(1.0, {0.0}, 1.0);
    double T = 1.0;
    double dt = 1.0 / 128.0;
    std::size_t save_count = 64;
    double m = 1.6;
    double alpha = 0.4;
    int refine = 16;
    std::uint64_t seed = 1;
    InitialLaw initial = InitialLaw::gaussian(0.0, 1.0);
    bool interacting = true;  // tanh kernel, else zero kernel
    int threads = 1;

    void validate() const;
};

struct NoiseDecayRow {
    std::size_t n = 0;
    double estimate = 0.0;   // E sup_t |w|^2 (Ito route)
    double se = 0.0;
    double c_hat = 0.0;      // n * estimate / |h|_m^2
    double sewing_estimate = 0.0;
    double rms_method_gap = 0.0;   // RMS(sew - ito)
    double rms_mesh_gap = 0.0;     // RMS(ito - ito_half)
    double max_center_z = 0.0;     // max_t |mean w_t| / se
    std::size_t disagreements = 0;
};

struct NoiseDecayResult {
    std::vector<NoiseDecayRow> rows;
    SlopeFit fit;
    double h_norm_sq = 0.0;
    bool methods_consistent = false;   // RMS(sew - ito) < 3 RMS(mesh gap) at every n
    bool pass = false;                 // slope within -1 +/- 0.25
};

NoiseDecayResult noise_decay_study(const NoiseStudyConfig& cfg);

struct UniformProbeRow {
    std::size_t n = 0;
    double estimate = 0.0;  // E sup_t max_h |w^n_t(h)| / |h|_m
    double se = 0.0;
};

struct UniformProbeResult {
    std::vector<UniformProbeRow> rows;
    SlopeFit fit;
    std::vector<double> h_norms;
};

/// Dictionary of ten bumps, fixed by the seed.
std::vector<TestFunction> uniform_probe_dictionary();
UniformProbeResult uniform_h_probe(const NoiseStudyConfig& cfg, const std::vector<TestFunction>& dictionary);

struct OuToyRow {
    std::size_t n = 0;
    double estimate = 0.0;   // E sup_t v_t^2
    double se = 0.0;
    double unit_bound = 0.0; // log(1 + 2aT) / (2 n a)
    double ratio = 0.0;      // estimate / unit_bound
};

struct OuToyResult {
    std::vector<OuToyRow> rows;
    SlopeFit fit;
    double c_hat = 0.0;       // max ratio: single constant covering the ladder
    double ratio_spread = 0.0;  // max ratio / min ratio
    bool pass = false;        // slope -1 +/- 0.2 and spread <= 1.5
};

/// v_t = (1/n) sum_j X^j_t with X^j exact OU(a) transitions from 0.
OuToyResult ou_toy_study(double a, const std::vector<std::size_t>& ladder, double T, std::size_t replicas,
                         std::size_t steps, std::uint64_t seed, int threads = 1);

/// Terminal values X^j_T of the exact OU recursion (for variance checks).
std::vector<double> ou_terminal_samples(double a, double T, std::size_t steps, std::size_t count,
                                        std::uint64_t seed);

enum class MartingaleKind { Zero, Brownian, OuDerived };
std::string to_string(MartingaleKind k);

struct GpRow {
    double T = 0.0;
    double numerator = 0.0;     // E sup_t M_t^2 / (1 + <M>_t)
    double numerator_se = 0.0;
    double denominator = 0.0;   // E log(1 + log(1 + <M>_T))
    double ratio = 0.0;
};

struct GpResult {
    MartingaleKind kind = MartingaleKind::Brownian;
    std::vector<GpRow> rows;
    SlopeFit trend;            // log ratio against log T (scale free)
    SlopeFit absolute_trend;   // ratio against log T
    double spread = 0.0;       // max ratio / min ratio
    bool pass = false;         // trend slope <= 0.1 and spread <= 10
};

GpResult gp_ratio_study(MartingaleKind kind, const std::vector<double>& T_ladder, std::size_t replicas,
                        double steps_per_unit_time, std::uint64_t seed, double a = 1.0, std::size_t n = 64,
                        int threads = 1);

struct OuMartingaleCheck {
    double estimate = 0.0;  // E sup_t e^{-2at} M_t^2
    double se = 0.0;
    double c_prime = 0.0;   // estimate / log(1 + 2aT)
};

OuMartingaleCheck ou_martingale_check(double a, double T, std::size_t n, std::size_t replicas,
                                      std::size_t steps, std::uint64_t seed, int threads = 1);

}  // namespace mvlab
