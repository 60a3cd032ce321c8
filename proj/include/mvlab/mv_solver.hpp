#pragma once
// Grid solver for the McKean-Vlasov equation
//   d/dt nu = (1/2) Laplacian nu - div[nu (Gamma * nu)]
// by operator splitting (semi-Lagrangian transport, spectral heat step) on
// the periodic window [-L, L)^d, the weak-mild identity check, and a Monte
// Carlo Picard oracle for the nonlinear process.

#include "mvlab/grid_measure.hpp"
#include "mvlab/particles.hpp"
#include "mvlab/sobolev.hpp"
#include "mvlab/stats.hpp"
#include "mvlab/test_function.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mvlab {

enum class Splitting { Lie, Strang };

struct MVSolverConfig {
    double L = 12.0;
    std::size_t N = 960;
    int d = 1;
    double dt = 0.01;
    double T = 1.0;
    Splitting splitting = Splitting::Strang;

    /// Throws unless dt * sup|Gamma| <= 4 * spacing.
    void validate(const InteractionKernel& gamma) const;
    std::size_t steps() const;
    double spacing() const { return 2.0 * L / static_cast<double>(N); }
};

/// (Gamma * nu) at every cell centre, cells x d.
struct VelocityField {
    int d = 1;
    double L = 1.0;
    std::size_t N = 0;
    std::vector<double> v;

    double at(std::size_t cell, int axis) const { return v[cell * d + axis]; }
    double sup_abs() const;
};

VelocityField conv_gamma(const GridMeasure& nu, const InteractionKernel& gamma);
/// Exact atom sums evaluated at the cell centres of `layout`.
VelocityField conv_gamma(const EmpiricalMeasureView& mu, const InteractionKernel& gamma,
                         const GridMeasure& layout);
/// Exact atom sums at arbitrary points (count x d).
std::vector<double> conv_gamma_at(const EmpiricalMeasureView& mu, const InteractionKernel& gamma,
                                  std::span<const double> points);

struct StepLog {
    double clipped_mass = 0.0;     // total mass added by clipping negatives
    double max_step_clip = 0.0;
    double renorm_drift = 0.0;     // total |mass change| undone by renormalisation
    double max_step_drift = 0.0;
    std::size_t clip_events = 0;
    std::size_t steps = 0;

    void merge(const StepLog& o);
};

/// exp(t Laplacian / 2) by FFT on the periodic window.
GridMeasure heat_step(const GridMeasure& nu, double t);
/// Conservative semi-Lagrangian transport along a frozen velocity field for
/// time tau (flux form on the cumulative mass, cubic interpolation, RK2
/// departure points).  Axis sweeps in d >= 2.
GridMeasure transport_step(const GridMeasure& nu, const VelocityField& v, double tau, StepLog* log = nullptr);
/// One splitting step.  Throws std::runtime_error when clipping adds more
/// than 1e-6 mass in the step.
GridMeasure mv_step(const GridMeasure& nu, const InteractionKernel& gamma, double dt,
                    Splitting splitting = Splitting::Strang, StepLog* log = nullptr);

struct MVSolution {
    MVSolverConfig cfg;
    std::vector<double> times;            // k * dt, k = 0..steps
    std::vector<GridMeasure> states;
    std::vector<VelocityField> velocities;
    StepLog log;

    /// Index of the stored time closest to t.
    std::size_t index_of(double t) const;
};

MVSolution solve_mv(const GridMeasure& nu0, const InteractionKernel& gamma, const MVSolverConfig& cfg);

/// A measure flow seen through test functions.
class MeasurePath {
public:
    virtual ~MeasurePath() = default;
    virtual int dim() const = 0;
    virtual double horizon() const = 0;
    /// <nu_s, g>
    virtual double pair(double s, const TestFunction& g) const = 0;
    /// <nu_s, grad g . (Gamma * nu_s)>
    virtual double pair_drift(double s, const TestFunction& g) const = 0;
};

/// Grid solution, linear in time between stored steps.
class GridSolutionPath final : public MeasurePath {
public:
    explicit GridSolutionPath(const MVSolution& sol) : sol_(&sol) {}
    int dim() const override { return sol_->cfg.d; }
    double horizon() const override { return sol_->times.back(); }
    double pair(double s, const TestFunction& g) const override;
    double pair_drift(double s, const TestFunction& g) const override;

private:
    const MVSolution* sol_;
};

/// N(mean, (var0 + s) Id): the exact flow when Gamma = 0.
class GaussianHeatPath final : public MeasurePath {
public:
    GaussianHeatPath(int d, double mean, double var0, double T) : d_(d), mean_(mean), var0_(var0), T_(T) {}
    int dim() const override { return d_; }
    double horizon() const override { return T_; }
    double pair(double s, const TestFunction& g) const override;
    double pair_drift(double, const TestFunction&) const override { return 0.0; }

private:
    int d_;
    double mean_, var0_, T_;
};

struct MildResidual {
    double lhs = 0.0;           // <nu_t, h>
    double initial_term = 0.0;  // <nu_0, S_t h>
    double drift_term = 0.0;    // int_0^t <nu_s, grad S_{t-s} h . (Gamma * nu_s)> ds
    double residual = 0.0;
};

/// The drift integral uses s = t - u^2 and composite 20-point Gauss-Legendre
/// panels in u.
MildResidual weak_mild_residual(const MeasurePath& path, const TestFunction& h, double t, std::size_t panels = 32);

struct OracleConfig {
    std::size_t N = 10000;
    double T = 1.0;
    double dt = 0.02;
    std::size_t K = 3;
    double m = 1.6;
    std::uint64_t seed = 1;
    InitialLaw initial = InitialLaw::gaussian(0.0, 1.0);
    std::size_t save_every = 5;  // steps between compared times
    int threads = 1;

    void validate() const;
};

struct OracleResult {
    std::vector<std::size_t> save_steps;
    std::vector<double> save_times;
    std::vector<std::vector<double>> snapshots;  // last iterate, N x d per save time
    std::vector<double> increments;              // sup_t |mu^k - mu^{k-1}|_{-m}, k = 1..K
    double noise_floor = 0.0;                    // |delta_0|_{-m} / sqrt(N)
    bool converged = false;                      // last increment < 2 x noise floor
    bool contracting = false;                    // increments strictly decrease
};

/// Picard iteration with common random numbers: iterate k drifts against the
/// empirical flow of iterate k-1, iterate 0 being the initial sample frozen
/// in time.
OracleResult nonlinear_process_oracle(const InteractionKernel& gamma, const OracleConfig& cfg);

/// sup over the oracle's save times of |mu_t - nu_t|_{-m}.
double oracle_grid_distance(const OracleResult& oracle, const MVSolution& sol, double m, const FrequencyGrid& grid);

/// sup_t |nu_t - nu'_t|_{-m} over all stored steps up to `upto` (inclusive).
double sup_hminus_gap(const MVSolution& a, const MVSolution& b, double m, const FrequencyGrid& grid,
                      std::size_t upto);

struct StabilityRow {
    double eps = 0.0;
    double initial_distance = 0.0;
    double sup_distance = 0.0;
    double factor = 0.0;
    double factor_half = 0.0;   // same run, sup over t <= T/2
};

struct StabilityResult {
    std::vector<StabilityRow> rows;
    SlopeFit response;          // log sup_distance against log eps
    bool linear_ok = false;     // slope within 1 +/- 0.15
    bool doubling_ok = false;   // factor(T) <= 4 factor(T/2)^2 on every row
    bool pass = false;
};

/// Growth factor sup_t |nu_t - nu'_t|_{-m} / |nu_0 - nu'_0|_{-m}; 0 when the
/// initial data coincide.
double gronwall_growth_factor(const GridMeasure& nu0, const GridMeasure& nu0p, const InteractionKernel& gamma,
                              const MVSolverConfig& cfg, double m, const FrequencyGrid& grid);

/// nu0' = (1 - eps) nu0 + eps q for eps on the ladder.
StabilityResult gronwall_stability_check(const GridMeasure& nu0, const GridMeasure& q, const InteractionKernel& gamma,
                                         const MVSolverConfig& cfg, double m, const std::vector<double>& eps_ladder,
                                         const FrequencyGrid& grid);

}  // namespace mvlab
