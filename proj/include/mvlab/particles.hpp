#pragma once
// Weakly interacting particle system
//   dx^i = (1/n) sum_j Gamma(x^i, x^j) dt + dB^i
// advanced by Euler-Maruyama with counter-based Brownian drivers.

#include "mvlab/rng.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mvlab {

enum class KernelKind { Zero, Tanh, Generic };

struct InteractionKernel {
    int d = 1;
    /// out[0..d) = Gamma(x, y).
    std::function<void(const double* x, const double* y, double* out)> eval;
    double lip_bound = 0.0;
    double sup_bound = 0.0;
    std::string description;
    KernelKind kind = KernelKind::Generic;
    /// When set, Gamma(x, y)_a = axis_profile(y_a - x_a) on every axis.  Lets
    /// the grid solver use correlations instead of a dense double sum.
    std::function<double(double)> axis_profile;
    /// Regularity hypothesis (H^m in y, W^{m,inf} in x) asserted by the
    /// constructor.  Recorded, not verified.
    bool hm_regular = false;

    std::vector<double> operator()(const std::vector<double>& x, const std::vector<double>& y) const;
};

InteractionKernel zero_kernel(int d);
/// Componentwise tanh(y_a - x_a): sup_bound sqrt(d), lip_bound 1.
InteractionKernel tanh_kernel(int d);
InteractionKernel custom_kernel(int d, std::function<void(const double*, const double*, double*)> eval,
                                double lip_bound, double sup_bound, std::string description);

/// Brownian increments defined on a base mesh of width base_dt.  Visible
/// steps are sums of `refine` consecutive base increments, so one
/// realization can be viewed at dt, dt/2, ... as long as base_dt is fixed.
struct BrownianDriver {
    std::uint64_t seed = 0;
    int d = 1;
    double base_dt = 0.0;
    /// Particle i draws from stream stream_map[i]; identity when empty.
    std::vector<std::uint32_t> stream_map;

    std::uint32_t stream_of(std::size_t i) const;
    double base_increment(std::size_t i, std::uint64_t base_step, int axis) const;
    /// `count` consecutive base increments starting at `first`, row-major
    /// (count x d).
    void base_increments(std::size_t i, std::uint64_t first, int count, double* out) const;
    /// Increment over visible step `step` when each step spans `refine` base
    /// steps; out has d entries.
    void step_increment(std::size_t i, std::uint64_t step, int refine, double* out) const;
};

struct InitialLaw {
    enum class Kind { DeterministicList, IidGaussian, IidCauchy, IidTwoCluster, CustomSampler };
    Kind kind = Kind::IidGaussian;
    /// Gaussian: {mean, sd}.  Cauchy: {location, scale}.  Two-cluster:
    /// {left center, right center, sd}, equal weights.
    std::vector<double> params{0.0, 1.0};
    /// DeterministicList: n*d coordinates, row-major.
    std::vector<double> points;
    /// CustomSampler: writes d coordinates for particle i.
    std::function<void(std::size_t i, const CounterRng& rng, double* out)> sampler;

    static InitialLaw gaussian(double mean, double sd);
    static InitialLaw cauchy(double location, double scale);
    static InitialLaw two_cluster(double left, double right, double sd);
    static InitialLaw list(std::vector<double> points);
    static InitialLaw custom(std::function<void(std::size_t, const CounterRng&, double*)> f);
};

std::string to_string(InitialLaw::Kind k);

/// Deterministic d=1 placement at the mid-quantiles (i + 1/2)/n of the
/// mixture (1/2)N(left, sd^2) + (1/2)N(right, sd^2).
std::vector<double> two_cluster_quantiles(std::size_t n, double left, double right, double sd);

/// Initial positions (n x d); particle i only uses stream i, so ladders of
/// iid laws are nested.
std::vector<double> sample_initial(const InitialLaw& law, std::size_t n, int d, std::uint64_t seed);

struct ParticleEnsemble {
    std::size_t n = 0;
    int d = 1;
    std::vector<double> positions;  // n x d, row-major
    double t = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> particle_streams;

    const double* particle(std::size_t i) const { return positions.data() + i * d; }
};

using ExternalDrift = std::function<void(double t, const double* x, double* out)>;

struct SimConfig {
    double T = 1.0;
    double dt = 0.01;
    std::size_t n = 100;
    int d = 1;
    std::vector<double> save_times;
    InitialLaw initial;
    std::uint64_t seed = 0;
    /// Base increments per visible step.
    int refine = 1;
    /// Keep positions at every step (needed by the noise and rough-path code).
    bool store_path = false;
    /// Optional additive drift F(t, x).
    ExternalDrift external_drift;

    /// Throws std::invalid_argument on inconsistent settings.
    void validate() const;
    std::size_t steps() const;
};

/// Brownian increments actually used by a run.
struct IncrementRecord {
    std::size_t n = 0;
    int d = 1;
    std::size_t steps = 0;
    double dt = 0.0;
    int refine = 1;
    BrownianDriver driver;
    std::vector<double> increments;  // steps x n x d

    const double* step(std::size_t k) const { return increments.data() + k * n * d; }
    /// The `refine` base increments composing visible step k of particle i.
    std::vector<double> sub_increments(std::size_t i, std::size_t k) const;

    void write_binary(std::ostream& os) const;
    static IncrementRecord read_binary(std::istream& is);
};

struct SimResult {
    std::vector<double> save_times;
    std::vector<std::vector<double>> snapshots;  // one n x d block per save time
    IncrementRecord record;
    std::vector<double> path;                    // (steps+1) x n x d when stored
    std::vector<double> initial;

    const double* path_at(std::size_t k) const { return path.data() + k * record.n * record.d; }
};

ParticleEnsemble make_ensemble(const SimConfig& cfg, const std::vector<std::uint32_t>& stream_map = {});

std::vector<double> mean_field_drift(const ParticleEnsemble& ens, const InteractionKernel& gamma,
                                     std::size_t i);
/// Drift of every particle, n x d.
void mean_field_drifts(const ParticleEnsemble& ens, const InteractionKernel& gamma,
                       std::vector<double>& out);

ParticleEnsemble em_step(const ParticleEnsemble& ens, const InteractionKernel& gamma, double dt,
                         const std::vector<double>& increments,
                         const ExternalDrift& external = {});

SimResult simulate_paths(const SimConfig& cfg, const InteractionKernel& gamma,
                         const std::vector<std::uint32_t>& stream_map = {});

/// Re-runs em_step over the recorded increments from the recorded initial
/// positions; returns the terminal positions.
std::vector<double> replay(const SimResult& run, const InteractionKernel& gamma,
                           const ExternalDrift& external = {});

/// time,index,x0[,x1...] in (time, index) order.
void write_trajectory_csv(std::ostream& os, const SimResult& run);

}  // namespace mvlab
