#pragma once
// Ito rough-path lift of a Brownian grid path and the sewing construction of
//   int_0^t (grad S_{t-u} f)(x_u) . dB_u
// with germ [A f]_{ts} = grad S_{t-s} f(x_s) . B_{ts} + D grad S_{t-s} f(x_s) : BB_{ts}.
//
// Conventions: BB^{ij}_{ts} = int_s^t (B^i_r - B^i_s) dB^j_r (Ito), Chen:
// BB_{ts} = BB_{us} + BB_{tu} + B_{us} (x) B_{tu}.  Grid times are indices.

#include "mvlab/particles.hpp"
#include "mvlab/test_function.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace mvlab {

class RoughLift {
public:
    RoughLift() = default;
    /// `sub` holds steps * refine * d base increments (row-major); the
    /// per-step BB is the Ito sum over each step's `refine` sub-increments.
    static RoughLift from_subincrements(int d, double dt, int refine, std::span<const double> sub,
                                        double alpha = 0.4);

    int dim() const { return d_; }
    std::size_t steps() const { return steps_; }
    double dt() const { return dt_; }
    double alpha() const { return alpha_; }
    double time(std::size_t k) const { return static_cast<double>(k) * dt_; }

    /// B_{ts}, d entries.
    void increment(std::size_t s, std::size_t t, double* out) const;
    /// BB_{ts}, d x d row-major.
    void iterated(std::size_t s, std::size_t t, double* out) const;
    double increment1(std::size_t s, std::size_t t) const;  // d = 1 shortcut
    double iterated1(std::size_t s, std::size_t t) const;

    /// Max |BB_{ts} - BB_{us} - BB_{tu} - B_{us} (x) B_{tu}| over entries.
    double chen_residual(std::size_t s, std::size_t u, std::size_t t) const;

private:
    int d_ = 1;
    std::size_t steps_ = 0;
    double dt_ = 0.0;
    double alpha_ = 0.4;
    std::vector<double> b0_;   // (steps+1) x d, B_{k0}
    std::vector<double> bb0_;  // (steps+1) x d x d, BB_{k0}
};

/// Lift of particle i's driver on the record's visible grid.
RoughLift ito_lift(const IncrementRecord& rec, std::size_t particle, double alpha = 0.4);

/// Path x on the lift's grid with |x_{ts} - B_{ts}| <= drift_bound |t - s|.
/// A frozen path (follows_driver = false) has no Gubinelli derivative, so
/// the germ drops its BB term.
struct ControlledPath {
    int d = 1;
    std::vector<double> x;  // (steps+1) x d
    const RoughLift* driver = nullptr;
    double drift_bound = 0.0;
    bool follows_driver = true;

    static ControlledPath frozen(const RoughLift& lift, std::vector<double> x0);
    /// Extracts particle i from a stored simulation path.
    static ControlledPath from_simulation(const SimResult& run, std::size_t particle, const RoughLift& lift,
                                          double drift_bound);

    const double* at(std::size_t k) const { return x.data() + k * d; }
    /// max over grid pairs of |x_{ts} - B_{ts}| - drift_bound |t - s| (<= 0 when
    /// the control bound holds).
    double control_defect() const;
};

/// Heat semigroup viewed on grid indices: S_{ts} = exp(rate (t - s) dt Delta/2).
/// rate = 0 freezes it to the identity.
struct HeatFamily {
    double dt = 0.0;
    double rate = 1.0;

    TestFunction apply(const TestFunction& f, std::size_t t, std::size_t s) const;
};

using OneIncrement = std::function<double(const TestFunction& f, std::size_t t)>;
using TwoIncrement = std::function<double(const TestFunction& f, std::size_t t, std::size_t s)>;
using ThreeIncrement =
    std::function<double(const TestFunction& f, std::size_t t, std::size_t u, std::size_t s)>;

/// [dhat q f]_{ts} = [q f]_t - [q S_{ts} f]_s.
TwoIncrement delta_hat_1(OneIncrement q, HeatFamily S);
/// [dhat A f]_{tus} = [A f]_{ts} - [A f]_{tu} - [A S_{tu} f]_{us}.
ThreeIncrement delta_hat_2(TwoIncrement A, HeatFamily S);
/// Classical coboundaries (no semigroup twist).
TwoIncrement delta_1(OneIncrement q);
ThreeIncrement delta_2(TwoIncrement A);

class GermA {
public:
    GermA(TestFunction f, const ControlledPath& x, const RoughLift& lift);

    const TestFunction& f() const { return f_; }
    const RoughLift& lift() const { return *lift_; }
    const ControlledPath& path() const { return *x_; }

    /// [A S_{(lag - (t - s)) dt} f]_{ts}: the germ evaluated with total heat
    /// time lag * dt.  lag = t - s gives [A f]_{ts}.
    double eval(std::size_t t, std::size_t s, std::size_t lag) const;
    double operator()(std::size_t t, std::size_t s) const { return eval(t, s, t - s); }

    /// [dhat A f]_{tus} from cached heated mixtures.
    double delta_hat(std::size_t t, std::size_t u, std::size_t s) const;

    struct Split {
        double a[4] = {0.0, 0.0, 0.0, 0.0};
        double sum() const { return a[0] + a[1] + a[2] + a[3]; }
    };
    /// Four-term decomposition of [dhat A f]_{tus}.
    Split split(std::size_t t, std::size_t u, std::size_t s) const;

    /// Generic view for delta_hat_2 checks: g replaces f.
    TwoIncrement as_two_increment() const;

private:
    const TestFunction& heated(std::size_t lag) const;
    void grad_hess(std::size_t lag, const double* x, double* g, double* h) const;

    TestFunction f_;
    const ControlledPath* x_;
    const RoughLift* lift_;
    std::vector<TestFunction> cache_;  // S_{lag dt} f for lag = 0..steps
};

struct SewingResult {
    double value = 0.0;                       // finest level
    std::vector<std::size_t> intervals;       // per level, coarse -> fine
    std::vector<double> sums;                 // partial sums per level
    std::vector<double> diffs;                // sums[l+1] - sums[l]
};

/// Sum over [v, u] in the partition of [A S_{t u} f]_{u v} (t = last node).
double partition_sum(const GermA& A, const std::vector<std::size_t>& nodes);

/// Dyadic partial sums of [0, t_index] with `levels` levels, the finest using
/// every grid step.  t_index must be divisible by 2^(levels-1).
SewingResult sewing_integral(const GermA& A, std::size_t t_index, int levels);

/// Left-point Ito Riemann sum with nodes every `stride` grid steps.
double ito_riemann_sum(const GermA& A, std::size_t t_index, std::size_t stride = 1);

struct CauchyDecay {
    std::vector<double> rms_diff;   // per level difference, pooled over runs
    std::vector<double> ratios;     // rms_diff[l] / rms_diff[l+1]
    double mean_ratio = 0.0;
    double min_ratio = 0.0;
    bool pass = false;              // mean ratio >= 1.1
    std::size_t worst_level = 0;
};

CauchyDecay pooled_cauchy_decay(const std::vector<SewingResult>& runs, double threshold = 1.1);

struct HolderReport {
    double germ_norm = 0.0;          // sup |A_{ts}| / |t - s|^alpha
    double delta_norm = 0.0;         // sup |dhat A_{tus}| / |t - s|^{3 alpha}
    double part_norms[4] = {0, 0, 0, 0};  // factored norms of A^1..A^4
    double split_residual = 0.0;     // max |sum of parts - dhat A|
    std::size_t pairs = 0;
    std::size_t triples = 0;
};

/// Discrete Holder-type sup estimates over grid pairs and triples (triples
/// sampled when more than max_triples exist).
HolderReport germ_holder_norms(const GermA& A, std::size_t max_triples = 1000000,
                               std::uint64_t seed = 1);

}  // namespace mvlab
