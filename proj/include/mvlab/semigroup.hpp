#pragma once
// Heat semigroup S_t = exp(t Delta / 2) on Gaussian mixtures (closed form),
// gradient bounds and the resolvent R(lambda, Delta/2).

#include "mvlab/sobolev.hpp"
#include "mvlab/test_function.hpp"

#include <complex>
#include <string>
#include <vector>

namespace mvlab {

/// Bump (a, c, s) -> (a (s^2 / (s^2 + t))^{d/2}, c, sqrt(s^2 + t)).
TestFunction apply_heat(const TestFunction& h, double t);

/// Closed-form derivatives of S_t h.
class GradientField {
public:
    GradientField(const TestFunction& h, double t) : heated_(apply_heat(h, t)), t_(t) {}

    int dim() const { return heated_.dim(); }
    double time() const { return t_; }
    const TestFunction& heated() const { return heated_; }
    void gradient(const double* x, double* g) const { heated_.gradient(x, g); }
    /// D grad S_t h, i.e. the Hessian (row-major d x d).
    void jacobian(const double* x, double* j) const { heated_.hessian(x, j); }
    void third(const double* x, double* t) const { heated_.third(x, t); }

private:
    TestFunction heated_;
    double t_;
};

GradientField grad_heat(const TestFunction& h, double t);

struct GradientBoundRow {
    std::size_t function = 0;
    double t = 0.0;
    double lhs = 0.0;          // sup_x |grad (S_t - Id) h|
    double bound_sqrt = 0.0;   // sqrt(t) |D^2 h|_inf
    double bound_linear = 0.0; // (t/2) |D^3 h|_inf
    double witness_x = 0.0;    // location of the sup
};

struct GradientBoundReport {
    std::vector<GradientBoundRow> rows;
    double worst_ratio_sqrt = 0.0;
    double worst_ratio_linear = 0.0;
    std::size_t violations = 0;
    std::string first_violation;
};

/// Checks |grad(S_t - Id)h|_inf <= sqrt(t)|D^2 h|_inf and <= (t/2)|D^3 h|_inf
/// for d = 1, sampling x densely (spacing min width / `density`) and
/// polishing the sup of each side.
GradientBoundReport check_gradient_identity_bounds(const std::vector<TestFunction>& library,
                                                   const std::vector<double>& times,
                                                   double density = 50.0);

struct ResolventPoint {
    double rho = 1.0;
    double eta = 0.75 * 3.141592653589793;
    double eps = 0.1;

    std::complex<double> lambda() const { return std::polar(rho, eta); }
};

/// (sup_{x >= 0} (1 + x) / |e^{i eta} + x|)^2.
double resolvent_constant(double eta);

/// Multiplier of grad R(lambda, Delta/2) along axis a: i xi_a / (lambda + |xi|^2 / 2).
std::complex<double> resolvent_gradient_multiplier(std::complex<double> lambda, const double* xi,
                                                   int d, int axis);

struct ResolventGradientField {
    const FrequencyGrid* grid = nullptr;
    std::vector<SpectralField> components;  // one per axis
    bool truncation_alarm = false;

    /// Inverse transform at x (quadrature over the grid).
    std::vector<double> evaluate(const double* x) const;
};

ResolventGradientField apply_resolvent_gradient(const TestFunction& h, const ResolventPoint& p,
                                                const FrequencyGrid& grid);

/// int (1+|xi|^2)^s sum_a |multiplier_a F h|^2 on the grid, square-rooted.
double resolvent_gradient_norm(const TestFunction& h, const ResolventPoint& p, double s,
                               const FrequencyGrid& grid);

/// max_xi |(lambda + |xi|^2/2) R(lambda) F h - F h| on the grid.
double resolvent_identity_residual(const TestFunction& h, std::complex<double> lambda,
                                   const FrequencyGrid& grid);

struct ResolventDecayResult {
    std::vector<double> rho;
    std::vector<double> norm_sq;  // |grad R h|^2_{m - 2 eps}
    std::vector<double> ratio;    // norm_sq / (4 C_eta |h|_m^2 / (2 rho)^{1 + 2 eps})
    double slope = 0.0;
    double target = 0.0;          // -(1 + 2 eps) + 0.1
    double c_eta = 0.0;
    double h_norm_sq = 0.0;
    bool pass = false;
};

ResolventDecayResult resolvent_decay_study(const TestFunction& h, double eta, double eps, double m,
                                           const std::vector<double>& rho_ladder,
                                           const FrequencyGrid& grid);

/// |grad S_t h|_m (sum over components).
double heat_gradient_norm(const TestFunction& h, double t, double m, const FrequencyGrid& grid);

}  // namespace mvlab
