#pragma once
// Sobolev norms on a truncated frequency grid, unitary Fourier convention:
//   (F u)(xi) = (2 pi)^{-d/2} int u(x) e^{-i xi.x} dx,
//   |u|_s^2   = int (1 + |xi|^2)^s |F u(xi)|^2 dxi.
// Negative s gives the dual norm on measures.

#include "mvlab/grid_measure.hpp"
#include "mvlab/test_function.hpp"

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace mvlab {

struct FrequencyGrid {
    int d = 1;
    double cutoff = 0.0;
    std::size_t points = 0;        // per axis, odd
    std::vector<double> nodes;     // symmetric, nodes[points/2] == 0
    std::vector<double> weights;   // 1-D trapezoid weights

    static FrequencyGrid make(int d, double cutoff, std::size_t points_per_axis);
    std::size_t size() const;
    double spacing() const { return nodes.size() > 1 ? nodes[1] - nodes[0] : 0.0; }
    double total_volume() const;
    /// Coordinates of flat index k (last axis fastest).
    void coordinates(std::size_t k, double* xi) const;
    double weight(std::size_t k) const;
};

/// Cutoff 200 with 8001 points per axis in d = 1 (fewer points in higher d).
FrequencyGrid default_measure_grid(int d);
/// Cutoff 40 / (smallest bump width).
FrequencyGrid default_function_grid(const TestFunction& h, std::size_t points = 4001);

struct EmpiricalMeasureView {
    int d = 1;
    std::span<const double> atoms;  // n x d
    std::vector<double> weights;    // empty means 1/n each

    std::size_t count() const { return atoms.size() / static_cast<std::size_t>(d); }
    double weight(std::size_t j) const;
};

/// Values of a transform on a FrequencyGrid.  `atomic_mass_sq` is the sum of
/// squared atom weights of the atomic part; it drives the tail correction
/// for frequencies beyond the cutoff.
struct SpectralField {
    const FrequencyGrid* grid = nullptr;
    std::vector<std::complex<double>> values;
    double atomic_mass_sq = 0.0;

    SpectralField operator-(const SpectralField& other) const;
    SpectralField operator+(const SpectralField& other) const;
    SpectralField scaled(double c) const;
};

SpectralField spectrum(const TestFunction& h, const FrequencyGrid& grid);
/// Direct summation over atoms, no binning.
SpectralField spectrum(const EmpiricalMeasureView& mu, const FrequencyGrid& grid);
/// Cell masses at cell centres, evaluated below the grid's Nyquist frequency
/// pi / spacing and zero beyond.
SpectralField spectrum(const GridMeasure& nu, const FrequencyGrid& grid);

enum class AtomicTail { Auto, Off };

struct NormReport {
    double value = 0.0;
    double grid_value = 0.0;       // plain quadrature, no tail term
    double tail_term = 0.0;        // squared-norm correction that was added
    double shell_fraction = 0.0;   // integrand share with max |xi_a| > 0.9 cutoff
    bool truncation_alarm = false;
    bool divergent = false;        // atomic input with s >= -d/2
};

/// Weighted quadrature of (1+|xi|^2)^s |F|^2.  For atomic fields with
/// s < -d/2 the part of int (1+|xi|^2)^s dxi that the grid misses is added
/// with the atoms' diagonal weight (2 pi)^{-d} sum w_j^2 (skipped with
/// AtomicTail::Off).  Smooth fields raise the truncation alarm when the
/// outer shell carries more than 1e-6 of the integrand.
NormReport weighted_norm(const SpectralField& f, double s, AtomicTail tail = AtomicTail::Auto);

double hs_norm(const TestFunction& h, double s, const FrequencyGrid& grid);
double hs_norm(const TestFunction& h, double s);
NormReport hs_norm_report(const TestFunction& h, double s, const FrequencyGrid& grid);
NormReport hs_norm(const GridMeasure& nu, double s, const FrequencyGrid& grid);

NormReport hminus_norm(const EmpiricalMeasureView& mu, double m, const FrequencyGrid& grid);
NormReport hminus_norm(const GridMeasure& nu, double m, const FrequencyGrid& grid);
NormReport hminus_distance(const EmpiricalMeasureView& mu, const GridMeasure& nu, double m,
                           const FrequencyGrid& grid);

/// Closed form of |delta_x|_{-m} (m > d/2).
double point_mass_norm(double m, int d);

double dual_pairing(const EmpiricalMeasureView& mu, const TestFunction& h);
double dual_pairing(const GridMeasure& nu, const TestFunction& h);

struct EmbeddingProbe {
    double max_atomic = 0.0;      // over random n-atom measures
    double max_continuous = 0.0;  // over random Gaussian-mixture densities
    double point_mass = 0.0;      // single-atom value on the same grid
    std::size_t trials = 0;
};

EmbeddingProbe embedding_constant_probe(double m, const FrequencyGrid& grid, std::size_t trials,
                                        std::uint64_t seed, std::size_t atoms = 50);

}  // namespace mvlab
