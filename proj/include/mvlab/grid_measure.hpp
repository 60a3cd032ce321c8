#pragma once
// Probability density stored as cell averages on the periodic window
// [-L, L)^d with N cells per axis.  Mass that lies outside the window is
// carried separately in tail_mass.

#include "mvlab/particles.hpp"
#include "mvlab/test_function.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace mvlab {

struct GridMeasure {
    int d = 1;
    double L = 1.0;
    std::size_t N = 0;
    std::vector<double> density;  // N^d, last axis fastest
    double tail_mass = 0.0;

    double spacing() const { return 2.0 * L / static_cast<double>(N); }
    double cell_volume() const;
    double center(std::size_t c) const { return -L + (static_cast<double>(c) + 0.5) * spacing(); }
    std::size_t cells() const { return density.size(); }
    /// Cell centre coordinates of flat index `k`.
    void coordinates(std::size_t k, double* x) const;
    /// Quadrature mass inside the window.
    double mass() const;

    static GridMeasure zeros(int d, double L, std::size_t N);
    /// d = 1 cell averages from a cumulative distribution function.
    static GridMeasure from_cdf(double L, std::size_t N, const std::function<double(double)>& cdf);
    /// Product Gaussian N(mean, sd^2 Id) via per-axis CDF differences.
    static GridMeasure gaussian(int d, double L, std::size_t N, double mean, double sd);
    /// d = 1 cell averages of an iid initial law (Gaussian, Cauchy, two-cluster).
    static GridMeasure from_law(const InitialLaw& law, double L, std::size_t N);
    /// Midpoint samples of a density (any d); tail mass = 1 - mass().
    static GridMeasure from_density(int d, double L, std::size_t N,
                                    const std::function<double(const double*)>& rho);
};

/// Grid quadrature of the pairing <nu, h>.
double pair_grid(const GridMeasure& nu, const TestFunction& h);

/// L1 distance between two measures on the same grid.
double l1_distance(const GridMeasure& a, const GridMeasure& b);

}  // namespace mvlab
