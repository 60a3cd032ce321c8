#include "mvlab/grid_measure.hpp"

#include "mvlab/stats.hpp"

#include <boost/math/distributions/cauchy.hpp>
#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <stdexcept>

namespace mvlab {

double GridMeasure::cell_volume() const { return std::pow(spacing(), d); }

void GridMeasure::coordinates(std::size_t k, double* x) const {
    for (int a = d - 1; a >= 0; --a) {
        x[a] = center(k % N);
        k /= N;
    }
}

double GridMeasure::mass() const { return pairwise_sum(density) * cell_volume(); }

GridMeasure GridMeasure::zeros(int d, double L, std::size_t N) {
    if (d < 1 || N < 4 || !(L > 0.0)) throw std::invalid_argument("GridMeasure: bad grid");
    GridMeasure g;
    g.d = d;
    g.L = L;
    g.N = N;
    std::size_t cells = 1;
    for (int a = 0; a < d; ++a) cells *= N;
    g.density.assign(cells, 0.0);
    return g;
}

GridMeasure GridMeasure::from_cdf(double L, std::size_t N, const std::function<double(double)>& cdf) {
    GridMeasure g = zeros(1, L, N);
    const double h = g.spacing();
    double prev = cdf(-L);
    for (std::size_t c = 0; c < N; ++c) {
        const double next = cdf(-L + static_cast<double>(c + 1) * h);
        g.density[c] = (next - prev) / h;
        prev = next;
    }
    g.tail_mass = 1.0 - g.mass();
    return g;
}

GridMeasure GridMeasure::gaussian(int d, double L, std::size_t N, double mean, double sd) {
    GridMeasure g = zeros(d, L, N);
    const boost::math::normal_distribution<double> law(mean, sd);
    const double h = g.spacing();
    std::vector<double> axis(N);
    for (std::size_t c = 0; c < N; ++c)
        axis[c] = (cdf(law, -L + static_cast<double>(c + 1) * h) - cdf(law, -L + static_cast<double>(c) * h)) / h;
    for (std::size_t k = 0; k < g.cells(); ++k) {
        std::size_t r = k;
        double v = 1.0;
        for (int a = 0; a < d; ++a) {
            v *= axis[r % N];
            r /= N;
        }
        g.density[k] = v;
    }
    g.tail_mass = 1.0 - g.mass();
    return g;
}

GridMeasure GridMeasure::from_law(const InitialLaw& law, double L, std::size_t N) {
    switch (law.kind) {
        case InitialLaw::Kind::IidGaussian: {
            const boost::math::normal_distribution<double> nd(law.params.at(0), law.params.at(1));
            return from_cdf(L, N, [&](double x) { return cdf(nd, x); });
        }
        case InitialLaw::Kind::IidCauchy: {
            const boost::math::cauchy_distribution<double> cd(law.params.at(0), law.params.at(1));
            return from_cdf(L, N, [&](double x) { return cdf(cd, x); });
        }
        case InitialLaw::Kind::IidTwoCluster: {
            const boost::math::normal_distribution<double> a(law.params.at(0), law.params.at(2));
            const boost::math::normal_distribution<double> b(law.params.at(1), law.params.at(2));
            return from_cdf(L, N, [&](double x) { return 0.5 * (cdf(a, x) + cdf(b, x)); });
        }
        default:
            throw std::invalid_argument("GridMeasure::from_law: no density for law " + to_string(law.kind));
    }
}

GridMeasure GridMeasure::from_density(int d, double L, std::size_t N,
                                      const std::function<double(const double*)>& rho) {
    GridMeasure g = zeros(d, L, N);
    std::vector<double> x(d);
    for (std::size_t k = 0; k < g.cells(); ++k) {
        g.coordinates(k, x.data());
        g.density[k] = rho(x.data());
    }
    g.tail_mass = 1.0 - g.mass();
    return g;
}

double pair_grid(const GridMeasure& nu, const TestFunction& h) {
    if (h.dim() != nu.d) throw std::invalid_argument("pair_grid: dimension mismatch");
    std::vector<double> terms(nu.cells());
    std::vector<double> x(nu.d);
    for (std::size_t k = 0; k < nu.cells(); ++k) {
        nu.coordinates(k, x.data());
        terms[k] = nu.density[k] * h.value(x.data());
    }
    return pairwise_sum(terms) * nu.cell_volume();
}

double l1_distance(const GridMeasure& a, const GridMeasure& b) {
    if (a.cells() != b.cells() || a.d != b.d) throw std::invalid_argument("l1_distance: grid mismatch");
    std::vector<double> terms(a.cells());
    for (std::size_t k = 0; k < a.cells(); ++k) terms[k] = std::abs(a.density[k] - b.density[k]);
    return pairwise_sum(terms) * a.cell_volume();
}

}  // namespace mvlab
