#include "mvlab/sobolev.hpp"

#include "mvlab/rng.hpp"
#include "mvlab/simd.hpp"
#include "mvlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mvlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double spectral_prefactor(int d) { return std::pow(kTwoPi, -0.5 * d); }

// (2 pi)^{-d/2} sum_j w_j e^{-i xi . x_j} on the whole grid.
void accumulate_atoms(int d, std::span<const double> atoms, std::span<const double> w,
                      const FrequencyGrid& grid, double nyquist, std::vector<std::complex<double>>& out) {
    const std::size_t P = grid.points;
    const std::size_t c = P / 2;
    out.assign(grid.size(), {0.0, 0.0});
    const double pre = spectral_prefactor(d);
    if (d == 1) {
        // Real measure: F(-xi) = conj F(xi); sum only xi >= 0 below Nyquist.
        std::size_t K = P - c;
        if (std::isfinite(nyquist)) {
            std::size_t kn = 0;
            while (kn < K && std::abs(grid.nodes[c + kn]) < nyquist) ++kn;
            K = kn;
        }
        std::vector<double> re(K, 0.0), im(K, 0.0);
        simd::phase_accumulate(atoms, w, 0.0, grid.spacing(), re, im);
        for (std::size_t k = 0; k < K; ++k) {
            out[c + k] = pre * std::complex<double>(re[k], im[k]);
            out[c - k] = std::conj(out[c + k]);
        }
        return;
    }
    // Per-axis phase tables, then products over the tensor grid.
    const std::size_t n = atoms.size() / static_cast<std::size_t>(d);
    std::vector<std::complex<double>> table(static_cast<std::size_t>(d) * P);
    std::vector<char> inside(P);
    for (std::size_t k = 0; k < P; ++k) inside[k] = std::abs(grid.nodes[k]) < nyquist;
    std::vector<std::complex<double>> partial(grid.size());
    for (std::size_t j = 0; j < n; ++j) {
        for (int a = 0; a < d; ++a) {
            const double x = atoms[j * d + a];
            for (std::size_t k = 0; k < P; ++k) {
                const double ph = grid.nodes[k] * x;
                table[a * P + k] = inside[k] ? std::complex<double>(std::cos(ph), -std::sin(ph))
                                             : std::complex<double>(0.0, 0.0);
            }
        }
        // Build the product progressively, axis by axis.
        std::size_t len = 1;
        partial[0] = pre * w[j];
        for (int a = 0; a < d; ++a) {
            for (std::size_t q = len; q-- > 0;) {
                const auto base = partial[q];
                for (std::size_t k = 0; k < P; ++k) partial[q * P + k] = base * table[a * P + k];
            }
            len *= P;
        }
        for (std::size_t q = 0; q < len; ++q) out[q] += partial[q];
    }
}

}  // namespace

// ---------------------------------------------------------------------------

FrequencyGrid FrequencyGrid::make(int d, double cutoff, std::size_t points_per_axis) {
    if (d < 1) throw std::invalid_argument("FrequencyGrid: d must be positive");
    if (!(cutoff > 0.0)) throw std::invalid_argument("FrequencyGrid: cutoff must be positive");
    if (points_per_axis < 3 || points_per_axis % 2 == 0)
        throw std::invalid_argument("FrequencyGrid: points per axis must be odd and >= 3");
    FrequencyGrid g;
    g.d = d;
    g.cutoff = cutoff;
    g.points = points_per_axis;
    const std::size_t c = points_per_axis / 2;
    const double h = cutoff / static_cast<double>(c);
    g.nodes.resize(points_per_axis);
    g.weights.assign(points_per_axis, h);
    for (std::size_t k = 0; k < points_per_axis; ++k)
        g.nodes[k] = (static_cast<double>(k) - static_cast<double>(c)) * h;
    g.nodes[0] = -cutoff;
    g.nodes[points_per_axis - 1] = cutoff;
    g.weights.front() = g.weights.back() = 0.5 * h;
    return g;
}

std::size_t FrequencyGrid::size() const {
    std::size_t s = 1;
    for (int a = 0; a < d; ++a) s *= points;
    return s;
}

double FrequencyGrid::total_volume() const {
    double one = 0.0;
    for (double w : weights) one += w;
    return std::pow(one, d);
}

void FrequencyGrid::coordinates(std::size_t k, double* xi) const {
    for (int a = d - 1; a >= 0; --a) {
        xi[a] = nodes[k % points];
        k /= points;
    }
}

double FrequencyGrid::weight(std::size_t k) const {
    double w = 1.0;
    for (int a = 0; a < d; ++a) {
        w *= weights[k % points];
        k /= points;
    }
    return w;
}

FrequencyGrid default_measure_grid(int d) {
    switch (d) {
        case 1: return FrequencyGrid::make(1, 200.0, 8001);
        case 2: return FrequencyGrid::make(2, 60.0, 241);
        default: return FrequencyGrid::make(d, 20.0, 41);
    }
}

FrequencyGrid default_function_grid(const TestFunction& h, std::size_t points) {
    if (h.empty()) return FrequencyGrid::make(h.dim(), 1.0, 3);
    const double cutoff = 40.0 / h.min_width();
    double spread = 0.0;
    for (const auto& a : h.bumps())
        for (const auto& b : h.bumps()) {
            double r2 = 0.0;
            for (int i = 0; i < h.dim(); ++i) r2 += (a.center[i] - b.center[i]) * (a.center[i] - b.center[i]);
            spread = std::max(spread, std::sqrt(r2));
        }
    // Trapezoid accuracy needs the spacing to resolve both the narrowest
    // spectral feature and the cross-bump oscillation.
    const double h_max = std::min(0.5 / h.max_width(), kTwoPi / (spread + 12.0 * h.max_width()));
    std::size_t half = static_cast<std::size_t>(std::ceil(cutoff / h_max));
    half = std::max(half, points / 2);
    if (h.dim() > 1) half = std::min<std::size_t>(half, 200);
    return FrequencyGrid::make(h.dim(), cutoff, 2 * half + 1);
}

double EmpiricalMeasureView::weight(std::size_t j) const {
    return weights.empty() ? 1.0 / static_cast<double>(count()) : weights[j];
}

// ---------------------------------------------------------------------------

SpectralField SpectralField::operator-(const SpectralField& o) const {
    return *this + o.scaled(-1.0);
}

SpectralField SpectralField::operator+(const SpectralField& o) const {
    if (grid != o.grid || values.size() != o.values.size())
        throw std::invalid_argument("SpectralField: grids differ");
    SpectralField r = *this;
    for (std::size_t k = 0; k < values.size(); ++k) r.values[k] += o.values[k];
    r.atomic_mass_sq = atomic_mass_sq + o.atomic_mass_sq;
    return r;
}

SpectralField SpectralField::scaled(double c) const {
    SpectralField r = *this;
    for (auto& v : r.values) v *= c;
    r.atomic_mass_sq *= c * c;
    return r;
}

SpectralField spectrum(const TestFunction& h, const FrequencyGrid& grid) {
    if (h.dim() != grid.d) throw std::invalid_argument("spectrum: dimension mismatch");
    SpectralField f;
    f.grid = &grid;
    f.values.resize(grid.size());
    std::vector<double> xi(grid.d);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        grid.coordinates(k, xi.data());
        f.values[k] = h.fourier(xi.data());
    }
    return f;
}

SpectralField spectrum(const EmpiricalMeasureView& mu, const FrequencyGrid& grid) {
    if (mu.d != grid.d) throw std::invalid_argument("spectrum: dimension mismatch");
    const std::size_t n = mu.count();
    std::vector<double> w(n);
    double w2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        w[j] = mu.weight(j);
        w2 += w[j] * w[j];
    }
    SpectralField f;
    f.grid = &grid;
    accumulate_atoms(mu.d, mu.atoms, w, grid, INFINITY, f.values);
    f.atomic_mass_sq = w2;
    return f;
}

SpectralField spectrum(const GridMeasure& nu, const FrequencyGrid& grid) {
    if (nu.d != grid.d) throw std::invalid_argument("spectrum: dimension mismatch");
    std::vector<double> x(nu.cells() * nu.d), w(nu.cells());
    const double vol = nu.cell_volume();
    for (std::size_t k = 0; k < nu.cells(); ++k) {
        nu.coordinates(k, &x[k * nu.d]);
        w[k] = nu.density[k] * vol;
    }
    SpectralField f;
    f.grid = &grid;
    accumulate_atoms(nu.d, x, w, grid, std::numbers::pi / nu.spacing(), f.values);
    return f;
}

NormReport weighted_norm(const SpectralField& f, double s, AtomicTail tail) {
    if (!f.grid) throw std::invalid_argument("weighted_norm: field without grid");
    const FrequencyGrid& g = *f.grid;
    const std::size_t K = g.size();
    std::vector<double> terms(K), base(K);
    std::vector<double> xi(g.d);
    double shell = 0.0;
    const double edge = 0.9 * g.cutoff;
    for (std::size_t k = 0; k < K; ++k) {
        g.coordinates(k, xi.data());
        double r2 = 0.0, amax = 0.0;
        for (int a = 0; a < g.d; ++a) {
            r2 += xi[a] * xi[a];
            amax = std::max(amax, std::abs(xi[a]));
        }
        const double wk = g.weight(k) * std::pow(1.0 + r2, s);
        base[k] = wk;
        terms[k] = wk * std::norm(f.values[k]);
        if (amax > edge) shell += terms[k];
    }
    NormReport r;
    const double total = pairwise_sum(terms);
    r.grid_value = std::sqrt(std::max(total, 0.0));
    r.shell_fraction = total > 0.0 ? shell / total : 0.0;
    const bool atomic = f.atomic_mass_sq > 0.0;
    double sq = total;
    if (atomic && s >= -0.5 * g.d) {
        r.divergent = true;
    } else if (atomic && tail == AtomicTail::Auto) {
        const double m = -s;
        const double exact = std::pow(std::numbers::pi, 0.5 * g.d) *
                             std::exp(std::lgamma(m - 0.5 * g.d) - std::lgamma(m));
        const double on_grid = pairwise_sum(base);
        r.tail_term = std::pow(kTwoPi, -g.d) * f.atomic_mass_sq * (exact - on_grid);
        sq += r.tail_term;
    }
    if (!atomic) r.truncation_alarm = r.shell_fraction > 1e-6;
    r.value = std::sqrt(std::max(sq, 0.0));
    return r;
}

NormReport hs_norm_report(const TestFunction& h, double s, const FrequencyGrid& grid) {
    return weighted_norm(spectrum(h, grid), s);
}

double hs_norm(const TestFunction& h, double s, const FrequencyGrid& grid) {
    return hs_norm_report(h, s, grid).value;
}

double hs_norm(const TestFunction& h, double s) {
    if (h.empty()) return 0.0;
    const FrequencyGrid g = default_function_grid(h);
    return hs_norm(h, s, g);
}

NormReport hs_norm(const GridMeasure& nu, double s, const FrequencyGrid& grid) {
    return weighted_norm(spectrum(nu, grid), s);
}

NormReport hminus_norm(const EmpiricalMeasureView& mu, double m, const FrequencyGrid& grid) {
    if (!(m > 0.0)) throw std::invalid_argument("hminus_norm: m must be positive");
    return weighted_norm(spectrum(mu, grid), -m);
}

NormReport hminus_norm(const GridMeasure& nu, double m, const FrequencyGrid& grid) {
    if (!(m > 0.0)) throw std::invalid_argument("hminus_norm: m must be positive");
    return weighted_norm(spectrum(nu, grid), -m);
}

NormReport hminus_distance(const EmpiricalMeasureView& mu, const GridMeasure& nu, double m,
                           const FrequencyGrid& grid) {
    return weighted_norm(spectrum(mu, grid) - spectrum(nu, grid), -m);
}

double point_mass_norm(double m, int d) {
    if (!(m > 0.5 * d)) return INFINITY;
    const double integral =
        std::pow(std::numbers::pi, 0.5 * d) * std::exp(std::lgamma(m - 0.5 * d) - std::lgamma(m));
    return std::sqrt(std::pow(kTwoPi, -d) * integral);
}

double dual_pairing(const EmpiricalMeasureView& mu, const TestFunction& h) {
    if (mu.d != h.dim()) throw std::invalid_argument("dual_pairing: dimension mismatch");
    std::vector<double> terms(mu.count());
    for (std::size_t j = 0; j < mu.count(); ++j)
        terms[j] = mu.weight(j) * h.value(mu.atoms.data() + j * mu.d);
    return pairwise_sum(terms);
}

double dual_pairing(const GridMeasure& nu, const TestFunction& h) { return pair_grid(nu, h); }

EmbeddingProbe embedding_constant_probe(double m, const FrequencyGrid& grid, std::size_t trials,
                                        std::uint64_t seed, std::size_t atoms) {
    if (!(m > 0.5 * grid.d)) throw std::invalid_argument("embedding_constant_probe: need m > d/2");
    const int d = grid.d;
    EmbeddingProbe p;
    p.trials = trials;
    const std::vector<double> origin(d, 0.0);
    p.point_mass = hminus_norm(EmpiricalMeasureView{d, origin, {}}, m, grid).value;
    const CounterRng rng(seed);
    std::vector<double> x(atoms * d);
    for (std::size_t t = 0; t < trials; ++t) {
        const auto s = static_cast<std::uint32_t>(t);
        const double spread = 0.1 + 5.0 * rng.uniform(s, 0, 0, StreamTag::Misc);
        for (std::size_t j = 0; j < atoms * d; ++j)
            x[j] = spread * rng.normal(s, 1, static_cast<std::uint32_t>(j), StreamTag::Misc);
        p.max_atomic = std::max(p.max_atomic, hminus_norm(EmpiricalMeasureView{d, x, {}}, m, grid).value);
        // Absolutely continuous: random mixture of unit-mass Gaussians.
        const int nb = 1 + static_cast<int>(3.0 * rng.uniform(s, 2, 0, StreamTag::Misc));
        std::vector<GaussianBump> bumps;
        double wsum = 0.0;
        std::vector<double> wts(nb);
        for (int b = 0; b < nb; ++b) wsum += wts[b] = 0.1 + rng.uniform(s, 3, b, StreamTag::Misc);
        for (int b = 0; b < nb; ++b) {
            const double sd = 0.05 + 2.0 * rng.uniform(s, 4, b, StreamTag::Misc);
            std::vector<double> c(d);
            for (int a = 0; a < d; ++a) c[a] = 3.0 * rng.normal(s, 5, b * d + a, StreamTag::Misc);
            auto g = TestFunction::gaussian_density(c, sd);
            bumps.push_back({g.bumps()[0].amplitude * wts[b] / wsum, c, sd});
        }
        const TestFunction density(d, bumps);
        p.max_continuous = std::max(p.max_continuous, weighted_norm(spectrum(density, grid), -m).value);
    }
    return p;
}

}  // namespace mvlab
