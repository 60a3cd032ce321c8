#include "mvlab/semigroup.hpp"

#include "mvlab/stats.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mvlab {

TestFunction apply_heat(const TestFunction& h, double t) {
    if (t < 0.0) throw std::invalid_argument("apply_heat: t must be nonnegative");
    if (t == 0.0) return h;
    std::vector<GaussianBump> out = h.bumps();
    const double half_d = 0.5 * h.dim();
    for (auto& b : out) {
        const double s2 = b.width * b.width;
        b.amplitude *= std::pow(s2 / (s2 + t), half_d);
        b.width = std::sqrt(s2 + t);
    }
    return TestFunction(h.dim(), std::move(out));
}

GradientField grad_heat(const TestFunction& h, double t) { return GradientField(h, t); }

namespace {

// sup over a window of |f|, dense sampling plus Brent polishing.
std::pair<double, double> sup_abs(const std::function<double(double)>& f, double lo, double hi, double step) {
    const std::size_t m = static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1;
    std::vector<double> v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = std::abs(f(lo + static_cast<double>(i) * step));
    std::size_t arg = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    double best = v[arg], where = lo + static_cast<double>(arg) * step;
    for (std::size_t i = 1; i + 1 < m; ++i) {
        if (v[i] >= v[i - 1] && v[i] >= v[i + 1] && v[i] > 0.5 * best) {
            const double a = lo + static_cast<double>(i - 1) * step;
            const auto r = boost::math::tools::brent_find_minima(
                [&](double x) { return -std::abs(f(x)); }, a, a + 2.0 * step, 52);
            if (-r.second > best) {
                best = -r.second;
                where = r.first;
            }
        }
    }
    return {best, where};
}

}  // namespace

GradientBoundReport check_gradient_identity_bounds(const std::vector<TestFunction>& library,
                                                   const std::vector<double>& times, double density) {
    GradientBoundReport rep;
    for (std::size_t f = 0; f < library.size(); ++f) {
        const TestFunction& h = library[f];
        if (h.dim() != 1)
            throw std::invalid_argument("check_gradient_identity_bounds: only d = 1 is supported");
        const double d2 = h.derivative_sup(2);
        const double d3 = h.derivative_sup(3);
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& b : h.bumps()) {
            lo = std::min(lo, b.center[0] - 10.0 * b.width);
            hi = std::max(hi, b.center[0] + 10.0 * b.width);
        }
        for (double t : times) {
            GradientBoundRow row;
            row.function = f;
            row.t = t;
            row.bound_sqrt = std::sqrt(t) * d2;
            row.bound_linear = 0.5 * t * d3;
            if (t > 0.0) {
                const TestFunction heated = apply_heat(h, t);
                const double pad = 10.0 * std::sqrt(t);
                const double step = h.min_width() / density;
                const auto s = sup_abs([&](double x) { return heated.derivative1(x) - h.derivative1(x); },
                                       lo - pad, hi + pad, step);
                row.lhs = s.first;
                row.witness_x = s.second;
            }
            const double r1 = row.bound_sqrt > 0.0 ? row.lhs / row.bound_sqrt : 0.0;
            const double r2 = row.bound_linear > 0.0 ? row.lhs / row.bound_linear : 0.0;
            rep.worst_ratio_sqrt = std::max(rep.worst_ratio_sqrt, r1);
            rep.worst_ratio_linear = std::max(rep.worst_ratio_linear, r2);
            const bool bad = row.lhs > row.bound_sqrt * (1.0 + 1e-12) || row.lhs > row.bound_linear * (1.0 + 1e-12);
            if (bad) {
                if (rep.violations == 0) {
                    std::ostringstream os;
                    os.precision(17);
                    os << "function " << f << ", t=" << t << ", x*=" << row.witness_x << ": lhs " << row.lhs
                       << " vs bounds " << row.bound_sqrt << " / " << row.bound_linear;
                    rep.first_violation = os.str();
                }
                ++rep.violations;
            }
            rep.rows.push_back(row);
        }
    }
    return rep;
}

double resolvent_constant(double eta) {
    const double c = std::cos(eta);
    auto neg = [c](double x) { return -(1.0 + x) / std::sqrt(x * x + 2.0 * c * x + 1.0); };
    // The ratio is invariant under x -> 1/x, so the sup lies in [0, 1].
    const auto r = boost::math::tools::brent_find_minima(neg, 0.0, 1.0, 52);
    const double s = std::max(-r.second, 1.0);
    return s * s;
}

std::complex<double> resolvent_gradient_multiplier(std::complex<double> lambda, const double* xi, int d,
                                                   int axis) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += xi[a] * xi[a];
    return std::complex<double>(0.0, xi[axis]) / (lambda + 0.5 * r2);
}

std::vector<double> ResolventGradientField::evaluate(const double* x) const {
    const FrequencyGrid& g = *grid;
    std::vector<double> out(components.size(), 0.0);
    std::vector<double> xi(g.d);
    const double pre = std::pow(2.0 * std::numbers::pi, -0.5 * g.d);
    for (std::size_t a = 0; a < components.size(); ++a) {
        std::vector<double> terms(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) {
            g.coordinates(k, xi.data());
            double ph = 0.0;
            for (int b = 0; b < g.d; ++b) ph += xi[b] * x[b];
            const auto e = std::complex<double>(std::cos(ph), std::sin(ph));
            terms[k] = g.weight(k) * (components[a].values[k] * e).real();
        }
        out[a] = pre * pairwise_sum(terms);
    }
    return out;
}

ResolventGradientField apply_resolvent_gradient(const TestFunction& h, const ResolventPoint& p,
                                                const FrequencyGrid& grid) {
    const SpectralField fh = spectrum(h, grid);
    ResolventGradientField out;
    out.grid = &grid;
    std::vector<double> xi(grid.d);
    const auto lambda = p.lambda();
    for (int a = 0; a < grid.d; ++a) {
        SpectralField c = fh;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            grid.coordinates(k, xi.data());
            c.values[k] *= resolvent_gradient_multiplier(lambda, xi.data(), grid.d, a);
        }
        out.truncation_alarm = out.truncation_alarm || weighted_norm(c, 0.0).truncation_alarm;
        out.components.push_back(std::move(c));
    }
    return out;
}

double resolvent_gradient_norm(const TestFunction& h, const ResolventPoint& p, double s,
                               const FrequencyGrid& grid) {
    const auto lambda = p.lambda();
    std::vector<double> terms(grid.size());
    std::vector<double> xi(grid.d);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        grid.coordinates(k, xi.data());
        double r2 = 0.0;
        for (int a = 0; a < grid.d; ++a) r2 += xi[a] * xi[a];
        const double mult = r2 / std::norm(lambda + 0.5 * r2);
        terms[k] = grid.weight(k) * std::pow(1.0 + r2, s) * mult * std::norm(h.fourier(xi.data()));
    }
    return std::sqrt(pairwise_sum(terms));
}

double resolvent_identity_residual(const TestFunction& h, std::complex<double> lambda,
                                   const FrequencyGrid& grid) {
    double worst = 0.0;
    std::vector<double> xi(grid.d);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        grid.coordinates(k, xi.data());
        double r2 = 0.0;
        for (int a = 0; a < grid.d; ++a) r2 += xi[a] * xi[a];
        const auto fh = h.fourier(xi.data());
        const auto rh = fh / (lambda + 0.5 * r2);
        worst = std::max(worst, std::abs((lambda + 0.5 * r2) * rh - fh));
    }
    return worst;
}

ResolventDecayResult resolvent_decay_study(const TestFunction& h, double eta, double eps, double m,
                                           const std::vector<double>& rho_ladder,
                                           const FrequencyGrid& grid) {
    if (!(eta > 0.5 * std::numbers::pi && eta < std::numbers::pi))
        throw std::invalid_argument("resolvent_decay_study: eta must lie in (pi/2, pi)");
    if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("resolvent_decay_study: eps must lie in (0, 1/2)");
    ResolventDecayResult r;
    r.c_eta = resolvent_constant(eta);
    const double hm = hs_norm(h, m, grid);
    r.h_norm_sq = hm * hm;
    r.target = -(1.0 + 2.0 * eps) + 0.1;
    for (double rho : rho_ladder) {
        const double nrm = resolvent_gradient_norm(h, ResolventPoint{rho, eta, eps}, m - 2.0 * eps, grid);
        r.rho.push_back(rho);
        r.norm_sq.push_back(nrm * nrm);
        // Delta/2 translation of the Delta-normalised bound.
        const double bound = 4.0 * r.c_eta * r.h_norm_sq / std::pow(2.0 * rho, 1.0 + 2.0 * eps);
        r.ratio.push_back(nrm * nrm / bound);
    }
    r.slope = fit_loglog(r.rho, r.norm_sq).slope;
    r.pass = r.slope <= r.target;
    return r;
}

double heat_gradient_norm(const TestFunction& h, double t, double m, const FrequencyGrid& grid) {
    std::vector<double> terms(grid.size());
    std::vector<double> xi(grid.d);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        grid.coordinates(k, xi.data());
        double r2 = 0.0;
        for (int a = 0; a < grid.d; ++a) r2 += xi[a] * xi[a];
        terms[k] = grid.weight(k) * std::pow(1.0 + r2, m) * r2 * std::exp(-t * r2) * std::norm(h.fourier(xi.data()));
    }
    return std::sqrt(pairwise_sum(terms));
}

}  // namespace mvlab
