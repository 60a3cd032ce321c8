#include "mvlab/test_function.hpp"

#include "mvlab/rng.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvlab {

TestFunction::TestFunction(int d, std::vector<GaussianBump> bumps) : d_(d), bumps_(std::move(bumps)) {
    for (const auto& b : bumps_) {
        if (static_cast<int>(b.center.size()) != d_)
            throw std::invalid_argument("TestFunction: bump centre has wrong dimension");
        if (!(b.width > 0.0)) throw std::invalid_argument("TestFunction: bump width must be positive");
    }
}

TestFunction TestFunction::bump(double amplitude, std::vector<double> center, double width) {
    const int d = static_cast<int>(center.size());
    return TestFunction(d, {GaussianBump{amplitude, std::move(center), width}});
}

TestFunction TestFunction::gaussian_density(std::vector<double> mean, double sd) {
    const int d = static_cast<int>(mean.size());
    const double a = std::pow(2.0 * M_PI * sd * sd, -0.5 * d);
    return bump(a, std::move(mean), sd);
}

double TestFunction::value(const double* x) const {
    double v = 0.0;
    for (const auto& b : bumps_) {
        double r2 = 0.0;
        for (int i = 0; i < d_; ++i) r2 += (x[i] - b.center[i]) * (x[i] - b.center[i]);
        v += b.amplitude * std::exp(-0.5 * r2 / (b.width * b.width));
    }
    return v;
}

void TestFunction::gradient(const double* x, double* g) const {
    std::fill(g, g + d_, 0.0);
    for (const auto& b : bumps_) {
        const double s2 = b.width * b.width;
        double r2 = 0.0;
        for (int i = 0; i < d_; ++i) r2 += (x[i] - b.center[i]) * (x[i] - b.center[i]);
        const double e = b.amplitude * std::exp(-0.5 * r2 / s2);
        for (int i = 0; i < d_; ++i) g[i] -= e * (x[i] - b.center[i]) / s2;
    }
}

void TestFunction::hessian(const double* x, double* h) const {
    std::fill(h, h + d_ * d_, 0.0);
    std::vector<double> u(d_);
    for (const auto& b : bumps_) {
        const double s2 = b.width * b.width;
        double r2 = 0.0;
        for (int i = 0; i < d_; ++i) {
            u[i] = x[i] - b.center[i];
            r2 += u[i] * u[i];
        }
        const double e = b.amplitude * std::exp(-0.5 * r2 / s2);
        for (int i = 0; i < d_; ++i)
            for (int j = 0; j < d_; ++j)
                h[i * d_ + j] += e * (u[i] * u[j] / (s2 * s2) - (i == j ? 1.0 / s2 : 0.0));
    }
}

void TestFunction::third(const double* x, double* t) const {
    std::fill(t, t + d_ * d_ * d_, 0.0);
    std::vector<double> u(d_);
    for (const auto& b : bumps_) {
        const double s2 = b.width * b.width;
        double r2 = 0.0;
        for (int i = 0; i < d_; ++i) {
            u[i] = x[i] - b.center[i];
            r2 += u[i] * u[i];
        }
        const double e = b.amplitude * std::exp(-0.5 * r2 / s2) / (s2 * s2);
        for (int i = 0; i < d_; ++i)
            for (int j = 0; j < d_; ++j)
                for (int k = 0; k < d_; ++k) {
                    double v = -u[i] * u[j] * u[k] / s2;
                    if (i == j) v += u[k];
                    if (i == k) v += u[j];
                    if (j == k) v += u[i];
                    t[(i * d_ + j) * d_ + k] += e * v;
                }
    }
}

std::complex<double> TestFunction::fourier(const double* xi) const {
    double xi2 = 0.0;
    for (int i = 0; i < d_; ++i) xi2 += xi[i] * xi[i];
    std::complex<double> acc = 0.0;
    for (const auto& b : bumps_) {
        double ph = 0.0;
        for (int i = 0; i < d_; ++i) ph += xi[i] * b.center[i];
        const double mod = b.amplitude * std::pow(b.width, d_) * std::exp(-0.5 * b.width * b.width * xi2);
        acc += mod * std::complex<double>(std::cos(ph), -std::sin(ph));
    }
    return acc;
}

double TestFunction::derivative1(double x) const {
    double g = 0.0;
    gradient(&x, &g);
    return g;
}

double TestFunction::derivative2(double x) const {
    double h = 0.0;
    hessian(&x, &h);
    return h;
}

double TestFunction::derivative3(double x) const {
    double t = 0.0;
    third(&x, &t);
    return t;
}

TestFunction TestFunction::scaled(double c) const {
    TestFunction out = *this;
    for (auto& b : out.bumps_) b.amplitude *= c;
    return out;
}

double TestFunction::min_width() const {
    double w = INFINITY;
    for (const auto& b : bumps_) w = std::min(w, b.width);
    return w;
}

double TestFunction::max_width() const {
    double w = 0.0;
    for (const auto& b : bumps_) w = std::max(w, b.width);
    return w;
}

double TestFunction::derivative_sup(int order) const {
    if (d_ != 1) throw std::invalid_argument("derivative_sup: only d = 1 is supported");
    if (bumps_.empty()) return 0.0;
    auto f = [&](double x) {
        switch (order) {
            case 0: return std::abs(value(x));
            case 1: return std::abs(derivative1(x));
            case 2: return std::abs(derivative2(x));
            case 3: return std::abs(derivative3(x));
        }
        throw std::invalid_argument("derivative_sup: order must be 0..3");
    };
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& b : bumps_) {
        lo = std::min(lo, b.center[0] - 10.0 * b.width);
        hi = std::max(hi, b.center[0] + 10.0 * b.width);
    }
    const double step = min_width() / 40.0;
    const std::size_t m = static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1;
    std::vector<double> v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = f(lo + static_cast<double>(i) * step);
    double best = *std::max_element(v.begin(), v.end());
    for (std::size_t i = 1; i + 1 < m; ++i) {
        if (v[i] >= v[i - 1] && v[i] >= v[i + 1]) {
            const double a = lo + static_cast<double>(i - 1) * step;
            const auto r = boost::math::tools::brent_find_minima(
                [&](double x) { return -f(x); }, a, a + 2.0 * step, 52);
            best = std::max(best, -r.second);
        }
    }
    return best;
}

void TestFunction::mixture_arrays(std::vector<double>& amp, std::vector<double>& center,
                                  std::vector<double>& var) const {
    if (d_ != 1) throw std::invalid_argument("mixture_arrays: only d = 1 is supported");
    amp.clear();
    center.clear();
    var.clear();
    for (const auto& b : bumps_) {
        amp.push_back(b.amplitude);
        center.push_back(b.center[0]);
        var.push_back(b.width * b.width);
    }
}

std::vector<TestFunction> test_function_library(int d, std::size_t count, std::uint64_t seed,
                                                double min_width, double max_width) {
    const CounterRng rng(seed);
    std::vector<TestFunction> lib;
    lib.reserve(count);
    for (std::size_t f = 0; f < count; ++f) {
        const auto s = static_cast<std::uint32_t>(f);
        const int nb = 1 + static_cast<int>(rng.uniform(s, 0, 0, StreamTag::Library) * 3.0);
        std::vector<GaussianBump> bumps;
        for (int k = 0; k < nb; ++k) {
            const auto step = static_cast<std::uint32_t>(1 + k);
            GaussianBump b;
            const double u = rng.uniform(s, step, 0, StreamTag::Library);
            b.amplitude = (u < 0.5 ? -1.0 : 1.0) * (0.2 + 1.6 * std::abs(u - 0.5));
            const double w = rng.uniform(s, step, 1, StreamTag::Library);
            b.width = min_width * std::pow(max_width / min_width, w);
            for (int a = 0; a < d; ++a)
                b.center.push_back(-2.0 + 4.0 * rng.uniform(s, step, 2 + a, StreamTag::Library));
            bumps.push_back(std::move(b));
        }
        lib.emplace_back(d, std::move(bumps));
    }
    return lib;
}

}  // namespace mvlab
