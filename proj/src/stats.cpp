#include "mvlab/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace mvlab {

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 16) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t h = v.size() / 2;
    return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

MeanSe mean_se(std::span<const double> v) {
    MeanSe r;
    r.count = v.size();
    if (v.empty()) return r;
    r.mean = pairwise_sum(v) / static_cast<double>(v.size());
    if (v.size() > 1) {
        std::vector<double> dev(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) dev[i] = (v[i] - r.mean) * (v[i] - r.mean);
        r.sd = std::sqrt(pairwise_sum(dev) / static_cast<double>(v.size() - 1));
        r.se = r.sd / std::sqrt(static_cast<double>(v.size()));
    }
    return r;
}

MeanSe rms_se(std::span<const double> v) {
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = v[i] * v[i];
    const MeanSe m2 = mean_se(sq);
    MeanSe r;
    r.count = v.size();
    r.mean = std::sqrt(m2.mean);
    r.sd = m2.sd;
    r.se = r.mean > 0.0 ? m2.se / (2.0 * r.mean) : 0.0;
    return r;
}

SlopeFit fit_line(std::span<const double> x, std::span<const double> y,
                  std::span<const double> y_var) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need at least two (x, y) points of equal count");
    if (!y_var.empty() && y_var.size() != y.size())
        throw std::invalid_argument("fit_line: variance count mismatch");
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0) throw std::invalid_argument("fit_line: x values are all equal");
    SlopeFit f;
    f.points = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        rss += r * r;
    }
    f.r2 = syy > 0.0 ? 1.0 - rss / syy : 1.0;
    f.residual_se = n > 2 ? std::sqrt(rss / static_cast<double>(n - 2)) : 0.0;
    if (!y_var.empty()) {
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = (x[i] - mx) / sxx;
            v += c * c * y_var[i];
        }
        f.slope_se = std::sqrt(v);
    } else if (n > 2) {
        f.slope_se = f.residual_se / std::sqrt(sxx);
    }
    f.ci_low = f.slope - 1.96 * f.slope_se;
    f.ci_high = f.slope + 1.96 * f.slope_se;
    return f;
}

SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y,
                    std::span<const double> y_se) {
    std::vector<double> lx(x.size()), ly(y.size()), lv;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw std::invalid_argument("fit_loglog: values must be positive");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    if (!y_se.empty()) {
        lv.resize(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) lv[i] = (y_se[i] / y[i]) * (y_se[i] / y[i]);
    }
    return fit_line(lx, ly, lv);
}

}  // namespace mvlab
