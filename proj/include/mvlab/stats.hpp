#pragma once
// Small statistics toolkit: order-fixed summation, replicate summaries and
// least-squares slope fits on log-log data.

#include <cstddef>
#include <span>
#include <vector>

namespace mvlab {

/// Pairwise (cascade) summation.  Result depends only on the element order,
/// never on how the values were produced.
double pairwise_sum(std::span<const double> v);

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;   // standard error of the mean
    double sd = 0.0;   // sample standard deviation
    std::size_t count = 0;
};

MeanSe mean_se(std::span<const double> v);

/// Root mean square of replicate values, with a delta-method standard error.
MeanSe rms_se(std::span<const double> v);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;     // propagated from point standard errors
    double ci_low = 0.0;       // slope -/+ 1.96 slope_se
    double ci_high = 0.0;
    double residual_se = 0.0;  // OLS residual standard error
    double r2 = 0.0;
    std::size_t points = 0;
};

/// Ordinary least squares of y on x.  `y_var` (optional, may be empty) holds
/// the variance of each y; it is propagated through the OLS weights to give
/// slope_se.
SlopeFit fit_line(std::span<const double> x, std::span<const double> y,
                  std::span<const double> y_var = {});

/// OLS of log(y) on log(x) with standard errors `y_se` of the means y
/// (delta method: var(log y) = (se / y)^2).
SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y,
                    std::span<const double> y_se = {});

}  // namespace mvlab
