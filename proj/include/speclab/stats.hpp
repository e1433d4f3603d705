#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace speclab {

struct NStat {
    int N = 0;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    int count = 0;
};

/// Log-log fit of value against N. slope/intercept/r_squared are absent when
/// the fit is degenerate (fewer than two distinct N).
struct RateEstimate {
    std::optional<double> slope;
    std::optional<double> intercept;
    std::optional<double> r_squared;
    std::vector<NStat> per_N;  // ascending N
};

/// Linear-interpolated quantile (type 7), q in [0, 1]. Throws on empty input.
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);

/// Least squares of log value on log N over all points. Throws
/// std::invalid_argument on a nonpositive value or fewer than two distinct N.
RateEstimate fit_loglog(const std::vector<std::pair<double, double>>& points);

/// Per-N medians and quartiles of raw (N, value) samples, then fit_loglog on
/// the medians. A single N yields per_N with no slope.
RateEstimate rate_from_samples(const std::vector<std::pair<int, double>>& samples);

struct Frequency {
    double frequency = 0.0;
    double lower = 0.0;  // 95% Wilson interval
    double upper = 0.0;
    int successes = 0;
    int total = 0;
};

/// Empirical frequency of true results with its 95% Wilson score interval.
Frequency empirical_high_probability(const std::vector<bool>& results);

}  // namespace speclab
