#include "speclab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace speclab {

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

RateEstimate fit_loglog(const std::vector<std::pair<double, double>>& points) {
    std::set<double> distinct;
    for (const auto& [n, v] : points) {
        if (!(n > 0.0) || !(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("fit_loglog needs positive N and values");
        distinct.insert(n);
    }
    if (distinct.size() < 2) throw std::invalid_argument("fit_loglog needs at least two distinct N");
    const double k = static_cast<double>(points.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& [n, v] : points) {
        sx += std::log(n);
        sy += std::log(v);
    }
    const double mx = sx / k, my = sy / k;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [n, v] : points) {
        const double dx = std::log(n) - mx, dy = std::log(v) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    RateEstimate out;
    const double slope = sxy / sxx;
    out.slope = slope;
    out.intercept = my - slope * mx;
    // A constant response is fitted exactly.
    out.r_squared = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
    return out;
}

RateEstimate rate_from_samples(const std::vector<std::pair<int, double>>& samples) {
    std::map<int, std::vector<double>> by_n;
    for (const auto& [n, v] : samples) by_n[n].push_back(v);
    std::vector<NStat> per_n;
    std::vector<std::pair<double, double>> medians;
    for (const auto& [n, vals] : by_n) {
        NStat s;
        s.N = n;
        s.median = median(vals);
        s.q25 = quantile(vals, 0.25);
        s.q75 = quantile(vals, 0.75);
        s.count = static_cast<int>(vals.size());
        per_n.push_back(s);
        medians.emplace_back(n, s.median);
    }
    RateEstimate out;
    const bool fittable = medians.size() >= 2 &&
                          std::all_of(medians.begin(), medians.end(), [](const auto& p) { return p.second > 0.0; });
    if (fittable) out = fit_loglog(medians);
    out.per_N = std::move(per_n);
    return out;
}

Frequency empirical_high_probability(const std::vector<bool>& results) {
    if (results.empty()) throw std::invalid_argument("empirical_high_probability needs at least one result");
    constexpr double z = 1.959963984540054;
    Frequency f;
    f.total = static_cast<int>(results.size());
    f.successes = static_cast<int>(std::count(results.begin(), results.end(), true));
    const double n = f.total;
    const double p = f.successes / n;
    f.frequency = p;
    const double denom = 1.0 + z * z / n;
    const double center = (p + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    f.lower = std::max(0.0, center - half);
    f.upper = std::min(1.0, center + half);
    return f;
}

}  // namespace speclab
