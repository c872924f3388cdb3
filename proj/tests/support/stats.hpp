#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace coalesce::test
{
inline double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
inline double ks_statistic(std::vector<double> sample, std::function<double(double)> const& cdf)
{
    std::sort(sample.begin(), sample.end());
    double const n = static_cast<double>(sample.size());
    double d = 0;
    for (std::size_t i = 0; i < sample.size(); ++i)
    {
        double const f = cdf(sample[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

/// Two-sample KS statistic; ties (e.g. censored values) are handled jointly.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double const na = static_cast<double>(a.size());
    double const nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0;
    while (i < a.size() && j < b.size())
    {
        double const x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x)
            ++i;
        while (j < b.size() && b[j] == x)
            ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

/// Asymptotic KS critical value at level 0.01 for sample sizes n and m (m = 0: one-sample).
inline double ks_critical_001(std::size_t n, std::size_t m = 0)
{
    constexpr double c = 1.6276;  // sqrt(-ln(0.005) / 2)
    if (m == 0)
        return c / std::sqrt(static_cast<double>(n));
    double const nn = static_cast<double>(n);
    double const mm = static_cast<double>(m);
    return c * std::sqrt((nn + mm) / (nn * mm));
}

struct Summary
{
    double mean = 0;
    double variance = 0;
};

inline Summary summarize(std::vector<double> const& v)
{
    Summary s;
    for (double x : v)
        s.mean += x;
    s.mean /= static_cast<double>(v.size());
    for (double x : v)
        s.variance += (x - s.mean) * (x - s.mean);
    s.variance /= static_cast<double>(v.size() - 1);
    return s;
}
}  // namespace coalesce::test
