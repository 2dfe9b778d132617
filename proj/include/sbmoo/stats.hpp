#pragma once

// Goodness-of-fit machinery against U(0,1) plus a few descriptive helpers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "sbmoo/errors.hpp"

namespace sbmoo::stats {

inline double mean(std::span<const double> v) {
    if (v.empty()) throw InputError("mean of empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
inline double sample_sd(std::span<const double> v) {
    const double m = mean(v);
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Two-pass Pearson correlation. Throws UndefinedStatistic on zero variance.
inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InputError("pearson needs two equal samples of size >= 2");
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw UndefinedStatistic("correlation undefined: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Ordinary least-squares slope of y on x.
inline double ols_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InputError("ols_slope needs two equal samples of size >= 2");
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw UndefinedStatistic("ols_slope: constant regressor");
    return sxy / sxx;
}

// ---------------------------------------------------------------------------
// Chi-squared upper tail

/// log Q(a, x) by the Legendre continued fraction (modified Lentz). Valid and
/// fast for x > a + 1, which is where Q underflows.
inline double log_gamma_q_cf(double a, double x) {
    constexpr double kTiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return -x + a * std::log(x) - std::lgamma(a) + std::log(h);
}

/// Natural log of the chi-squared survival function; finite even where the
/// p-value itself underflows a double.
inline double chi2_log_sf(double statistic, double df) {
    if (!(df > 0.0)) throw InputError("chi-squared needs positive degrees of freedom");
    if (statistic <= 0.0) return 0.0;
    const double a = 0.5 * df, x = 0.5 * statistic;
    const double q = boost::math::gamma_q(a, x);
    if (q > 1e-280) return std::log(q);
    return log_gamma_q_cf(a, x);
}

inline double chi2_sf(double statistic, double df) {
    if (!(df > 0.0)) throw InputError("chi-squared needs positive degrees of freedom");
    if (statistic <= 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * df, 0.5 * statistic);
}

struct TestResult {
    double statistic = 0.0;
    double p = 1.0;
};

struct Chi2Result {
    double statistic = 0.0;
    double df = 0.0;
    double p = 1.0;
    double log_p = 0.0;
};

/// Pearson chi-squared statistic for observed counts against equal expected
/// counts.
inline Chi2Result chi2_equal_bins(std::span<const std::size_t> counts) {
    if (counts.size() < 2) throw InputError("chi-squared needs at least two bins");
    std::size_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) throw InputError("chi-squared on empty sample");
    const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
    double stat = 0.0;
    for (auto c : counts) {
        const double diff = static_cast<double>(c) - expected;
        stat += diff * diff / expected;
    }
    Chi2Result r;
    r.statistic = stat;
    r.df = static_cast<double>(counts.size() - 1);
    r.log_p = chi2_log_sf(stat, r.df);
    r.p = chi2_sf(stat, r.df);
    return r;
}

/// Equal-width bin index on [0,1]; the last bin is closed at 1.
inline std::size_t unit_bin(double v, std::size_t bins) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("value outside [0,1]");
    const auto k = static_cast<std::size_t>(v * static_cast<double>(bins));
    return std::min(k, bins - 1);
}

inline std::vector<std::size_t> unit_histogram(std::span<const double> values, std::size_t bins) {
    if (bins == 0) throw ConfigError("bin count must be positive");
    std::vector<std::size_t> counts(bins, 0);
    for (double v : values) ++counts[unit_bin(v, bins)];
    return counts;
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

/// Kolmogorov limiting survival function Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
inline double kolmogorov_sf(double lambda) {
    if (lambda <= 0.0) return 1.0;
    const double a2 = -2.0 * lambda * lambda;
    double sum = 0.0, fac = 2.0, prev = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = fac * std::exp(a2 * k * k);
        sum += term;
        if (std::fabs(term) <= 1e-12 * prev || std::fabs(term) <= 1e-16 * sum) return std::clamp(sum, 0.0, 1.0);
        fac = -fac;
        prev = std::fabs(term);
    }
    return 1.0;  // no convergence: lambda tiny
}

/// One-sample KS against U(0,1). p from the limiting law with Stephens'
/// small-sample scaling (sqrt(n) + 0.12 + 0.11/sqrt(n)).
inline TestResult ks_uniform(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) throw InputError("ks_uniform: empty sample");
    std::vector<double> u(values.begin(), values.end());
    std::sort(u.begin(), u.end());
    double d = 0.0;
    const double nd = static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        d = std::max(d, (static_cast<double>(i) + 1.0) / nd - u[i]);
        d = std::max(d, u[i] - static_cast<double>(i) / nd);
    }
    const double sn = std::sqrt(nd);
    return {d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)};
}

// ---------------------------------------------------------------------------
// Anderson-Darling

namespace detail {

// Marsaglia & Marsaglia (2004), "Evaluating the Anderson-Darling Distribution".
inline double ad_inf_cdf(double z) {
    if (z < 2.0)
        return std::exp(-1.2337141 / z) / std::sqrt(z) *
               (2.00012 + (.247105 - (.0649821 - (.0347962 - (.011672 - .00168691 * z) * z) * z) * z) * z);
    return std::exp(-std::exp(1.0776 - (2.30695 - (.43424 - (.082433 - (.008056 - .0003146 * z) * z) * z) * z) * z));
}

inline double ad_errfix(double n, double x) {
    if (x > .8)
        return (-130.2137 + (745.2337 - (1705.091 - (1950.646 - (1116.360 - 255.7844 * x) * x) * x) * x) * x) / n;
    const double c = .01265 + .1757 / n;
    if (x < c) {
        double t = x / c;
        t = std::sqrt(t) * (1. - t) * (49 * t - 102);
        return t * (.0037 / (n * n) + .00078 / n + .00006) / n;
    }
    const double y = (x - c) / (.8 - c);
    const double t = -.00022633 + (6.54034 - (14.6538 - (14.458 - (8.259 - 1.91864 * y) * y) * y) * y) * y;
    return t * (.04213 / n + .01365 / (n * n));
}

}  // namespace detail

/// CDF of the Anderson-Darling statistic for sample size n.
inline double anderson_darling_cdf(std::size_t n, double z) {
    if (z <= 0.0) return 0.0;
    if (z > 20.0) return 1.0;  // beyond the fitted range; upper tail < 1e-8
    const double x = detail::ad_inf_cdf(z);
    return std::clamp(x + detail::ad_errfix(static_cast<double>(n), x), 0.0, 1.0);
}

inline TestResult ad_uniform(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) throw InputError("ad_uniform: empty sample");
    std::vector<double> u(values.begin(), values.end());
    std::sort(u.begin(), u.end());
    const double nd = static_cast<double>(n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = u[i], hi = u[n - 1 - i];
        if (lo <= 0.0 || hi >= 1.0) return {std::numeric_limits<double>::infinity(), 0.0};
        s += (2.0 * static_cast<double>(i) + 1.0) * (std::log(lo) + std::log1p(-hi));
    }
    const double a2 = -nd - s / nd;
    return {a2, 1.0 - anderson_darling_cdf(n, a2)};
}

// ---------------------------------------------------------------------------
// Cramer-von Mises

/// Limiting CDF of W^2 (Anderson & Darling 1952 series in K_{1/4}).
inline double cvm_limit_cdf(double z) {
    if (z <= 0.0) return 0.0;
    if (z < 0.005) return 0.0;
    double sum = 0.0;
    double coef = 1.0;  // Gamma(j + 1/2) / (Gamma(1/2) j!)
    for (int j = 0; j < 500; ++j) {
        if (j > 0) coef *= (j - 0.5) / j;
        const double y = 4.0 * j + 1.0;
        const double q = y * y / (16.0 * z);
        if (q > 700.0) break;
        const double term = coef * std::sqrt(y) * std::exp(-q) * boost::math::cyl_bessel_k(0.25, q);
        sum += term;
        if (term < 1e-15 * sum) break;
    }
    return std::clamp(sum / (std::numbers::pi * std::sqrt(z)), 0.0, 1.0);
}

/// Returns the Stephens-modified statistic (W^2 - 0.4/n + 0.6/n^2)(1 + 1/n)
/// and its upper-tail p under the limiting law.
inline TestResult cvm_uniform(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) throw InputError("cvm_uniform: empty sample");
    std::vector<double> u(values.begin(), values.end());
    std::sort(u.begin(), u.end());
    const double nd = static_cast<double>(n);
    double w2 = 1.0 / (12.0 * nd);
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = u[i] - (2.0 * static_cast<double>(i) + 1.0) / (2.0 * nd);
        w2 += diff * diff;
    }
    const double modified = (w2 - 0.4 / nd + 0.6 / (nd * nd)) * (1.0 + 1.0 / nd);
    return {modified, 1.0 - cvm_limit_cdf(modified)};
}

/// Chi-squared test of values in [0,1] over equal-width bins.
inline Chi2Result chi2_uniform(std::span<const double> values, std::size_t bins) {
    const auto counts = unit_histogram(values, bins);
    return chi2_equal_bins(counts);
}

}  // namespace sbmoo::stats
