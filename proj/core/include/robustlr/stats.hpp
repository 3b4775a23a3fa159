#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace robustlr {

/// Standard normal CDF, accurate to well below 1e-12 over the double range.
double normal_cdf(double x);

/// Standard normal quantile (Acklam's rational approximation with one
/// Halley refinement step; absolute error below 1e-12 on (1e-300, 1-1e-16)).
double normal_quantile(double p);

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against the CDF values
/// `cdf_at_sorted`, which must be the model CDF evaluated at the samples in
/// ascending order.
double ks_statistic_from_sorted_cdf(std::span<const double> cdf_at_sorted);

/// KS statistic of (unsorted) samples against a N(mean, variance) model.
double ks_statistic_normal(std::vector<double> samples, double mean, double variance);

/// Asymptotic critical value for the two-sided KS test: reject at level
/// `alpha` when the statistic exceeds this.
double ks_critical_value(double alpha, std::size_t n);

/// Upper quantile of the chi-square distribution with `df` degrees of freedom
/// (Wilson-Hilferty approximation; adequate for goodness-of-fit gating).
double chi_square_critical(double alpha, std::size_t df);

/// Median of a sample (averages the middle pair for even sizes). Copies.
double median(std::vector<double> values);

/// Interquartile range (type-7 quantiles). Copies.
double interquartile_range(std::vector<double> values);

}  // namespace robustlr
