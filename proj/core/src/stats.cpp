#include "robustlr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace robustlr {

double normal_cdf(double x) {
  // erfc is correctly rounded by libm; this meets the <=1e-12 accuracy target
  // without a bespoke constant set.
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

namespace {

// Acklam's coefficients for the initial inverse-CDF estimate.
constexpr double kA[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                         -2.759285104469687e+02, 1.383577518672690e+02,
                         -3.066479806614716e+01, 2.506628277459239e+00};
constexpr double kB[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                         -1.556989798598866e+02, 6.680131188771972e+01,
                         -1.328068155288572e+01};
constexpr double kC[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                         -2.400758277161838e+00, -2.549732539343734e+00,
                         4.374664141464968e+00,  2.938163982698783e+00};
constexpr double kD[] = {7.784695709041462e-03, 3.224671290700398e-01,
                         2.445134137142996e+00, 3.754408661907416e+00};

double acklam_estimate(double p) {
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
           ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
           ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((kA[0] * r + kA[1]) * r + kA[2]) * r + kA[3]) * r + kA[4]) * r + kA[5]) * q /
         (((((kB[0] * r + kB[1]) * r + kB[2]) * r + kB[3]) * r + kB[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  double x = acklam_estimate(p);
  // One Halley step against the exact CDF.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  x = x - u / (1.0 + x * u / 2.0);
  return x;
}

double ks_statistic_from_sorted_cdf(std::span<const double> cdf_at_sorted) {
  const std::size_t n = cdf_at_sorted.size();
  if (n == 0) throw std::invalid_argument("ks_statistic: empty sample");
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf_at_sorted[i];
    d = std::max(d, static_cast<double>(i + 1) / n - f);
    d = std::max(d, f - static_cast<double>(i) / n);
  }
  return d;
}

double ks_statistic_normal(std::vector<double> samples, double mean, double variance) {
  if (variance <= 0.0) throw std::invalid_argument("ks_statistic_normal: variance must be positive");
  std::sort(samples.begin(), samples.end());
  const double sd = std::sqrt(variance);
  std::vector<double> cdf(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) cdf[i] = normal_cdf((samples[i] - mean) / sd);
  return ks_statistic_from_sorted_cdf(cdf);
}

double ks_critical_value(double alpha, std::size_t n) {
  if (!(alpha > 0.0 && alpha < 1.0) || n == 0)
    throw std::invalid_argument("ks_critical_value: need alpha in (0,1), n >= 1");
  return std::sqrt(std::log(2.0 / alpha) / 2.0) / std::sqrt(static_cast<double>(n));
}

double chi_square_critical(double alpha, std::size_t df) {
  if (!(alpha > 0.0 && alpha < 1.0) || df == 0)
    throw std::invalid_argument("chi_square_critical: need alpha in (0,1), df >= 1");
  const double z = normal_quantile(1.0 - alpha);
  const double k = static_cast<double>(df);
  const double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
  return k * t * t * t;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double interquartile_range(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("interquartile_range: empty sample");
  std::sort(values.begin(), values.end());
  const auto quantile = [&](double q) {
    const double h = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return quantile(0.75) - quantile(0.25);
}

}  // namespace robustlr
