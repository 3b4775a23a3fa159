// Test-only numerical oracles, deliberately independent of the library's
// implementation paths (no erfc, no closed-form KL, no coupling internals).
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "robustlr/rng.hpp"

namespace oracle {

// Composite Simpson on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  if (intervals % 2 != 0) ++intervals;
  const double h = (b - a) / intervals;
  double acc = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

inline double normal_pdf(double x, double mean = 0.0, double sd = 1.0) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

// Standard normal CDF by quadrature of the density, not erfc.
inline double normal_cdf(double x) {
  if (x < -12.0) return 0.0;
  if (x > 12.0) return 1.0;
  if (x >= 0.0) return 0.5 + simpson([](double t) { return normal_pdf(t); }, 0.0, x, 4000);
  return 0.5 - simpson([](double t) { return normal_pdf(t); }, x, 0.0, 4000);
}

// Total variation distance between two univariate Gaussians by quadrature of
// |p - q| / 2.
inline double tv_univariate(double m1, double sd1, double m2, double sd2) {
  const double lo = std::min(m1 - 10.0 * sd1, m2 - 10.0 * sd2);
  const double hi = std::max(m1 + 10.0 * sd1, m2 + 10.0 * sd2);
  return 0.5 * simpson(
                   [&](double x) { return std::abs(normal_pdf(x, m1, sd1) - normal_pdf(x, m2, sd2)); },
                   lo, hi, 20000);
}

// E_{z ~ N(0, var)}[ g(z) ] by quadrature.
inline double gaussian_expectation(const std::function<double(double)>& g, double var,
                                   int intervals = 20000) {
  const double sd = std::sqrt(var);
  return simpson([&](double z) { return g(z) * normal_pdf(z, 0.0, sd); }, -12.0 * sd, 12.0 * sd,
                 intervals);
}

// Log-density of N(mean, cov), solved directly (used by the Monte Carlo KL
// oracle; the production code's closed form never appears here).
inline double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                         const Eigen::MatrixXd& cov) {
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  const Eigen::VectorXd diff = x - mean;
  const double quad = diff.dot(ldlt.solve(diff));
  const double logdet = ldlt.vectorD().array().log().sum();
  return -0.5 * (quad + logdet + x.size() * std::log(2.0 * M_PI));
}

inline Eigen::MatrixXd random_spd(int d, robustlr::RngStream& rng, double ridge = 0.5) {
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
  return a * a.transpose() / d + ridge * Eigen::MatrixXd::Identity(d, d);
}

inline Eigen::VectorXd random_vector(int d, robustlr::RngStream& rng, double scale = 1.0) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = scale * rng.normal();
  return v;
}

}  // namespace oracle
