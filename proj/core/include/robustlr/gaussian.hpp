#pragma once

#include <Eigen/Dense>

#include "robustlr/rng.hpp"

namespace robustlr {

struct UnivariateGaussian {
  double mean = 0.0;
  double variance = 1.0;  // must be >= 0
};

/// Mean vector plus symmetric positive-semidefinite covariance.
/// Symmetry is enforced at construction (tolerance 1e-12 entrywise);
/// positive-semidefiniteness (eigenvalues >= -1e-10, relative) is checked
/// where a factorization is actually needed.
struct MultivariateGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  MultivariateGaussian(Eigen::VectorXd mu, Eigen::MatrixXd cov);
  Eigen::Index dimension() const { return mean.size(); }
};

/// (1/sqrt(2)) |mu1 - mu2| / sigma, an upper bound on the total variation
/// distance between equal-variance univariate Gaussians.
/// Requires g1.variance == g2.variance > 0.
double tv_bound_univariate(const UnivariateGaussian& g1, const UnivariateGaussian& g2);

/// Exact total variation distance between equal-variance univariate
/// Gaussians: 2 Phi(|mu1-mu2| / (2 sigma)) - 1.
double tv_exact_univariate_equal_var(const UnivariateGaussian& g1, const UnivariateGaussian& g2);

/// KL divergence between multivariate Gaussians,
///   (1/2) (log |S2|/|S1| - d + tr(S2^-1 S1) + (m2-m1)' S2^-1 (m2-m1)).
/// Throws singular_matrix_error when q's covariance is singular.
double kl_gaussians(const MultivariateGaussian& p, const MultivariateGaussian& q);

/// Pinsker: sqrt(kl / 2). The result may exceed 1; callers clamp if needed.
double pinsker_tv_bound(double kl);

/// Inverse of I + u v' via the Sherman-Morrison formula,
///   (I + u v')^-1 = I - u v' / (1 + v'u).
/// Throws singular_matrix_error when |1 + v'u| < 1e-12.
Eigen::MatrixXd sherman_morrison_inverse(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Distribution of X ~ N(0, I_d) conditioned on u'X + xi = r with
/// xi ~ N(0, sigma^2):  N( r u / (|u|^2 + sigma^2), I - u u' / (|u|^2 + sigma^2) ).
MultivariateGaussian conditional_given_linear(int d, const Eigen::VectorXd& u, double sigma,
                                              double r);

/// One draw from g. Uses a symmetric eigendecomposition square root, so
/// rank-deficient covariances (exactly singular conditionals) are fine;
/// eigenvalues below -1e-10 (relative to the largest) are rejected, small
/// negatives are clamped to zero.
Eigen::VectorXd sample_gaussian(const MultivariateGaussian& g, RngStream& rng);

/// Draw from N(0, I_d) conditioned on sum_i x_i = t, i.e. from
/// N((t/d) 1, I - 1 1'/d). The output sums to t up to roundoff.
Eigen::VectorXd sample_sum_conditioned(int d, double t, RngStream& rng);

}  // namespace robustlr
