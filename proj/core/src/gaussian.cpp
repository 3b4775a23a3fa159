#include "robustlr/gaussian.hpp"

#include <cmath>
#include <stdexcept>

#include "robustlr/errors.hpp"
#include "robustlr/stats.hpp"

namespace robustlr {

namespace {
constexpr double kSymmetryTol = 1e-12;
constexpr double kPsdTol = 1e-10;
constexpr double kPivotTol = 1e-12;
}  // namespace

MultivariateGaussian::MultivariateGaussian(Eigen::VectorXd mu, Eigen::MatrixXd cov)
    : mean(std::move(mu)), covariance(std::move(cov)) {
  if (covariance.rows() != covariance.cols() || covariance.rows() != mean.size())
    throw std::invalid_argument("MultivariateGaussian: dimension mismatch");
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale)
    throw std::invalid_argument("MultivariateGaussian: covariance not symmetric");
}

double tv_bound_univariate(const UnivariateGaussian& g1, const UnivariateGaussian& g2) {
  if (g1.variance != g2.variance || g1.variance <= 0.0)
    throw std::invalid_argument("tv_bound_univariate: requires equal positive variances");
  return std::abs(g1.mean - g2.mean) / (std::sqrt(2.0) * std::sqrt(g1.variance));
}

double tv_exact_univariate_equal_var(const UnivariateGaussian& g1, const UnivariateGaussian& g2) {
  if (g1.variance != g2.variance || g1.variance <= 0.0)
    throw std::invalid_argument("tv_exact_univariate_equal_var: requires equal positive variances");
  const double sd = std::sqrt(g1.variance);
  return 2.0 * normal_cdf(std::abs(g1.mean - g2.mean) / (2.0 * sd)) - 1.0;
}

double kl_gaussians(const MultivariateGaussian& p, const MultivariateGaussian& q) {
  if (p.dimension() != q.dimension())
    throw std::invalid_argument("kl_gaussians: dimension mismatch");
  const auto d = static_cast<double>(p.dimension());

  const Eigen::LDLT<Eigen::MatrixXd> ldlt_q(q.covariance);
  const Eigen::VectorXd diag_q = ldlt_q.vectorD();
  if (ldlt_q.info() != Eigen::Success || diag_q.minCoeff() <= kPivotTol * std::max(1.0, diag_q.maxCoeff()))
    throw singular_matrix_error("kl_gaussians: q covariance is singular");

  const Eigen::LDLT<Eigen::MatrixXd> ldlt_p(p.covariance);
  const Eigen::VectorXd diag_p = ldlt_p.vectorD();
  if (ldlt_p.info() != Eigen::Success || diag_p.minCoeff() <= 0.0)
    throw singular_matrix_error("kl_gaussians: p covariance is singular");

  const double log_det_ratio = diag_q.array().log().sum() - diag_p.array().log().sum();
  const double trace_term = ldlt_q.solve(p.covariance).trace();
  const Eigen::VectorXd dm = q.mean - p.mean;
  const double quad = dm.dot(ldlt_q.solve(dm));
  const double kl = 0.5 * (log_det_ratio - d + trace_term + quad);
  return std::max(0.0, kl);
}

double pinsker_tv_bound(double kl) {
  if (kl < 0.0) throw std::invalid_argument("pinsker_tv_bound: kl must be nonnegative");
  return std::sqrt(kl / 2.0);
}

Eigen::MatrixXd sherman_morrison_inverse(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size()) throw std::invalid_argument("sherman_morrison_inverse: size mismatch");
  const double pivot = 1.0 + v.dot(u);
  if (std::abs(pivot) < kPivotTol)
    throw singular_matrix_error("sherman_morrison_inverse: 1 + v'u is (near) zero");
  const auto d = u.size();
  return Eigen::MatrixXd::Identity(d, d) - (u * v.transpose()) / pivot;
}

MultivariateGaussian conditional_given_linear(int d, const Eigen::VectorXd& u, double sigma,
                                              double r) {
  if (d <= 0 || u.size() != d) throw std::invalid_argument("conditional_given_linear: bad dimension");
  if (sigma < 0.0) throw std::invalid_argument("conditional_given_linear: sigma must be nonnegative");
  const double denom = u.squaredNorm() + sigma * sigma;
  if (denom <= 0.0)
    throw std::invalid_argument("conditional_given_linear: u = 0 with sigma = 0 conditions on nothing");
  Eigen::VectorXd mean = (r / denom) * u;
  Eigen::MatrixXd cov =
      Eigen::MatrixXd::Identity(d, d) - (u * u.transpose()) / denom;
  return MultivariateGaussian(std::move(mean), std::move(cov));
}

Eigen::VectorXd sample_gaussian(const MultivariateGaussian& g, RngStream& rng) {
  const auto d = g.dimension();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.covariance);
  if (es.info() != Eigen::Success)
    throw std::invalid_argument("sample_gaussian: eigendecomposition failed");
  const Eigen::VectorXd& evals = es.eigenvalues();
  const double scale = std::max(1.0, evals.cwiseAbs().maxCoeff());
  if (evals.minCoeff() < -kPsdTol * scale)
    throw std::invalid_argument("sample_gaussian: covariance is not PSD within tolerance");
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.normal();
  // Rank-deficient square root: clamp tiny negative eigenvalues to zero.
  const Eigen::VectorXd sqrt_evals = evals.cwiseMax(0.0).cwiseSqrt();
  return g.mean + es.eigenvectors() * sqrt_evals.asDiagonal() * z;
}

Eigen::VectorXd sample_sum_conditioned(int d, double t, RngStream& rng) {
  if (d < 1) throw std::invalid_argument("sample_sum_conditioned: d must be >= 1");
  if (d == 1) return Eigen::VectorXd::Constant(1, t);
  Eigen::VectorXd z(d);
  for (int i = 0; i < d; ++i) z[i] = rng.normal();
  // Project onto the sum-zero subspace, then shift: exactly N((t/d)1, I - 11'/d).
  const double shift = (z.sum() - t) / static_cast<double>(d);
  return z.array() - shift;
}

}  // namespace robustlr
