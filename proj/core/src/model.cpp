#include "robustlr/model.hpp"

#include <cmath>
#include <stdexcept>

#include "robustlr/errors.hpp"

namespace robustlr {

RegressionInstance::RegressionInstance(int dim, Eigen::VectorXd b, double noise)
    : d(dim), beta(std::move(b)), sigma(noise) {
  if (d <= 0 || beta.size() != d)
    throw std::invalid_argument("RegressionInstance: beta length must equal d");
  if (sigma < 0.0) throw std::invalid_argument("RegressionInstance: sigma must be nonnegative");
}

MaskedSample MaskedSample::from_labeled(const LabeledSample& s) {
  MaskedSample m;
  m.x = s.x;
  m.present.assign(static_cast<std::size_t>(s.x.size()), true);
  m.y = s.y;
  return m;
}

bool MaskedSample::complete() const {
  if (!y.has_value()) return false;
  for (bool p : present)
    if (!p) return false;
  return true;
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::SmallBeta: return "small-beta";
    case Regime::BigEta: return "big-eta";
    case Regime::IntermEta: return "interm-eta";
    case Regime::SmallEta: return "small-eta";
  }
  return "unknown";
}

HypothesisPair::HypothesisPair(Eigen::VectorXd b0, Eigen::VectorXd b1, double noise, Regime tag)
    : beta0(std::move(b0)), beta1(std::move(b1)), sigma(noise), regime(tag) {
  if (beta0.size() != beta1.size())
    throw std::invalid_argument("HypothesisPair: hypothesis vectors differ in length");
  if (std::abs(beta0.norm() - beta1.norm()) > 1e-9)
    throw std::invalid_argument("HypothesisPair: constructions must be norm-symmetric");
}

std::vector<LabeledSample> sample_clean(const RegressionInstance& inst, int n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("sample_clean: n must be >= 1");
  std::vector<LabeledSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    LabeledSample s;
    s.x.resize(inst.d);
    for (int j = 0; j < inst.d; ++j) s.x[j] = rng.normal();
    s.y = inst.beta.dot(s.x) + inst.sigma * rng.normal();
    out.push_back(std::move(s));
  }
  return out;
}

UnivariateGaussian label_distribution(const RegressionInstance& inst) {
  return {0.0, inst.beta.squaredNorm() + inst.sigma * inst.sigma};
}

HypothesisPair make_small_beta_pair(int d, double b, double sigma, double r) {
  if (d < 1 || b < 0.0 || r < 0.0)
    throw std::invalid_argument("make_small_beta_pair: bad parameters");
  if (r > 0.0 && d < 2)
    throw std::invalid_argument("make_small_beta_pair: r > 0 requires d >= 2");
  Eigen::VectorXd beta0(d), beta1(d);
  if (r == 0.0) {
    beta0.setConstant(b / std::sqrt(static_cast<double>(d)));
    beta1 = -beta0;
  } else {
    const double coef = b / std::sqrt(static_cast<double>(d - 1));
    beta0.setConstant(coef);
    beta1.setConstant(-coef);
    beta0[0] = r;
    beta1[0] = r;
  }
  return HypothesisPair(std::move(beta0), std::move(beta1), sigma, Regime::SmallBeta);
}

HypothesisPair make_big_eta_pair(int d, double s, double sigma) {
  if (d < 1 || s < 0.0) throw std::invalid_argument("make_big_eta_pair: bad parameters");
  Eigen::VectorXd beta0 = Eigen::VectorXd::Constant(d, s);
  Eigen::VectorXd beta1 = -beta0;
  return HypothesisPair(std::move(beta0), std::move(beta1), sigma, Regime::BigEta);
}

HypothesisPair make_interm_eta_pair(int d, double s, double eps, double sigma) {
  if (d < 2 || d % 2 != 0)
    throw std::invalid_argument("make_interm_eta_pair: d must be even and positive");
  if (s < 0.0 || eps < 0.0 || eps > 1.0)
    throw std::invalid_argument("make_interm_eta_pair: need s >= 0 and eps in [0,1]");
  const int h = d / 2;
  Eigen::VectorXd beta0(d), beta1(d);
  beta0.head(h).setConstant(s * eps);
  beta0.tail(h).setConstant(s);
  beta1 = beta0;
  beta1.head(h).setConstant(-s * eps);
  return HypothesisPair(std::move(beta0), std::move(beta1), sigma, Regime::IntermEta);
}

double interm_epsilon(double eta, int d, double cprime, double C) {
  if (d < 1 || !(cprime > 0.0 && cprime < 0.25) || C <= 0.0)
    throw std::invalid_argument("interm_epsilon: bad parameters");
  const double threshold = 2.0 / ((1.0 - cprime) * static_cast<double>(d));
  if (eta < threshold)
    throw regime_error("interm_epsilon: eta below 2/((1-c')d)");
  return (eta - threshold) * std::sqrt(static_cast<double>(d)) / C;
}

double interm_scale_for_norm(double target_norm, int d, double eps) {
  if (target_norm < 0.0 || d < 1)
    throw std::invalid_argument("interm_scale_for_norm: bad parameters");
  return target_norm / std::sqrt(static_cast<double>(d) * (1.0 + eps * eps) / 2.0);
}

HypothesisPair make_small_eta_pair(int d, double B, double E, double sigma) {
  if (d < 2 || d % 2 != 0)
    throw std::invalid_argument("make_small_eta_pair: d must be even and positive");
  if (B < 0.0) throw std::invalid_argument("make_small_eta_pair: B must be nonnegative");
  const int h = d / 2;
  const double root_d = std::sqrt(static_cast<double>(d));
  Eigen::VectorXd beta0(d), beta1(d);
  beta0.head(h).setConstant(B / root_d);
  beta0.tail(h).setConstant(E / root_d);
  beta1 = beta0;
  beta1.tail(h).setConstant(-E / root_d);
  return HypothesisPair(std::move(beta0), std::move(beta1), sigma, Regime::SmallEta);
}

double small_eta_E(double eta, int d, double sigma, double B, double C) {
  if (eta < 0.0 || d < 1 || sigma < 0.0 || B < 0.0 || C <= 0.0)
    throw std::invalid_argument("small_eta_E: bad parameters");
  const double dd = static_cast<double>(d);
  const double e = std::min(eta * dd * sigma, eta * std::sqrt(dd) * B) / (2.0 * C);
  if (e >= 1.0) throw regime_error("small_eta_E: resulting E >= 1 (outside small-eta regime)");
  return e;
}

}  // namespace robustlr
