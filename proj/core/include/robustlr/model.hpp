#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "robustlr/gaussian.hpp"
#include "robustlr/rng.hpp"

namespace robustlr {

/// Ground truth of the linear model: X ~ N(0, I_d), y = beta'X + xi with
/// xi ~ N(0, sigma^2).
struct RegressionInstance {
  int d = 0;
  Eigen::VectorXd beta;
  double sigma = 0.0;

  RegressionInstance(int dim, Eigen::VectorXd b, double noise);
};

struct LabeledSample {
  Eigen::VectorXd x;
  double y = 0.0;
};

/// A sample after adversarial editing: any covariate entry and the label may
/// be erased (the erasure symbol is represented by present=false / nullopt).
/// Values at absent coordinates are unspecified.
struct MaskedSample {
  Eigen::VectorXd x;
  std::vector<bool> present;
  std::optional<double> y;

  static MaskedSample from_labeled(const LabeledSample& s);
  bool complete() const;
};

enum class Regime { SmallBeta, BigEta, IntermEta, SmallEta };

const char* regime_name(Regime r);

/// Two-point hypothesis pair (beta0 vs beta1) with shared noise level.
/// All constructors produce |beta0| == |beta1|.
struct HypothesisPair {
  Eigen::VectorXd beta0;
  Eigen::VectorXd beta1;
  double sigma = 0.0;
  Regime regime = Regime::SmallBeta;

  HypothesisPair(Eigen::VectorXd b0, Eigen::VectorXd b1, double noise, Regime tag);
  double separation() const { return (beta0 - beta1).norm(); }
};

/// n i.i.d. draws from the clean model.
std::vector<LabeledSample> sample_clean(const RegressionInstance& inst, int n, RngStream& rng);

/// Marginal law of the label: N(0, |beta|^2 + sigma^2).
UnivariateGaussian label_distribution(const RegressionInstance& inst);

/// Small-|beta| pair. With r = 0: beta0 = (b/sqrt(d)) 1, beta1 = -beta0.
/// With r > 0 (requires d >= 2): first coordinate r in both, remaining d-1
/// coordinates +-b/sqrt(d-1), so the coupled block has norm exactly b and
/// |beta| = sqrt(r^2 + b^2).
HypothesisPair make_small_beta_pair(int d, double b, double sigma, double r = 0.0);

/// Large-eta pair: beta0 = s 1_d, beta1 = -s 1_d.
HypothesisPair make_big_eta_pair(int d, double s, double sigma = 0.0);

/// Medium-eta pair (d even): first d/2 coordinates +-(s eps), last d/2 equal s.
HypothesisPair make_interm_eta_pair(int d, double s, double eps, double sigma = 0.0);

/// eps = (eta - 2/((1-cprime) d)) sqrt(d) / C for the medium-eta regime.
/// Throws regime_error when eta is below the threshold 2/((1-cprime) d).
double interm_epsilon(double eta, int d, double cprime, double C);

/// Scale s giving a medium-eta pair with |beta| = target_norm:
/// target_norm = s sqrt(d (1 + eps^2) / 2).
double interm_scale_for_norm(double target_norm, int d, double eps);

/// Small-eta pair (d even): first half B/sqrt(d) in both hypotheses, second
/// half +-E/sqrt(d). |beta|^2 = (B^2 + E^2)/2.
HypothesisPair make_small_eta_pair(int d, double B, double E, double sigma);

/// E = (1/(2C)) min(eta d sigma, eta sqrt(d) B) for the small-eta regime.
/// Throws regime_error when the resulting E is >= 1.
double small_eta_E(double eta, int d, double sigma, double B, double C);

}  // namespace robustlr
