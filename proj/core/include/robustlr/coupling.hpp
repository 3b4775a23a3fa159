#pragma once

#include <Eigen/Dense>
#include <utility>
#include <variant>
#include <vector>

#include "robustlr/gaussian.hpp"
#include "robustlr/model.hpp"
#include "robustlr/rng.hpp"

namespace robustlr {

/// One draw from a coupling of the labeled-example distributions under the
/// two hypotheses of a regime pair.
struct CoupledPair {
  LabeledSample sample0;
  LabeledSample sample1;
};

/// Parameters of the four regime couplings. Coefficient layout follows the
/// corresponding make_*_pair constructor in model.hpp.
struct SmallBetaSpec {
  int d;
  double b;      // norm of the coupled coefficient block
  double sigma;  // must be positive; the conditional covariance degenerates at 0
  double r = 0.0;  // shared first coefficient; 0 disables the extension
};
struct BigEtaSpec {
  int d;
  double s;  // coefficient of every coordinate, beta = s 1 vs -s 1
  double sigma = 0.0;
};
struct IntermEtaSpec {
  int d;  // even
  double s;
  double eps;  // in [0, 1]
  double sigma = 0.0;
};
struct SmallEtaSpec {
  int d;  // even
  double B;  // shared-half coefficient scale, beta_first = B/sqrt(d)
  double E;  // flipped-half coefficient scale in (0, 1), beta_second = +-E/sqrt(d)
  double sigma;  // must be positive and >= E
};

using CouplingSpec = std::variant<SmallBetaSpec, BigEtaSpec, IntermEtaSpec, SmallEtaSpec>;

int dimension(const CouplingSpec& spec);
Regime regime_of(const CouplingSpec& spec);
HypothesisPair hypothesis_pair(const CouplingSpec& spec);

/// Half-open [begin, end) runs of constant coefficient magnitude; random
/// coordinate permutations must stay within these blocks to preserve the
/// marginals.
std::vector<std::pair<int, int>> coefficient_blocks(const CouplingSpec& spec);

/// Analytic upper bound on the expected number of disagreeing coordinates,
/// with the calibrated constants of calibration.hpp filled in.
double disagreement_bound(const CouplingSpec& spec);

/// Maximal coupling of equal-variance univariate Gaussians (reflection
/// coupling): marginals are exactly p and q, Pr[x != x'] equals the exact TV
/// distance, and on disagreement sign(x - x') = sign(mean_p - mean_q).
std::pair<double, double> maximal_coupling_univariate(const UnivariateGaussian& p,
                                                      const UnivariateGaussian& q, RngStream& rng);

/// Chain of one-coordinate maximal couplings between N(mu, cov) and
/// N(mu', cov): expected disagreements equal the sum over i of
/// TV(Q_i, Q_{i+1}) for the interpolated-mean Gaussians Q_i, and coordinates
/// with mu_i == mu'_i never disagree. Precomputes the per-step conditionals
/// once; draw() is O(d^2).
class HybridCoupling {
 public:
  /// Dense covariance; must be nonsingular (the per-step conditionals come
  /// from its precision matrix).
  HybridCoupling(Eigen::VectorXd mu, Eigen::VectorXd mu_prime, const Eigen::MatrixXd& cov);

  /// Structured covariance (I + rho w w')^{-1} = I - kappa w w' with
  /// kappa = rho/(1 + rho |w|^2); draw() is O(d).
  static HybridCoupling rank_one(Eigen::VectorXd mu, Eigen::VectorXd mu_prime, Eigen::VectorXd w,
                                 double kappa);

  std::pair<Eigen::VectorXd, Eigen::VectorXd> draw(RngStream& rng) const;

  /// Exact per-step disagreement probabilities TV(Q_i, Q_{i+1}); zero at
  /// coordinates where the means agree.
  const std::vector<double>& step_tv() const { return step_tv_; }
  double expected_disagreements() const;

 private:
  HybridCoupling() = default;
  void finalize_steps();

  Eigen::VectorXd mu_, mu_prime_, delta_;
  // dense path
  bool dense_ = false;
  Eigen::MatrixXd precision_;
  Eigen::MatrixXd sqrt_cov_;
  // rank-one path
  Eigen::VectorXd w_;
  double rho_ = 0.0;
  double alpha_ = 0.0;  // sampling transform I - alpha w w'
  // shared per-step data
  Eigen::VectorXd cond_var_;
  std::vector<double> step_tv_;
};

/// One draw from the chain coupling above (convenience wrapper).
std::pair<Eigen::VectorXd, Eigen::VectorXd> hybrid_coupling(const Eigen::VectorXd& mu,
                                                            const Eigen::VectorXd& mu_prime,
                                                            const Eigen::MatrixXd& cov,
                                                            RngStream& rng);

/// Coupling of N(mu, cov) and N(mu', cov) whose means differ only at
/// coordinate `i` (0-based): that coordinate disagrees with probability
/// exactly TV(Q, Q'), all others are shared.
std::pair<Eigen::VectorXd, Eigen::VectorXd> one_step_coupling(const MultivariateGaussian& q,
                                                              const MultivariateGaussian& q_prime,
                                                              int i, RngStream& rng);

/// Coupling of N(0, I_d) | sum = t with N(0, I_d) | sum = t': the first d-1
/// coordinates go through the chain coupling, the last ones absorb the sums.
/// Expected disagreements <= 1 + |t - t'|; t == t' yields identical vectors.
std::pair<Eigen::VectorXd, Eigen::VectorXd> sum_conditioned_coupling(int d, double t,
                                                                     double t_prime,
                                                                     RngStream& rng);

CoupledPair draw_small_beta_pair(const SmallBetaSpec& spec, RngStream& rng);
CoupledPair draw_big_eta_pair(const BigEtaSpec& spec, RngStream& rng);
CoupledPair draw_interm_eta_pair(const IntermEtaSpec& spec, RngStream& rng);
CoupledPair draw_small_eta_pair(const SmallEtaSpec& spec, RngStream& rng);
CoupledPair draw_coupled_pair(const CouplingSpec& spec, RngStream& rng);

/// Monte Carlo disagreement statistics over independent coupled draws.
struct DisagreementStats {
  double mean_coord_disagreements = 0.0;
  double label_disagreement_rate = 0.0;
  std::vector<double> per_coordinate_rates;
  int trials = 0;
  double std_error = 0.0;  // of the mean disagreement count
};

/// Runs `trials` independent draws (trials >= 100) on child streams split by
/// trial index; identical output for any thread count.
DisagreementStats estimate_disagreements(const CouplingSpec& spec, int trials, const RngStream& rng,
                                         int threads = 1);

}  // namespace robustlr
