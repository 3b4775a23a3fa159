#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "robustlr/calibration.hpp"
#include "robustlr/model.hpp"

namespace robustlr {

enum class EstimatorBranch { A1, A2, A3 };

const char* branch_name(EstimatorBranch b);

struct EstimatorOutput {
  Eigen::VectorXd beta_hat;
  EstimatorBranch chosen_branch = EstimatorBranch::A3;
  std::optional<double> sigma_hat;
  std::map<std::string, double> diagnostics;
};

/// Branch-selection constants of the unified estimator; must satisfy
/// C < C_prime < C_dprime. trim_fraction == 0 means "derive from eta".
struct MetaConfig {
  double C = calib::kMetaC;
  double C_prime = calib::kMetaCPrime;
  double C_dprime = calib::kMetaCDoublePrime;
  double trim_fraction = 0.0;
};

/// Mean after discarding the ceil(eps n) largest and smallest values.
/// Throws on an empty list or when trimming would discard everything.
double trimmed_mean(std::vector<double> values, double eps);

/// Coordinate-wise robust moment estimator: beta_j is the trimmed mean of
/// {y_i x_ij} over samples where both are present (at least 10 required per
/// coordinate), trim fraction 2 eta (1 + margin) capped at 0.4.
EstimatorOutput estimator_a2(const std::vector<MaskedSample>& data, double eta);

/// Robust regression via iterative residual trimming: drops samples that
/// contain any erased entry, fits least squares, then repeats
/// {fit, drop the eps n largest absolute residuals, refit} for a fixed
/// iteration count with eps = eta (d + 1). Requires eta (d + 1) < 0.49.
EstimatorOutput estimator_a1(const std::vector<MaskedSample>& data, double eta);

/// The trivial estimator: always the zero vector.
EstimatorOutput estimator_a3(int d);

/// Plain complete-case least squares (no trimming); the "drop erased rows
/// and hope" baseline.
Eigen::VectorXd ols_complete_case(const std::vector<MaskedSample>& data);

/// Noise-level estimate: square root of the trimmed mean of squared
/// residuals y - beta_ref'x over complete samples.
double sigma_hat_residual(const std::vector<MaskedSample>& data, const Eigen::VectorXd& beta_ref,
                          double eta);

/// Meta-estimator that adaptively picks among A1/A2/A3 using the estimated
/// error bounds e1 = eta d sigma_hat and e2 = eta sqrt(d) sqrt(E[y^2]):
/// returns beta1 when A1 is in regime and C e1 < e2, else beta2 when
/// |beta2| > C' e2, else zero. The output is bitwise one of the three.
EstimatorOutput unified_estimator(const std::vector<MaskedSample>& data, double eta,
                                  const MetaConfig& cfg = {});

/// Euclidean error |beta_hat - beta|.
double estimation_error(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta);

}  // namespace robustlr
