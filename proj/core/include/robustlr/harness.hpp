#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "robustlr/adversary.hpp"
#include "robustlr/coupling.hpp"
#include "robustlr/estimator.hpp"

namespace robustlr {

// ---------------------------------------------------------------------------
// Regime table

struct GridCell {
  double eta = 0.0;
  int d = 0;
  double beta_norm = 0.0;
  double sigma = 1.0;
  int n = 0;
};

struct ExperimentConfig {
  std::vector<GridCell> cells;
  int trials = 3;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// The frozen 3x4 grid used by the acceptance suite: one row per eta regime,
/// four |beta| columns each.
ExperimentConfig default_regime_grid();

/// Parses {"cells":[{"eta":..,"d":..,"beta_norm":..,"sigma":..,"n":..},...],
/// "trials":..,"seed":..}; alternatively "eta"/"d"/"beta_over_sigma" lists
/// plus "sigma"/"n" scalars are crossed into cells.
ExperimentConfig parse_experiment_config(const std::string& json_text);

struct ResultRecord {
  std::string regime;
  int d = 0;
  double eta = 0.0, beta_norm = 0.0, sigma = 0.0;
  int n = 0;
  std::uint64_t seed = 0;
  std::string estimator, adversary;
  double error_median = 0.0, error_iqr = 0.0;
  double bound_upper = 0.0, bound_lower = 0.0;
};

/// CSV with the fixed header
/// regime,d,eta,beta_norm,sigma,n,seed,estimator,adversary,error_median,error_iqr,bound_upper,bound_lower
std::string results_to_csv(const std::vector<ResultRecord>& records);

/// Which of A1/A2/A3 the regime tables predict to have the least error.
const char* predicted_winner(const GridCell& cell);

/// True when the cell's parameters sit at least `factor` inside every
/// boundary of its regime row and |beta| column; winner assertions apply
/// only to interior cells.
bool cell_is_interior(const GridCell& cell, double factor = 4.0);

struct WinnerCheck {
  GridCell cell;
  bool interior = false;
  std::string predicted;
  std::string best_estimator;
  double predicted_error = 0.0;  // max over adversaries of the median error
  double best_error = 0.0;
  bool winner_ok = true;  // predicted within factor 2 of best (interior only)
  double worst_unified_ratio = 0.0;  // max over adversaries of unified/best
  bool unified_ok = true;            // ratio <= 5 on every adversary
};

struct RegimeTableReport {
  std::vector<ResultRecord> records;
  std::vector<WinnerCheck> checks;
  bool pass = false;
};

RegimeTableReport run_regime_table(const ExperimentConfig& cfg);
std::string to_json_string(const RegimeTableReport& report);

// ---------------------------------------------------------------------------
// Coupling verification

/// The four regime couplings at the reference parameters used throughout the
/// verification suite.
std::vector<CouplingSpec> reference_specs();

struct CouplingVerificationConfig {
  std::vector<CouplingSpec> specs = reference_specs();
  int n_marginal = 100000;  // draws for the KS / moment suite
  int budget_trials = 10000;
  double alpha = 0.01;  // per-family level; Bonferroni-adjusted internally
  std::optional<double> premise_eta;  // when set, also check mean <= eta d (1 - c)
  double premise_c = 0.1;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct SpecVerification {
  std::string regime;
  int d = 0;
  // marginal suite
  double max_coord_ks = 0.0, coord_ks_critical = 0.0;
  double label_ks0 = 0.0, label_ks1 = 0.0;
  double residual_ks0 = 0.0, residual_ks1 = 0.0;  // sigma > 0 only
  double max_residual_abs = 0.0;                  // sigma == 0 only
  double max_moment_z = 0.0, moment_z_threshold = 0.0;
  double label_equality_rate = 0.0;
  bool marginals_ok = false;
  // disagreement budget suite
  double mean_disagreements = 0.0, std_error = 0.0, budget_bound = 0.0;
  double label_disagreement_rate = 0.0;
  bool budget_ok = false;
  // optional Eq.-style premise against a target eta
  bool premise_checked = false;
  double premise_bound = 0.0;
  bool premise_ok = true;

  bool pass = false;
};

struct CouplingVerificationResult {
  std::vector<SpecVerification> specs;
  bool pass = false;
};

CouplingVerificationResult run_coupling_verification(const CouplingVerificationConfig& cfg);
std::string to_json_string(const CouplingVerificationResult& result);

// ---------------------------------------------------------------------------
// Forced-error demonstration

struct ForcedErrorConfig {
  CouplingSpec spec;
  double eta = 0.0;
  int n = 0;
  int runs = 20;
  std::vector<std::string> estimators = {"a1", "a2", "a3", "unified", "ols"};
  CorruptionMode mode = CorruptionMode::Erase;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct EstimatorForcedError {
  std::string name;
  int evaluated = 0;  // successful runs on which the estimator produced output
  int refused = 0;    // runs where preconditions made it throw
  double min_forced_error = std::numeric_limits<double>::infinity();
  bool bound_ok = true;  // forced error >= half separation on every run, exact
};

struct ForcedErrorResult {
  int runs = 0, successes = 0;
  double success_rate = 0.0;
  double separation = 0.0, half_separation = 0.0;
  double theory_lower_bound = 0.0;  // the matching Omega(.) rate for the regime
  long edit_cap = 0;
  long max_edits_per_coordinate = 0;
  bool edits_ok = true;
  bool datasets_identical_ok = true;
  bool no_erasures_ok = true;  // replace mode must not contain the erasure symbol
  std::vector<EstimatorForcedError> estimators;
  bool pass = false;
};

ForcedErrorResult run_forced_error_demo(const ForcedErrorConfig& cfg);
std::string to_json_string(const ForcedErrorResult& result);

/// Runs the estimator named by tag ("a1", "a2", "a3", "unified", "ols").
EstimatorOutput run_named_estimator(const std::string& tag,
                                    const std::vector<MaskedSample>& data, double eta);

std::string to_json_string(const EstimatorOutput& out);
std::string to_json_string(const DisagreementStats& stats);

// ---------------------------------------------------------------------------
// Calibration

/// Measures the empirical ratios behind the constants in calibration.hpp on
/// the reference grid and returns them as a JSON document.
std::string run_calibration(std::uint64_t seed, int threads);

}  // namespace robustlr
