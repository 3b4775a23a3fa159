#include "robustlr/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "robustlr/calibration.hpp"
#include "robustlr/errors.hpp"
#include "robustlr/parallel.hpp"
#include "robustlr/stats.hpp"

namespace robustlr {

using nlohmann::json;

namespace {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return json(v).dump();  // shortest round-trip representation
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(); }

}  // namespace

int resolve_thread_count(int requested) {
  if (const char* env = std::getenv("ROBUSTLR_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// ---------------------------------------------------------------------------
// Regime table

ExperimentConfig default_regime_grid() {
  ExperimentConfig cfg;
  cfg.trials = 3;
  // One row per eta regime; beta columns sweep the table boundaries.
  const struct {
    double eta;
    int d;
    int n;
    double betas[4];
  } rows[] = {
      {0.0035, 32, 20000, {0.004, 0.15, 2.0, 25.0}},  // small eta (A1 in regime)
      {0.006, 400, 30000, {0.025, 0.35, 4.0, 40.0}},  // medium eta
      {0.9, 400, 4000, {0.01, 0.3, 3.0, 30.0}},       // large eta
  };
  for (const auto& row : rows)
    for (double beta : row.betas) cfg.cells.push_back({row.eta, row.d, beta, 1.0, row.n});
  return cfg;
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  const json j = json::parse(json_text);
  ExperimentConfig cfg;
  cfg.trials = j.value("trials", 3);
  cfg.seed = j.value("seed", std::uint64_t{1});
  if (j.contains("cells")) {
    for (const auto& c : j.at("cells")) {
      GridCell cell;
      cell.eta = c.at("eta").get<double>();
      cell.d = c.at("d").get<int>();
      cell.sigma = c.value("sigma", 1.0);
      if (c.contains("beta_norm"))
        cell.beta_norm = c.at("beta_norm").get<double>();
      else
        cell.beta_norm = c.at("beta_over_sigma").get<double>() * cell.sigma;
      cell.n = c.at("n").get<int>();
      cfg.cells.push_back(cell);
    }
  } else {
    const double sigma = j.value("sigma", 1.0);
    const int n = j.at("n").get<int>();
    for (const auto& eta : j.at("eta"))
      for (const auto& d : j.at("d"))
        for (const auto& ratio : j.at("beta_over_sigma"))
          cfg.cells.push_back(
              {eta.get<double>(), d.get<int>(), ratio.get<double>() * sigma, sigma, n});
  }
  if (cfg.cells.empty()) throw std::invalid_argument("experiment config: no cells");
  return cfg;
}

namespace {

std::string eta_regime_name(const GridCell& c) {
  const double rd = std::sqrt(static_cast<double>(c.d));
  if (c.eta >= 4.0 / rd) return "large-eta";
  if (c.eta >= 0.49 / static_cast<double>(c.d)) return "medium-eta";
  return "small-eta";
}

double cell_lower_bound(const GridCell& c) {
  const double rd = std::sqrt(static_cast<double>(c.d));
  const double b = c.beta_norm, s = c.sigma;
  if (c.eta >= 4.0 / rd) return b;
  if (c.eta >= 0.49 / static_cast<double>(c.d)) {
    if (b < c.eta * rd * s) return b;
    if (b < s) return c.eta * rd * s;
    return c.eta * rd * b;
  }
  if (b < c.eta * rd * s) return b;
  if (b < s) return c.eta * rd * s;
  if (b < rd * s) return c.eta * rd * b;
  return c.eta * static_cast<double>(c.d) * s;
}

double estimator_upper_bound(const GridCell& c, const std::string& est) {
  const double rd = std::sqrt(static_cast<double>(c.d));
  if (est == "a1") return calib::kA1RateConstant * c.eta * static_cast<double>(c.d) * c.sigma;
  if (est == "a2")
    return calib::kA2RateConstant * c.eta * rd *
           std::sqrt(c.beta_norm * c.beta_norm + c.sigma * c.sigma);
  if (est == "a3") return c.beta_norm;
  return estimator_upper_bound(c, predicted_winner(c));  // unified
}

}  // namespace

const char* predicted_winner(const GridCell& c) {
  const double rd = std::sqrt(static_cast<double>(c.d));
  if (c.eta >= 4.0 / rd) return "a3";
  if (c.eta >= 0.49 / static_cast<double>(c.d))
    return c.beta_norm < c.eta * rd * c.sigma ? "a3" : "a2";
  if (c.beta_norm < c.eta * rd * c.sigma) return "a3";
  if (c.beta_norm < rd * c.sigma) return "a2";
  return "a1";
}

bool cell_is_interior(const GridCell& c, double factor) {
  const double rd = std::sqrt(static_cast<double>(c.d));
  const double large_lo = 4.0 / rd;
  const double med_lo = 0.49 / static_cast<double>(c.d);
  const double b = c.beta_norm, s = c.sigma;
  if (c.eta >= large_lo) return c.eta >= factor * large_lo;  // all beta columns
  if (c.eta >= med_lo) {
    if (!(c.eta >= factor * med_lo && c.eta <= large_lo / factor)) return false;
    if (b < c.eta * rd * s) return b <= c.eta * rd * s / factor;
    if (b < s) return b >= factor * c.eta * rd * s && b <= s / factor;
    return b >= factor * s;
  }
  if (!(c.eta > 0.0 && c.eta <= med_lo / factor)) return false;
  if (b < c.eta * rd * s) return b <= c.eta * rd * s / factor;
  if (b < s) return b >= factor * c.eta * rd * s && b <= s / factor;
  if (b < rd * s) return b >= factor * s && b <= rd * s / factor;
  return b >= factor * rd * s;
}

RegimeTableReport run_regime_table(const ExperimentConfig& cfg) {
  if (cfg.cells.empty() || cfg.trials < 1)
    throw std::invalid_argument("run_regime_table: empty grid");
  for (const auto& c : cfg.cells)
    if (c.eta < 0.0 || c.eta > 1.0 || c.d < 1 || c.n < 10 * c.d || c.sigma < 0.0 ||
        c.beta_norm < 0.0)
      throw std::invalid_argument("run_regime_table: cell outside valid ranges");

  const std::vector<std::string> adversaries = {"oblivious-erasure", "sign-flip"};
  const RngStream root(cfg.seed);
  const std::size_t ncells = cfg.cells.size();
  const std::size_t ntasks = ncells * adversaries.size() * static_cast<std::size_t>(cfg.trials);

  // errors[task] maps estimator -> error for one (cell, adversary, trial).
  std::vector<std::map<std::string, double>> errors(ntasks);

  parallel_chunks(ntasks, cfg.threads, [&](std::size_t first, std::size_t last, std::size_t) {
    for (std::size_t task = first; task < last; ++task) {
      const std::size_t trial = task % static_cast<std::size_t>(cfg.trials);
      const std::size_t rest = task / static_cast<std::size_t>(cfg.trials);
      const std::size_t adv = rest % adversaries.size();
      const GridCell& cell = cfg.cells[rest / adversaries.size()];

      RngStream rng = root.child(task);
      const double coef = cell.beta_norm / std::sqrt(static_cast<double>(cell.d));
      const RegressionInstance inst(cell.d, Eigen::VectorXd::Constant(cell.d, coef), cell.sigma);
      const auto clean = sample_clean(inst, cell.n, rng);
      const auto masked = adv == 0 ? oblivious_erasure(clean, cell.eta, rng)
                                   : sign_flip_replacement(clean, cell.eta, rng);

      auto& out = errors[task];
      const auto record = [&](const char* name, auto&& fn) {
        try {
          out[name] = estimation_error(fn(), inst.beta);
        } catch (const std::exception&) {
          out[name] = std::numeric_limits<double>::infinity();
        }
      };
      if (cell.eta * static_cast<double>(cell.d + 1) < 0.49)
        record("a1", [&] { return estimator_a1(masked, cell.eta).beta_hat; });
      record("a2", [&] { return estimator_a2(masked, cell.eta).beta_hat; });
      record("a3", [&] { return estimator_a3(cell.d).beta_hat; });
      record("unified", [&] { return unified_estimator(masked, cell.eta).beta_hat; });
      static_cast<void>(trial);
    }
  });

  RegimeTableReport report;
  report.pass = true;
  for (std::size_t ci = 0; ci < ncells; ++ci) {
    const GridCell& cell = cfg.cells[ci];
    // med[adversary][estimator]
    std::vector<std::map<std::string, double>> med(adversaries.size());
    for (std::size_t a = 0; a < adversaries.size(); ++a) {
      std::map<std::string, std::vector<double>> per_est;
      for (int t = 0; t < cfg.trials; ++t) {
        const std::size_t task =
            (ci * adversaries.size() + a) * static_cast<std::size_t>(cfg.trials) +
            static_cast<std::size_t>(t);
        for (const auto& [name, err] : errors[task]) per_est[name].push_back(err);
      }
      for (const auto& [name, errs] : per_est) {
        ResultRecord rec;
        rec.regime = eta_regime_name(cell);
        rec.d = cell.d;
        rec.eta = cell.eta;
        rec.beta_norm = cell.beta_norm;
        rec.sigma = cell.sigma;
        rec.n = cell.n;
        rec.seed = cfg.seed;
        rec.estimator = name;
        rec.adversary = adversaries[a];
        rec.error_median = median(errs);
        rec.error_iqr = interquartile_range(errs);
        rec.bound_upper = estimator_upper_bound(cell, name);
        rec.bound_lower = cell_lower_bound(cell);
        report.records.push_back(std::move(rec));
        med[a][name] = median(errs);
      }
    }

    WinnerCheck check;
    check.cell = cell;
    check.interior = cell_is_interior(cell);
    check.predicted = predicted_winner(cell);
    // Worst case over the two adversaries, matching the worst-case nature of
    // the table's claims.
    std::map<std::string, double> combined;
    for (const auto& per_adv : med)
      for (const auto& [name, e] : per_adv)
        combined[name] = std::max(combined.count(name) ? combined[name] : 0.0, e);
    check.best_error = std::numeric_limits<double>::infinity();
    for (const char* name : {"a1", "a2", "a3"}) {
      const auto it = combined.find(name);
      if (it != combined.end() && it->second < check.best_error) {
        check.best_error = it->second;
        check.best_estimator = name;
      }
    }
    check.predicted_error =
        combined.count(check.predicted) ? combined[check.predicted] : std::numeric_limits<double>::infinity();
    check.winner_ok = !check.interior || check.predicted_error <= 2.0 * check.best_error;
    check.worst_unified_ratio = 0.0;
    for (std::size_t a = 0; a < adversaries.size(); ++a) {
      double best = std::numeric_limits<double>::infinity();
      for (const char* name : {"a1", "a2", "a3"})
        if (med[a].count(name)) best = std::min(best, med[a][name]);
      const double u = med[a].count("unified") ? med[a]["unified"]
                                               : std::numeric_limits<double>::infinity();
      const double ratio = best > 0.0 ? u / best : (u == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
      check.worst_unified_ratio = std::max(check.worst_unified_ratio, ratio);
    }
    check.unified_ok = check.worst_unified_ratio <= 5.0;
    report.pass = report.pass && check.winner_ok && check.unified_ok;
    report.checks.push_back(std::move(check));
  }
  return report;
}

std::string results_to_csv(const std::vector<ResultRecord>& records) {
  std::string out =
      "regime,d,eta,beta_norm,sigma,n,seed,estimator,adversary,error_median,error_iqr,"
      "bound_upper,bound_lower\n";
  for (const auto& r : records) {
    out += r.regime;
    out += ',' + std::to_string(r.d);
    out += ',' + format_number(r.eta);
    out += ',' + format_number(r.beta_norm);
    out += ',' + format_number(r.sigma);
    out += ',' + std::to_string(r.n);
    out += ',' + std::to_string(r.seed);
    out += ',' + r.estimator;
    out += ',' + r.adversary;
    out += ',' + format_number(r.error_median);
    out += ',' + format_number(r.error_iqr);
    out += ',' + format_number(r.bound_upper);
    out += ',' + format_number(r.bound_lower);
    out += '\n';
  }
  return out;
}

std::string to_json_string(const RegimeTableReport& report) {
  json jrecords = json::array();
  for (const auto& r : report.records) {
    jrecords.push_back({{"regime", r.regime},
                        {"d", r.d},
                        {"eta", r.eta},
                        {"beta_norm", r.beta_norm},
                        {"sigma", r.sigma},
                        {"n", r.n},
                        {"seed", r.seed},
                        {"estimator", r.estimator},
                        {"adversary", r.adversary},
                        {"error_median", finite_or_null(r.error_median)},
                        {"error_iqr", finite_or_null(r.error_iqr)},
                        {"bound_upper", finite_or_null(r.bound_upper)},
                        {"bound_lower", finite_or_null(r.bound_lower)}});
  }
  json jchecks = json::array();
  for (const auto& c : report.checks) {
    jchecks.push_back({{"eta", c.cell.eta},
                       {"d", c.cell.d},
                       {"beta_norm", c.cell.beta_norm},
                       {"interior", c.interior},
                       {"predicted", c.predicted},
                       {"best", c.best_estimator},
                       {"predicted_error", finite_or_null(c.predicted_error)},
                       {"best_error", finite_or_null(c.best_error)},
                       {"winner_ok", c.winner_ok},
                       {"worst_unified_ratio", finite_or_null(c.worst_unified_ratio)},
                       {"unified_ok", c.unified_ok}});
  }
  return json{{"records", jrecords}, {"checks", jchecks}, {"pass", report.pass}}.dump(2);
}

// ---------------------------------------------------------------------------
// Coupling verification

std::vector<CouplingSpec> reference_specs() {
  return {SmallBetaSpec{16, 0.1, 1.0, 0.0}, BigEtaSpec{100, 1.0, 0.0},
          IntermEtaSpec{400, 1.0, 0.05, 0.0}, SmallEtaSpec{100, 1.0, 0.01, 1.0}};
}

namespace {

struct MarginalOutcome {
  double max_coord_ks = 0.0;
  double label_ks = 0.0;
  double residual_ks0 = 0.0, residual_ks1 = 0.0;
  double max_residual_abs = 0.0;
  double max_moment_z = 0.0;
  long label_mismatches = 0;
};

MarginalOutcome marginal_suite(const CouplingSpec& spec, int n, const RngStream& base,
                               int threads) {
  const int d = dimension(spec);
  const HypothesisPair pair = hypothesis_pair(spec);
  const bool noisy = pair.sigma > 0.0;
  const auto nn = static_cast<std::size_t>(n);

  MarginalOutcome out;

  // Pass 1: labels, residuals, y*x moments, label equality.
  struct Partial {
    Eigen::VectorXd sum0, sumsq0, sum1, sumsq1;
    long mismatches = 0;
  };
  std::vector<Partial> partials(kParallelChunks);
  std::vector<double> labels(nn), resid0(nn), resid1(nn);
  parallel_chunks(nn, threads, [&](std::size_t first, std::size_t last, std::size_t chunk) {
    Partial p;
    p.sum0 = Eigen::VectorXd::Zero(d);
    p.sumsq0 = Eigen::VectorXd::Zero(d);
    p.sum1 = Eigen::VectorXd::Zero(d);
    p.sumsq1 = Eigen::VectorXd::Zero(d);
    for (std::size_t i = first; i < last; ++i) {
      RngStream rng = base.child(i);
      const CoupledPair cp = draw_coupled_pair(spec, rng);
      labels[i] = cp.sample0.y;
      if (cp.sample0.y != cp.sample1.y) ++p.mismatches;
      resid0[i] = cp.sample0.y - pair.beta0.dot(cp.sample0.x);
      resid1[i] = cp.sample1.y - pair.beta1.dot(cp.sample1.x);
      const Eigen::VectorXd yx0 = cp.sample0.y * cp.sample0.x;
      const Eigen::VectorXd yx1 = cp.sample1.y * cp.sample1.x;
      p.sum0 += yx0;
      p.sumsq0 += yx0.cwiseAbs2();
      p.sum1 += yx1;
      p.sumsq1 += yx1.cwiseAbs2();
    }
    partials[chunk] = std::move(p);
  });
  Eigen::VectorXd sum0 = Eigen::VectorXd::Zero(d), sumsq0 = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd sum1 = Eigen::VectorXd::Zero(d), sumsq1 = Eigen::VectorXd::Zero(d);
  for (const auto& p : partials) {
    if (p.sum0.size() == 0) continue;
    sum0 += p.sum0;
    sumsq0 += p.sumsq0;
    sum1 += p.sum1;
    sumsq1 += p.sumsq1;
    out.label_mismatches += p.mismatches;
  }

  const double dn = static_cast<double>(n);
  const auto moment_z = [&](const Eigen::VectorXd& sum, const Eigen::VectorXd& sumsq,
                            const Eigen::VectorXd& beta) {
    double worst = 0.0;
    for (int j = 0; j < d; ++j) {
      const double mean = sum[j] / dn;
      const double var = std::max(0.0, (sumsq[j] - dn * mean * mean) / (dn - 1.0));
      const double se = std::sqrt(var / dn);
      if (se > 0.0) worst = std::max(worst, std::abs(mean - beta[j]) / se);
    }
    return worst;
  };
  out.max_moment_z = std::max(moment_z(sum0, sumsq0, pair.beta0), moment_z(sum1, sumsq1, pair.beta1));

  const double label_var = pair.beta0.squaredNorm() + pair.sigma * pair.sigma;
  out.label_ks = ks_statistic_normal(labels, 0.0, label_var);
  if (noisy) {
    out.residual_ks0 = ks_statistic_normal(resid0, 0.0, pair.sigma * pair.sigma);
    out.residual_ks1 = ks_statistic_normal(resid1, 0.0, pair.sigma * pair.sigma);
  } else {
    for (std::size_t i = 0; i < nn; ++i)
      out.max_residual_abs =
          std::max({out.max_residual_abs, std::abs(resid0[i]), std::abs(resid1[i])});
  }

  // Pass 2: per-coordinate KS in column batches; the same child streams
  // reproduce the same draws, so batches see identical samples. Batch size
  // keeps the two n x cols buffers near 64 MB.
  const int batch =
      std::clamp(static_cast<int>((64 << 20) / (16 * std::max(1, n))), 1, std::max(1, d));
  for (int c0 = 0; c0 < d; c0 += batch) {
    const int cols = std::min(batch, d - c0);
    Eigen::MatrixXd buf0(n, cols), buf1(n, cols);
    parallel_chunks(nn, threads, [&](std::size_t first, std::size_t last, std::size_t) {
      for (std::size_t i = first; i < last; ++i) {
        RngStream rng = base.child(i);
        const CoupledPair cp = draw_coupled_pair(spec, rng);
        for (int c = 0; c < cols; ++c) {
          buf0(static_cast<Eigen::Index>(i), c) = cp.sample0.x[c0 + c];
          buf1(static_cast<Eigen::Index>(i), c) = cp.sample1.x[c0 + c];
        }
      }
    });
    const auto ks_tasks = 2 * static_cast<std::size_t>(cols);
    std::vector<double> ks(ks_tasks, 0.0);
    parallel_chunks(ks_tasks, threads,
                    [&](std::size_t first, std::size_t last, std::size_t) {
                      std::vector<double> col(nn);
                      for (std::size_t k = first; k < last; ++k) {
                        const auto c = static_cast<Eigen::Index>(k % static_cast<std::size_t>(cols));
                        const auto& buf = k < static_cast<std::size_t>(cols) ? buf0 : buf1;
                        for (std::size_t i = 0; i < nn; ++i)
                          col[i] = buf(static_cast<Eigen::Index>(i), c);
                        ks[k] = ks_statistic_normal(col, 0.0, 1.0);
                      }
                    });
    for (double v : ks) out.max_coord_ks = std::max(out.max_coord_ks, v);
  }
  return out;
}

}  // namespace

CouplingVerificationResult run_coupling_verification(const CouplingVerificationConfig& cfg) {
  if (cfg.specs.empty()) throw std::invalid_argument("run_coupling_verification: no specs");
  if (cfg.n_marginal < 1000 || cfg.budget_trials < 100)
    throw std::invalid_argument("run_coupling_verification: sample sizes too small");

  // Bonferroni across every KS statistic the suite will look at.
  std::size_t ks_tests = 0;
  std::size_t moment_tests = 0;
  for (const auto& spec : cfg.specs) {
    const auto d = static_cast<std::size_t>(dimension(spec));
    const bool noisy = hypothesis_pair(spec).sigma > 0.0;
    ks_tests += 2 * d + 1 + (noisy ? 2 : 0);
    moment_tests += 2 * d;
  }
  const double ks_alpha = cfg.alpha / static_cast<double>(ks_tests);
  const double ks_crit = ks_critical_value(ks_alpha, static_cast<std::size_t>(cfg.n_marginal));
  // "within 3 standard errors", Bonferroni-widened when many coordinates are
  // tested at once.
  const double z_threshold =
      std::max(3.0, normal_quantile(1.0 - 0.5 * cfg.alpha / static_cast<double>(moment_tests)));

  const RngStream root(cfg.seed);
  CouplingVerificationResult result;
  result.pass = true;

  for (std::size_t si = 0; si < cfg.specs.size(); ++si) {
    const CouplingSpec& spec = cfg.specs[si];
    const HypothesisPair pair = hypothesis_pair(spec);
    SpecVerification v;
    v.regime = regime_name(regime_of(spec));
    v.d = dimension(spec);

    const RngStream marg_stream = root.child(2 * si);
    const MarginalOutcome m = marginal_suite(spec, cfg.n_marginal, marg_stream, cfg.threads);
    v.max_coord_ks = m.max_coord_ks;
    v.coord_ks_critical = ks_crit;
    v.label_ks0 = m.label_ks;
    v.label_ks1 = m.label_ks;  // labels are shared between the two sides
    v.residual_ks0 = m.residual_ks0;
    v.residual_ks1 = m.residual_ks1;
    v.max_residual_abs = m.max_residual_abs;
    v.max_moment_z = m.max_moment_z;
    v.moment_z_threshold = z_threshold;
    v.label_equality_rate =
        1.0 - static_cast<double>(m.label_mismatches) / static_cast<double>(cfg.n_marginal);
    const bool noisy = pair.sigma > 0.0;
    const bool residual_ok = noisy
                                 ? (m.residual_ks0 <= ks_crit && m.residual_ks1 <= ks_crit)
                                 : m.max_residual_abs <= 1e-6;
    v.marginals_ok = m.max_coord_ks <= ks_crit && m.label_ks <= ks_crit && residual_ok &&
                     m.max_moment_z <= z_threshold && m.label_mismatches == 0;

    const DisagreementStats stats =
        estimate_disagreements(spec, cfg.budget_trials, root.child(2 * si + 1), cfg.threads);
    v.mean_disagreements = stats.mean_coord_disagreements;
    v.std_error = stats.std_error;
    v.label_disagreement_rate = stats.label_disagreement_rate;
    v.budget_bound = disagreement_bound(spec);
    v.budget_ok = stats.mean_coord_disagreements <= v.budget_bound + 3.0 * stats.std_error &&
                  stats.label_disagreement_rate == 0.0;

    if (cfg.premise_eta.has_value()) {
      v.premise_checked = true;
      v.premise_bound = *cfg.premise_eta * static_cast<double>(v.d) * (1.0 - cfg.premise_c);
      v.premise_ok = stats.mean_coord_disagreements <= v.premise_bound + 3.0 * stats.std_error;
    }

    v.pass = v.marginals_ok && v.budget_ok && v.premise_ok;
    result.pass = result.pass && v.pass;
    result.specs.push_back(std::move(v));
  }
  return result;
}

std::string to_json_string(const CouplingVerificationResult& result) {
  json jspecs = json::array();
  for (const auto& v : result.specs) {
    jspecs.push_back({{"regime", v.regime},
                      {"d", v.d},
                      {"max_coord_ks", v.max_coord_ks},
                      {"coord_ks_critical", v.coord_ks_critical},
                      {"label_ks", v.label_ks0},
                      {"residual_ks0", v.residual_ks0},
                      {"residual_ks1", v.residual_ks1},
                      {"max_residual_abs", v.max_residual_abs},
                      {"max_moment_z", v.max_moment_z},
                      {"moment_z_threshold", v.moment_z_threshold},
                      {"label_equality_rate", v.label_equality_rate},
                      {"marginals_ok", v.marginals_ok},
                      {"mean_disagreements", v.mean_disagreements},
                      {"std_error", v.std_error},
                      {"label_disagreement_rate", v.label_disagreement_rate},
                      {"budget_bound", v.budget_bound},
                      {"budget_ok", v.budget_ok},
                      {"premise_checked", v.premise_checked},
                      {"premise_bound", v.premise_bound},
                      {"premise_ok", v.premise_ok},
                      {"pass", v.pass}});
  }
  return json{{"specs", jspecs}, {"pass", result.pass}}.dump(2);
}

// ---------------------------------------------------------------------------
// Forced error

EstimatorOutput run_named_estimator(const std::string& tag, const std::vector<MaskedSample>& data,
                                    double eta) {
  if (tag == "a1") return estimator_a1(data, eta);
  if (tag == "a2") return estimator_a2(data, eta);
  if (tag == "a3") {
    if (data.empty()) throw std::invalid_argument("estimate: empty dataset");
    return estimator_a3(static_cast<int>(data.front().x.size()));
  }
  if (tag == "unified") return unified_estimator(data, eta);
  if (tag == "ols") {
    EstimatorOutput out;
    out.beta_hat = ols_complete_case(data);
    out.chosen_branch = EstimatorBranch::A1;
    out.diagnostics["plain_ols"] = 1.0;
    return out;
  }
  throw std::invalid_argument("unknown estimator tag: " + tag);
}

namespace {

double forced_error_theory_bound(const CouplingSpec& spec, double eta) {
  const HypothesisPair pair = hypothesis_pair(spec);
  const double b = pair.beta0.norm();
  const double d = static_cast<double>(dimension(spec));
  const double rd = std::sqrt(d);
  switch (regime_of(spec)) {
    case Regime::SmallBeta: return std::min(b, eta * rd * pair.sigma);
    case Regime::BigEta: return b;
    case Regime::IntermEta: return eta * rd * b;
    case Regime::SmallEta: return std::min(eta * d * pair.sigma, eta * rd * b);
  }
  return 0.0;
}

bool masked_equal(const MaskedSample& a, const MaskedSample& b) {
  if (a.present != b.present) return false;
  if (a.y.has_value() != b.y.has_value()) return false;
  if (a.y.has_value() && *a.y != *b.y) return false;
  for (Eigen::Index j = 0; j < a.x.size(); ++j)
    if (a.present[static_cast<std::size_t>(j)] && a.x[j] != b.x[j]) return false;
  return true;
}

}  // namespace

ForcedErrorResult run_forced_error_demo(const ForcedErrorConfig& cfg) {
  if (cfg.n < 1 || cfg.runs < 1) throw std::invalid_argument("run_forced_error_demo: bad sizes");
  const HypothesisPair pair = hypothesis_pair(cfg.spec);
  const int d = dimension(cfg.spec);

  ForcedErrorResult result;
  result.runs = cfg.runs;
  result.separation = pair.separation();
  result.half_separation = result.separation / 2.0;
  result.theory_lower_bound = forced_error_theory_bound(cfg.spec, cfg.eta);
  result.edit_cap = static_cast<long>(std::floor(cfg.eta * static_cast<double>(cfg.n)));

  struct RunOutcome {
    bool success = false;
    bool identical = true;
    bool saw_erasure = false;
    long max_edits = 0;
    // per estimator: {produced, forced_error}
    std::vector<std::pair<bool, double>> per_estimator;
  };
  std::vector<RunOutcome> outcomes(static_cast<std::size_t>(cfg.runs));
  const RngStream root(cfg.seed);
  // A1's regime precondition is eta (d+1) < 0.49; the forced-error property
  // is independent of the eta handed to an estimator, so clamp it into range.
  const double a1_eta = std::min(cfg.eta, 0.45 / static_cast<double>(d + 1));

  parallel_chunks(static_cast<std::size_t>(cfg.runs), cfg.threads,
                  [&](std::size_t first, std::size_t last, std::size_t) {
                    for (std::size_t run = first; run < last; ++run) {
                      RngStream rng = root.child(run);
                      const AdversaryConfig acfg{cfg.eta, 0.1, cfg.mode};
                      const PairedMaskedDataset paired =
                          coupling_adversary(cfg.spec, cfg.n, acfg, rng);
                      RunOutcome& oc = outcomes[run];
                      oc.success = paired.success;
                      for (long e : paired.edits_per_coordinate)
                        oc.max_edits = std::max(oc.max_edits, e);
                      if (!paired.success) continue;
                      for (std::size_t i = 0; i < paired.dataset0.size(); ++i) {
                        if (!masked_equal(paired.dataset0[i], paired.dataset1[i]))
                          oc.identical = false;
                        if (!paired.dataset0[i].complete()) oc.saw_erasure = true;
                      }
                      oc.per_estimator.reserve(cfg.estimators.size());
                      for (const auto& tag : cfg.estimators) {
                        const double eta_run = tag == "a1" ? a1_eta : cfg.eta;
                        try {
                          const EstimatorOutput out =
                              run_named_estimator(tag, paired.dataset0, eta_run);
                          const double forced =
                              std::max(estimation_error(out.beta_hat, pair.beta0),
                                       estimation_error(out.beta_hat, pair.beta1));
                          oc.per_estimator.emplace_back(true, forced);
                        } catch (const std::exception&) {
                          oc.per_estimator.emplace_back(false, 0.0);
                        }
                      }
                    }
                  });

  result.estimators.resize(cfg.estimators.size());
  for (std::size_t e = 0; e < cfg.estimators.size(); ++e)
    result.estimators[e].name = cfg.estimators[e];
  for (const auto& oc : outcomes) {
    result.max_edits_per_coordinate = std::max(result.max_edits_per_coordinate, oc.max_edits);
    if (!oc.success) continue;
    ++result.successes;
    result.datasets_identical_ok = result.datasets_identical_ok && oc.identical;
    if (cfg.mode == CorruptionMode::Replace)
      result.no_erasures_ok = result.no_erasures_ok && !oc.saw_erasure;
    for (std::size_t e = 0; e < oc.per_estimator.size(); ++e) {
      auto& agg = result.estimators[e];
      const auto& [produced, forced] = oc.per_estimator[e];
      if (!produced) {
        ++agg.refused;
        continue;
      }
      ++agg.evaluated;
      agg.min_forced_error = std::min(agg.min_forced_error, forced);
      agg.bound_ok = agg.bound_ok && forced >= result.half_separation;
    }
  }
  result.success_rate = static_cast<double>(result.successes) / static_cast<double>(cfg.runs);
  result.edits_ok = result.max_edits_per_coordinate <= result.edit_cap;

  result.pass = result.edits_ok && result.datasets_identical_ok && result.no_erasures_ok;
  for (const auto& est : result.estimators) result.pass = result.pass && est.bound_ok;
  return result;
}

std::string to_json_string(const ForcedErrorResult& result) {
  json jest = json::array();
  for (const auto& e : result.estimators) {
    jest.push_back({{"name", e.name},
                    {"evaluated", e.evaluated},
                    {"refused", e.refused},
                    {"min_forced_error", finite_or_null(e.min_forced_error)},
                    {"bound_ok", e.bound_ok}});
  }
  return json{{"runs", result.runs},
              {"successes", result.successes},
              {"success_rate", result.success_rate},
              {"separation", result.separation},
              {"half_separation", result.half_separation},
              {"theory_lower_bound", result.theory_lower_bound},
              {"edit_cap", result.edit_cap},
              {"max_edits_per_coordinate", result.max_edits_per_coordinate},
              {"edits_ok", result.edits_ok},
              {"datasets_identical_ok", result.datasets_identical_ok},
              {"no_erasures_ok", result.no_erasures_ok},
              {"estimators", jest},
              {"pass", result.pass}}
      .dump(2);
}

std::string to_json_string(const EstimatorOutput& out) {
  json jbeta = json::array();
  for (Eigen::Index i = 0; i < out.beta_hat.size(); ++i) jbeta.push_back(out.beta_hat[i]);
  json j{{"beta_hat", jbeta}, {"chosen_branch", branch_name(out.chosen_branch)}};
  j["sigma_hat"] = out.sigma_hat.has_value() ? json(*out.sigma_hat) : json();
  j["diagnostics"] = json::object();
  for (const auto& [k, v] : out.diagnostics) j["diagnostics"][k] = v;
  return j.dump(2);
}

std::string to_json_string(const DisagreementStats& stats) {
  return json{{"mean_coord_disagreements", stats.mean_coord_disagreements},
              {"label_disagreement_rate", stats.label_disagreement_rate},
              {"per_coordinate_rates", stats.per_coordinate_rates},
              {"trials", stats.trials},
              {"std_error", stats.std_error}}
      .dump(2);
}

// ---------------------------------------------------------------------------
// Calibration

std::string run_calibration(std::uint64_t seed, int threads) {
  const RngStream root(seed);
  json out;
  int stream = 0;
  const auto stats_for = [&](const CouplingSpec& spec, int trials) {
    return estimate_disagreements(spec, trials, root.child(stream++), threads);
  };

  {
    const SmallBetaSpec spec{16, 0.1, 1.0, 0.0};
    const auto s = stats_for(spec, 10000);
    out["small_beta"] = {{"mean", s.mean_coord_disagreements},
                         {"bound", disagreement_bound(spec)},
                         {"ratio", s.mean_coord_disagreements / disagreement_bound(spec)}};
  }
  {
    const BigEtaSpec spec{100, 1.0, 0.0};
    const auto s = stats_for(spec, 10000);
    out["big_eta"] = {{"mean", s.mean_coord_disagreements},
                      {"bound", 3.0 * std::sqrt(100.0)},
                      {"ratio", s.mean_coord_disagreements / (3.0 * std::sqrt(100.0))}};
  }
  {
    json interm;
    double k_max = 0.0, k_min = std::numeric_limits<double>::infinity();
    for (int d : {100, 400}) {
      const IntermEtaSpec spec{d, 1.0, 0.05, 0.0};
      const auto s = stats_for(spec, 10000);
      const double k =
          std::max(0.0, (s.mean_coord_disagreements - 2.0) / (0.05 * std::sqrt(double(d))));
      interm["d" + std::to_string(d)] = {{"mean", s.mean_coord_disagreements}, {"K_hat", k}};
      k_max = std::max(k_max, k);
      k_min = std::min(k_min, k);
    }
    interm["K_hat_spread"] = k_max > 0.0 ? (k_max - k_min) / k_max : 0.0;
    interm["K_recommended"] = std::ceil(k_max * 1.25 * 10.0) / 10.0;
    interm["K_frozen"] = calib::kIntermEtaK;
    out["interm_eta"] = interm;
  }
  {
    const SmallEtaSpec spec{100, 1.0, 0.01, 1.0};
    const auto s = stats_for(spec, 100000);
    const double unit = spec.E / spec.sigma + std::sqrt(100.0) * spec.E / spec.B;
    const double k = s.mean_coord_disagreements / unit;
    // Pr[second-half label part disagrees] shows up as the rate of any
    // first-half coordinate disagreement; bounded by E/sigma.
    out["small_eta"] = {{"mean", s.mean_coord_disagreements},
                        {"K_hat", k},
                        {"K_recommended", std::ceil(k * 1.25 * 10.0) / 10.0},
                        {"K_frozen", calib::kSmallEtaK}};
  }

  // Estimator rate constants on the two quantitative acceptance cells.
  const auto estimator_cell = [&](bool erase_mode) {
    const int d = erase_mode ? 20 : 50;
    const double eta = erase_mode ? 0.002 : 0.02;
    const double beta_norm = erase_mode ? 100.0 : 1.0;
    const int n = 100000;
    std::vector<double> errors;
    for (int trial = 0; trial < 5; ++trial) {
      RngStream rng = root.child(1000 + stream * 100 + trial);
      const RegressionInstance inst(
          d, Eigen::VectorXd::Constant(d, beta_norm / std::sqrt(double(d))), 1.0);
      const auto clean = sample_clean(inst, n, rng);
      const auto masked =
          erase_mode ? oblivious_erasure(clean, eta, rng) : sign_flip_replacement(clean, eta, rng);
      const auto est = erase_mode ? estimator_a1(masked, eta) : estimator_a2(masked, eta);
      errors.push_back(estimation_error(est.beta_hat, inst.beta));
    }
    ++stream;
    return median(errors);
  };
  {
    const double med = estimator_cell(false);
    const double rate = 0.02 * std::sqrt(50.0) * std::sqrt(2.0);
    out["a2_constant"] = {{"median_error", med},
                          {"rate", rate},
                          {"ratio", med / rate},
                          {"frozen", calib::kA2RateConstant}};
  }
  {
    const double med = estimator_cell(true);
    const double rate = 0.002 * 20.0 * 1.0;
    out["a1_constant"] = {{"median_error", med},
                          {"rate", rate},
                          {"ratio", med / rate},
                          {"frozen", calib::kA1RateConstant}};
  }
  out["meta"] = {{"C", calib::kMetaC},
                 {"C_prime", calib::kMetaCPrime},
                 {"C_dprime", calib::kMetaCDoublePrime}};
  return out.dump(2);
}

}  // namespace robustlr
