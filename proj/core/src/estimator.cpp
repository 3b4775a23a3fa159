#include "robustlr/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "robustlr/errors.hpp"
#include "robustlr/stats.hpp"

namespace robustlr {

namespace {

constexpr double kTrimCap = 0.4;  // keep at least a fifth of every column

double a2_trim_fraction(double eta) {
  return std::min(2.0 * eta * (1.0 + calib::kTrimMargin), kTrimCap);
}

int infer_dimension(const std::vector<MaskedSample>& data) {
  if (data.empty()) throw std::invalid_argument("estimator: empty dataset");
  return static_cast<int>(data.front().x.size());
}

Eigen::VectorXd solve_least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd gram = x.transpose() * x;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const Eigen::VectorXd diag = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success ||
      diag.minCoeff() <= 1e-10 * std::max(1.0, diag.maxCoeff()))
    throw singular_matrix_error("least squares: rank-deficient active set");
  return ldlt.solve(x.transpose() * y);
}

}  // namespace

const char* branch_name(EstimatorBranch b) {
  switch (b) {
    case EstimatorBranch::A1: return "A1";
    case EstimatorBranch::A2: return "A2";
    case EstimatorBranch::A3: return "A3";
  }
  return "unknown";
}

namespace {

// Mean of chi^2_1 restricted to its [f, 1-f] quantile band, normalized by the
// band mass: the two-sided trimmed mean of squared N(0, s^2) residuals
// estimates s^2 * band_mean, so dividing by it debiases sigma_hat.
// Uses E[X 1(X <= t)] = F3(t) for X ~ chi^2_1, with
// F3(t) = F1(t) - sqrt(2 t / pi) exp(-t/2).
double chi1_band_mean(double f) {
  if (f <= 0.0) return 1.0;
  const auto cum_x = [](double t) {
    const double f1 = 2.0 * normal_cdf(std::sqrt(t)) - 1.0;
    return f1 - std::sqrt(2.0 * t / M_PI) * std::exp(-t / 2.0);
  };
  const auto quantile = [](double p) {
    const double z = normal_quantile((1.0 + p) / 2.0);
    return z * z;
  };
  return (cum_x(quantile(1.0 - f)) - cum_x(quantile(f))) / (1.0 - 2.0 * f);
}

}  // namespace

double trimmed_mean(std::vector<double> values, double eps) {
  if (values.empty()) throw std::invalid_argument("trimmed_mean: empty list");
  if (!(eps >= 0.0 && eps < 0.5)) throw std::invalid_argument("trimmed_mean: eps must be in [0, 0.5)");
  const std::size_t n = values.size();
  const auto k = static_cast<std::size_t>(std::ceil(eps * static_cast<double>(n)));
  if (2 * k >= n) throw std::invalid_argument("trimmed_mean: trimming would discard everything");
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (std::size_t i = k; i < n - k; ++i) sum += values[i];
  return sum / static_cast<double>(n - 2 * k);
}

EstimatorOutput estimator_a2(const std::vector<MaskedSample>& data, double eta) {
  const int d = infer_dimension(data);
  const double trim = a2_trim_fraction(eta);
  EstimatorOutput out;
  out.beta_hat.resize(d);
  out.chosen_branch = EstimatorBranch::A2;
  std::vector<double> products;
  products.reserve(data.size());
  for (int j = 0; j < d; ++j) {
    products.clear();
    for (const auto& s : data) {
      if (!s.y.has_value() || !s.present[static_cast<std::size_t>(j)]) continue;
      products.push_back(*s.y * s.x[j]);
    }
    if (products.size() < 10)
      throw std::invalid_argument("estimator_a2: fewer than 10 usable samples in a coordinate");
    out.beta_hat[j] = trimmed_mean(products, trim);
  }
  return out;
}

EstimatorOutput estimator_a1(const std::vector<MaskedSample>& data, double eta) {
  const int d = infer_dimension(data);
  if (eta * static_cast<double>(d + 1) >= 0.49)
    throw regime_error("estimator_a1: requires eta (d + 1) < 0.49");

  std::vector<const MaskedSample*> complete;
  complete.reserve(data.size());
  for (const auto& s : data)
    if (s.complete()) complete.push_back(&s);
  const auto n = static_cast<Eigen::Index>(complete.size());
  if (n < d) throw singular_matrix_error("estimator_a1: fewer complete samples than dimensions");

  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = complete[static_cast<std::size_t>(i)]->x;
    y[i] = *complete[static_cast<std::size_t>(i)]->y;
  }

  const double eps = eta * static_cast<double>(d + 1);
  const auto drop = std::min<Eigen::Index>(
      n - d, static_cast<Eigen::Index>(std::ceil(eps * static_cast<double>(n))));
  Eigen::VectorXd beta = solve_least_squares(x, y);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  Eigen::Index active = n;
  if (drop > 0) {
    const auto keep = n - drop;
    Eigen::VectorXd abs_res(n);
    for (int iter = 0; iter < calib::kA1TrimIterations; ++iter) {
      abs_res = (x * beta - y).cwiseAbs();
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::nth_element(order.begin(), order.begin() + keep - 1, order.end(),
                       [&](Eigen::Index a, Eigen::Index b) {
                         if (abs_res[a] != abs_res[b]) return abs_res[a] < abs_res[b];
                         return a < b;
                       });
      Eigen::MatrixXd xk(keep, d);
      Eigen::VectorXd yk(keep);
      for (Eigen::Index i = 0; i < keep; ++i) {
        xk.row(i) = x.row(order[static_cast<std::size_t>(i)]);
        yk[i] = y[order[static_cast<std::size_t>(i)]];
      }
      beta = solve_least_squares(xk, yk);
    }
    active = keep;
  }

  EstimatorOutput out;
  out.beta_hat = std::move(beta);
  out.chosen_branch = EstimatorBranch::A1;
  out.diagnostics["active_set_size"] = static_cast<double>(active);
  out.diagnostics["complete_samples"] = static_cast<double>(n);
  return out;
}

EstimatorOutput estimator_a3(int d) {
  if (d < 1) throw std::invalid_argument("estimator_a3: d must be >= 1");
  EstimatorOutput out;
  out.beta_hat = Eigen::VectorXd::Zero(d);
  out.chosen_branch = EstimatorBranch::A3;
  return out;
}

Eigen::VectorXd ols_complete_case(const std::vector<MaskedSample>& data) {
  const int d = infer_dimension(data);
  std::vector<const MaskedSample*> complete;
  for (const auto& s : data)
    if (s.complete()) complete.push_back(&s);
  const auto n = static_cast<Eigen::Index>(complete.size());
  if (n < d) throw singular_matrix_error("ols_complete_case: fewer complete samples than dimensions");
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = complete[static_cast<std::size_t>(i)]->x;
    y[i] = *complete[static_cast<std::size_t>(i)]->y;
  }
  return solve_least_squares(x, y);
}

double sigma_hat_residual(const std::vector<MaskedSample>& data, const Eigen::VectorXd& beta_ref,
                          double eta) {
  const int d = infer_dimension(data);
  if (beta_ref.size() != d) throw std::invalid_argument("sigma_hat_residual: beta length mismatch");
  std::vector<double> squared;
  squared.reserve(data.size());
  for (const auto& s : data) {
    if (!s.complete()) continue;
    const double r = *s.y - beta_ref.dot(s.x);
    squared.push_back(r * r);
  }
  if (squared.empty()) throw std::invalid_argument("sigma_hat_residual: no complete samples");
  // A sample with any corrupted coordinate has a corrupted residual, so the
  // trim rate is the per-sample corruption rate eta (d + 1), as in A1.
  const double trim = std::min(
      eta * static_cast<double>(d + 1) * (1.0 + calib::kTrimMargin), kTrimCap);
  const double u = trimmed_mean(std::move(squared), trim);
  return std::sqrt(std::max(0.0, u / chi1_band_mean(trim)));
}

EstimatorOutput unified_estimator(const std::vector<MaskedSample>& data, double eta,
                                  const MetaConfig& cfg) {
  if (!(cfg.C < cfg.C_prime && cfg.C_prime < cfg.C_dprime))
    throw std::invalid_argument("unified_estimator: constants must satisfy C < C' < C''");
  const int d = infer_dimension(data);
  const double dd = static_cast<double>(d);
  const bool a1_enabled = eta * (dd + 1.0) < 0.49;

  std::optional<EstimatorOutput> out1;
  if (a1_enabled) out1 = estimator_a1(data, eta);
  EstimatorOutput out2 = estimator_a2(data, eta);

  // The A1-vs-rest comparison needs e1 = eta d sigma_hat; when A1 is out of
  // regime the estimate is reported only when it is computable (heavy erasure
  // can leave no complete samples).
  std::optional<double> sigma_hat;
  if (out1) {
    sigma_hat = sigma_hat_residual(data, out1->beta_hat, eta);
  } else {
    try {
      sigma_hat = sigma_hat_residual(data, out2.beta_hat, eta);
    } catch (const std::invalid_argument&) {
    }
  }
  const double e1 = sigma_hat ? eta * dd * *sigma_hat : 0.0;

  const double trim = cfg.trim_fraction > 0.0 ? cfg.trim_fraction : a2_trim_fraction(eta);
  std::vector<double> label_sq;
  label_sq.reserve(data.size());
  for (const auto& s : data)
    if (s.y.has_value()) label_sq.push_back(*s.y * *s.y);
  if (label_sq.empty()) throw std::invalid_argument("unified_estimator: no labels present");
  const double second_moment = std::max(0.0, trimmed_mean(std::move(label_sq), trim));
  const double e2 = eta * std::sqrt(dd) * std::sqrt(second_moment);

  EstimatorOutput chosen;
  if (out1 && cfg.C * e1 < e2) {
    chosen = std::move(*out1);
    chosen.chosen_branch = EstimatorBranch::A1;
  } else if (out2.beta_hat.norm() > cfg.C_prime * e2) {
    chosen = std::move(out2);
    chosen.chosen_branch = EstimatorBranch::A2;
  } else {
    chosen = estimator_a3(d);
  }
  chosen.sigma_hat = sigma_hat;
  if (sigma_hat) chosen.diagnostics["e1"] = e1;
  chosen.diagnostics["e2"] = e2;
  chosen.diagnostics["a1_enabled"] = a1_enabled ? 1.0 : 0.0;
  return chosen;
}

double estimation_error(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta) {
  if (beta_hat.size() != beta.size())
    throw std::invalid_argument("estimation_error: length mismatch");
  return (beta_hat - beta).norm();
}

}  // namespace robustlr
