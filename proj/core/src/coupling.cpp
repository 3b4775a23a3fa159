#include "robustlr/coupling.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "robustlr/calibration.hpp"
#include "robustlr/errors.hpp"
#include "robustlr/parallel.hpp"

namespace robustlr {

namespace {

constexpr double kCovEqualTol = 1e-12;

/// Couples the realized draw x ~ N(a, s2) with N(a + delta, s2): keep x with
/// probability min(1, q(x)/p(x)), otherwise reflect about the midpoint of the
/// two means. This is the maximal coupling for equal variances, and on
/// disagreement sign(x - x') = -sign(delta).
double reflect_or_share(double x, double a, double delta, double s2, RngStream& rng) {
  if (delta == 0.0) return x;
  const double d0 = x - a;
  const double d1 = x - a - delta;
  const double log_ratio = (d0 * d0 - d1 * d1) / (2.0 * s2);
  if (std::log(rng.uniform()) <= log_ratio) return x;
  return 2.0 * a + delta - x;
}

}  // namespace

// ---------------------------------------------------------------------------
// CouplingSpec helpers

int dimension(const CouplingSpec& spec) {
  return std::visit([](const auto& s) { return s.d; }, spec);
}

Regime regime_of(const CouplingSpec& spec) {
  struct V {
    Regime operator()(const SmallBetaSpec&) const { return Regime::SmallBeta; }
    Regime operator()(const BigEtaSpec&) const { return Regime::BigEta; }
    Regime operator()(const IntermEtaSpec&) const { return Regime::IntermEta; }
    Regime operator()(const SmallEtaSpec&) const { return Regime::SmallEta; }
  };
  return std::visit(V{}, spec);
}

HypothesisPair hypothesis_pair(const CouplingSpec& spec) {
  struct V {
    HypothesisPair operator()(const SmallBetaSpec& s) const {
      return make_small_beta_pair(s.d, s.b, s.sigma, s.r);
    }
    HypothesisPair operator()(const BigEtaSpec& s) const {
      return make_big_eta_pair(s.d, s.s, s.sigma);
    }
    HypothesisPair operator()(const IntermEtaSpec& s) const {
      return make_interm_eta_pair(s.d, s.s, s.eps, s.sigma);
    }
    HypothesisPair operator()(const SmallEtaSpec& s) const {
      return make_small_eta_pair(s.d, s.B, s.E, s.sigma);
    }
  };
  return std::visit(V{}, spec);
}

std::vector<std::pair<int, int>> coefficient_blocks(const CouplingSpec& spec) {
  struct V {
    std::vector<std::pair<int, int>> operator()(const SmallBetaSpec& s) const {
      if (s.r > 0.0) return {{0, 1}, {1, s.d}};
      return {{0, s.d}};
    }
    std::vector<std::pair<int, int>> operator()(const BigEtaSpec& s) const { return {{0, s.d}}; }
    std::vector<std::pair<int, int>> operator()(const IntermEtaSpec& s) const {
      return {{0, s.d / 2}, {s.d / 2, s.d}};
    }
    std::vector<std::pair<int, int>> operator()(const SmallEtaSpec& s) const {
      return {{0, s.d / 2}, {s.d / 2, s.d}};
    }
  };
  return std::visit(V{}, spec);
}

double disagreement_bound(const CouplingSpec& spec) {
  struct V {
    double operator()(const SmallBetaSpec& s) const {
      const int block = s.r > 0.0 ? s.d - 1 : s.d;
      return std::sqrt(2.0 * block) * s.b / std::sqrt(s.sigma * s.sigma + s.b * s.b);
    }
    double operator()(const BigEtaSpec& s) const { return 3.0 * std::sqrt(double(s.d)); }
    double operator()(const IntermEtaSpec& s) const {
      return 2.0 + calib::kIntermEtaK * s.eps * std::sqrt(double(s.d));
    }
    double operator()(const SmallEtaSpec& s) const {
      return calib::kSmallEtaK * (s.E / s.sigma + std::sqrt(double(s.d)) * s.E / s.B);
    }
  };
  return std::visit(V{}, spec);
}

// ---------------------------------------------------------------------------
// Primitive couplings

std::pair<double, double> maximal_coupling_univariate(const UnivariateGaussian& p,
                                                      const UnivariateGaussian& q, RngStream& rng) {
  if (p.variance != q.variance || p.variance <= 0.0)
    throw std::invalid_argument("maximal_coupling_univariate: requires equal positive variances");
  const double x = p.mean + std::sqrt(p.variance) * rng.normal();
  const double x_prime = reflect_or_share(x, p.mean, q.mean - p.mean, p.variance, rng);
  return {x, x_prime};
}

HybridCoupling::HybridCoupling(Eigen::VectorXd mu, Eigen::VectorXd mu_prime,
                               const Eigen::MatrixXd& cov) {
  if (mu.size() != mu_prime.size() || cov.rows() != mu.size() || cov.cols() != mu.size())
    throw std::invalid_argument("HybridCoupling: dimension mismatch");
  mu_ = std::move(mu);
  mu_prime_ = std::move(mu_prime);
  delta_ = mu_prime_ - mu_;
  dense_ = true;

  const auto d = mu_.size();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  const Eigen::VectorXd diag = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success ||
      diag.minCoeff() <= 1e-12 * std::max(1.0, diag.maxCoeff()))
    throw singular_matrix_error("HybridCoupling: covariance must be nonsingular");
  precision_ = ldlt.solve(Eigen::MatrixXd::Identity(d, d));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  sqrt_cov_ = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
              es.eigenvectors().transpose();

  cond_var_.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) cond_var_[i] = 1.0 / precision_(i, i);
  finalize_steps();
}

HybridCoupling HybridCoupling::rank_one(Eigen::VectorXd mu, Eigen::VectorXd mu_prime,
                                        Eigen::VectorXd w, double kappa) {
  HybridCoupling h;
  if (mu.size() != mu_prime.size() || w.size() != mu.size())
    throw std::invalid_argument("HybridCoupling::rank_one: dimension mismatch");
  h.mu_ = std::move(mu);
  h.mu_prime_ = std::move(mu_prime);
  h.delta_ = h.mu_prime_ - h.mu_;
  h.w_ = std::move(w);

  const double wsq = h.w_.squaredNorm();
  const double kw = kappa * wsq;
  if (kw >= 1.0)
    throw singular_matrix_error("HybridCoupling::rank_one: covariance I - kappa w w' is singular");
  h.rho_ = kappa / (1.0 - kw);
  h.alpha_ = wsq > 0.0 ? (1.0 - std::sqrt(1.0 - kw)) / wsq : 0.0;

  const auto d = h.mu_.size();
  h.cond_var_.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) h.cond_var_[i] = 1.0 / (1.0 + h.rho_ * h.w_[i] * h.w_[i]);
  h.finalize_steps();
  return h;
}

void HybridCoupling::finalize_steps() {
  const auto d = mu_.size();
  step_tv_.assign(static_cast<std::size_t>(d), 0.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (delta_[i] == 0.0) continue;
    const UnivariateGaussian g0{0.0, cond_var_[i]};
    const UnivariateGaussian g1{delta_[i], cond_var_[i]};
    step_tv_[static_cast<std::size_t>(i)] = tv_exact_univariate_equal_var(g0, g1);
  }
}

double HybridCoupling::expected_disagreements() const {
  double s = 0.0;
  for (double v : step_tv_) s += v;
  return s;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> HybridCoupling::draw(RngStream& rng) const {
  const auto d = mu_.size();
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.normal();

  Eigen::VectorXd x(d);
  if (dense_) {
    x = mu_ + sqrt_cov_ * z;
  } else {
    x = z;
    if (alpha_ != 0.0) x -= (alpha_ * w_.dot(z)) * w_;
    x += mu_;
  }

  // March the chain Q_0 ... Q_d: v holds the current vector, diff = v minus
  // the current reference mean (mu' on already-processed coordinates, mu on
  // the rest).
  Eigen::VectorXd v = x;
  Eigen::VectorXd diff = v - mu_;
  double wdot = dense_ ? 0.0 : w_.dot(diff);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (delta_[i] == 0.0) continue;
    double cross;  // sum_{j != i} Lambda_ij diff_j
    if (dense_) {
      cross = precision_.row(i).dot(diff) - precision_(i, i) * diff[i];
    } else {
      cross = rho_ * w_[i] * (wdot - w_[i] * diff[i]);
    }
    const double a = mu_[i] - cond_var_[i] * cross;
    const double updated = reflect_or_share(v[i], a, delta_[i], cond_var_[i], rng);
    if (!dense_) wdot += w_[i] * ((updated - mu_prime_[i]) - diff[i]);
    v[i] = updated;
    diff[i] = updated - mu_prime_[i];
  }
  return {std::move(x), std::move(v)};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> hybrid_coupling(const Eigen::VectorXd& mu,
                                                            const Eigen::VectorXd& mu_prime,
                                                            const Eigen::MatrixXd& cov,
                                                            RngStream& rng) {
  if (mu.size() != mu_prime.size())
    throw std::invalid_argument("hybrid_coupling: mean length mismatch");
  return HybridCoupling(mu, mu_prime, cov).draw(rng);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> one_step_coupling(const MultivariateGaussian& q,
                                                              const MultivariateGaussian& q_prime,
                                                              int i, RngStream& rng) {
  if (q.dimension() != q_prime.dimension())
    throw std::invalid_argument("one_step_coupling: dimension mismatch");
  if (i < 0 || i >= q.dimension())
    throw std::invalid_argument("one_step_coupling: coordinate index out of range");
  const double scale = std::max(1.0, q.covariance.cwiseAbs().maxCoeff());
  if ((q.covariance - q_prime.covariance).cwiseAbs().maxCoeff() > kCovEqualTol * scale)
    throw std::invalid_argument("one_step_coupling: covariances must be shared");
  for (Eigen::Index j = 0; j < q.dimension(); ++j)
    if (j != i && q.mean[j] != q_prime.mean[j])
      throw std::invalid_argument("one_step_coupling: means may differ only at coordinate i");
  return HybridCoupling(q.mean, q_prime.mean, q.covariance).draw(rng);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> sum_conditioned_coupling(int d, double t,
                                                                     double t_prime,
                                                                     RngStream& rng) {
  if (d < 1) throw std::invalid_argument("sum_conditioned_coupling: d must be >= 1");
  if (d == 1)
    return {Eigen::VectorXd::Constant(1, t), Eigen::VectorXd::Constant(1, t_prime)};

  const int m = d - 1;
  const double dd = static_cast<double>(d);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
  const auto chain = HybridCoupling::rank_one(Eigen::VectorXd::Constant(m, t / dd),
                                              Eigen::VectorXd::Constant(m, t_prime / dd), ones,
                                              1.0 / dd);
  auto [head, head_prime] = chain.draw(rng);

  Eigen::VectorXd x(d), x_prime(d);
  x.head(m) = head;
  x_prime.head(m) = head_prime;
  x[m] = t - head.sum();
  x_prime[m] = t_prime - head_prime.sum();
  return {std::move(x), std::move(x_prime)};
}

// ---------------------------------------------------------------------------
// Regime couplings

CoupledPair draw_small_beta_pair(const SmallBetaSpec& spec, RngStream& rng) {
  if (spec.d < 1 || spec.b < 0.0 || spec.r < 0.0)
    throw std::invalid_argument("draw_small_beta_pair: bad parameters");
  if (spec.r > 0.0 && spec.d < 2)
    throw std::invalid_argument("draw_small_beta_pair: r > 0 requires d >= 2");
  if (spec.sigma <= 0.0)
    throw regime_error(
        "draw_small_beta_pair: sigma = 0 degenerates the conditional covariance; use the "
        "big-eta coupling instead");

  const bool extended = spec.r > 0.0;
  const int block = extended ? spec.d - 1 : spec.d;
  const double coef = block > 0 ? spec.b / std::sqrt(static_cast<double>(block)) : 0.0;
  const double label_var = spec.b * spec.b + spec.sigma * spec.sigma;

  const double t = std::sqrt(label_var) * rng.normal();
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(block, coef);
  const Eigen::VectorXd mu = (t / label_var) * w;
  const auto chain = HybridCoupling::rank_one(mu, -mu, w, 1.0 / label_var);
  auto [xc, xc_prime] = chain.draw(rng);

  CoupledPair pair;
  if (!extended) {
    pair.sample0 = {std::move(xc), t};
    pair.sample1 = {std::move(xc_prime), t};
    return pair;
  }
  const double x1 = rng.normal();
  const double y = spec.r * x1 + t;
  Eigen::VectorXd x(spec.d), x_prime(spec.d);
  x[0] = x1;
  x_prime[0] = x1;
  x.tail(block) = xc;
  x_prime.tail(block) = xc_prime;
  pair.sample0 = {std::move(x), y};
  pair.sample1 = {std::move(x_prime), y};
  return pair;
}

CoupledPair draw_big_eta_pair(const BigEtaSpec& spec, RngStream& rng) {
  if (spec.d < 1 || spec.s < 0.0 || spec.sigma < 0.0)
    throw std::invalid_argument("draw_big_eta_pair: bad parameters");
  const double z = std::sqrt(static_cast<double>(spec.d)) * rng.normal();
  auto [x, x_prime] = sum_conditioned_coupling(spec.d, z, -z, rng);
  const double y = spec.s * z + spec.sigma * rng.normal();
  return {{std::move(x), y}, {std::move(x_prime), y}};
}

CoupledPair draw_interm_eta_pair(const IntermEtaSpec& spec, RngStream& rng) {
  if (spec.d < 2 || spec.d % 2 != 0)
    throw std::invalid_argument("draw_interm_eta_pair: d must be even");
  if (spec.s < 0.0 || spec.eps < 0.0 || spec.eps > 1.0 || spec.sigma < 0.0)
    throw std::invalid_argument("draw_interm_eta_pair: bad parameters");
  const int h = spec.d / 2;
  const double ve = 1.0 + spec.eps * spec.eps;
  const double dd = static_cast<double>(spec.d);

  const double z = std::sqrt(ve * dd / 2.0) * rng.normal();
  const double t = spec.eps * z / ve + std::sqrt(dd / (2.0 * ve)) * rng.normal();
  const double t_prime = t - 2.0 * spec.eps * z / ve;

  auto [front, front_prime] = sum_conditioned_coupling(h, t, t_prime, rng);
  auto [back, back_prime] =
      sum_conditioned_coupling(h, z - spec.eps * t, z + spec.eps * t_prime, rng);

  Eigen::VectorXd x(spec.d), x_prime(spec.d);
  x.head(h) = front;
  x.tail(h) = back;
  x_prime.head(h) = front_prime;
  x_prime.tail(h) = back_prime;
  const double y = spec.s * z + spec.sigma * rng.normal();
  return {{std::move(x), y}, {std::move(x_prime), y}};
}

CoupledPair draw_small_eta_pair(const SmallEtaSpec& spec, RngStream& rng) {
  if (spec.d < 2 || spec.d % 2 != 0)
    throw std::invalid_argument("draw_small_eta_pair: d must be even");
  if (!(spec.E > 0.0 && spec.E < 1.0) || spec.B <= 0.0 || spec.sigma <= 0.0)
    throw std::invalid_argument("draw_small_eta_pair: need B > 0, sigma > 0, E in (0,1)");
  if (spec.E / spec.sigma > 1.0)
    throw regime_error("draw_small_eta_pair: E/sigma must be <= 1");
  const int h = spec.d / 2;
  const double rd = std::sqrt(static_cast<double>(spec.d));

  Eigen::VectorXd x2(h);
  for (int i = 0; i < h; ++i) x2[i] = rng.normal();
  const double m2 = (spec.E / rd) * x2.sum();
  const auto [y2, y2_prime] = maximal_coupling_univariate(
      {m2, spec.sigma * spec.sigma}, {-m2, spec.sigma * spec.sigma}, rng);

  // Label contribution of the shared half: y = y1 + y2 with y1 independent
  // N(0, B^2/2); the first halves are then conditioned on their scaled sums.
  const double y1 = (spec.B / std::sqrt(2.0)) * rng.normal();
  const double y = y1 + y2;

  auto [x1, x1_prime] =
      sum_conditioned_coupling(h, (y - y2) * rd / spec.B, (y - y2_prime) * rd / spec.B, rng);

  Eigen::VectorXd x(spec.d), x_prime(spec.d);
  x.head(h) = x1;
  x.tail(h) = x2;
  x_prime.head(h) = x1_prime;
  x_prime.tail(h) = x2;
  return {{std::move(x), y}, {std::move(x_prime), y}};
}

CoupledPair draw_coupled_pair(const CouplingSpec& spec, RngStream& rng) {
  struct V {
    RngStream& rng;
    CoupledPair operator()(const SmallBetaSpec& s) const { return draw_small_beta_pair(s, rng); }
    CoupledPair operator()(const BigEtaSpec& s) const { return draw_big_eta_pair(s, rng); }
    CoupledPair operator()(const IntermEtaSpec& s) const { return draw_interm_eta_pair(s, rng); }
    CoupledPair operator()(const SmallEtaSpec& s) const { return draw_small_eta_pair(s, rng); }
  };
  return std::visit(V{rng}, spec);
}

// ---------------------------------------------------------------------------
// Monte Carlo verification

DisagreementStats estimate_disagreements(const CouplingSpec& spec, int trials, const RngStream& rng,
                                         int threads) {
  if (trials < 100) throw std::invalid_argument("estimate_disagreements: trials must be >= 100");
  const int d = dimension(spec);

  struct Partial {
    std::vector<std::uint64_t> coord_counts;
    std::uint64_t label_count = 0;
    std::uint64_t sum_total = 0;
    std::uint64_t sum_total_sq = 0;
  };
  std::vector<Partial> partials(kParallelChunks);

  parallel_chunks(static_cast<std::size_t>(trials), threads,
                  [&](std::size_t first, std::size_t last, std::size_t chunk) {
                    Partial p;
                    p.coord_counts.assign(static_cast<std::size_t>(d), 0);
                    for (std::size_t trial = first; trial < last; ++trial) {
                      RngStream trial_rng = rng.child(trial);
                      const CoupledPair pair = draw_coupled_pair(spec, trial_rng);
                      std::uint64_t total = 0;
                      for (int j = 0; j < d; ++j) {
                        if (pair.sample0.x[j] != pair.sample1.x[j]) {
                          ++p.coord_counts[static_cast<std::size_t>(j)];
                          ++total;
                        }
                      }
                      if (pair.sample0.y != pair.sample1.y) ++p.label_count;
                      p.sum_total += total;
                      p.sum_total_sq += total * total;
                    }
                    partials[chunk] = std::move(p);
                  });

  // Integer partial sums merge to identical totals for any chunking.
  std::vector<std::uint64_t> coord_counts(static_cast<std::size_t>(d), 0);
  std::uint64_t label_count = 0, sum_total = 0, sum_total_sq = 0;
  for (const auto& p : partials) {
    if (p.coord_counts.empty()) continue;
    for (int j = 0; j < d; ++j) coord_counts[static_cast<std::size_t>(j)] += p.coord_counts[j];
    label_count += p.label_count;
    sum_total += p.sum_total;
    sum_total_sq += p.sum_total_sq;
  }

  DisagreementStats stats;
  stats.trials = trials;
  const double n = static_cast<double>(trials);
  stats.mean_coord_disagreements = static_cast<double>(sum_total) / n;
  stats.label_disagreement_rate = static_cast<double>(label_count) / n;
  stats.per_coordinate_rates.resize(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j)
    stats.per_coordinate_rates[static_cast<std::size_t>(j)] =
        static_cast<double>(coord_counts[static_cast<std::size_t>(j)]) / n;
  const double mean_sq = static_cast<double>(sum_total_sq) / n;
  const double variance =
      std::max(0.0, (mean_sq - stats.mean_coord_disagreements * stats.mean_coord_disagreements) *
                        n / (n - 1.0));
  stats.std_error = std::sqrt(variance / n);
  return stats;
}

}  // namespace robustlr
