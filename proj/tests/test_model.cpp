#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "robustlr/dataset_io.hpp"
#include "robustlr/errors.hpp"
#include "robustlr/model.hpp"
#include "robustlr/stats.hpp"

using namespace robustlr;

TEST_CASE("sample_clean") {
  SUBCASE("noiseless labels reproduce beta'x exactly") {
    RngStream rng(1);
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(3);
    e1[0] = 1.0;
    for (const auto& s : sample_clean(RegressionInstance(3, e1, 0.0), 100, rng)) {
      CHECK(s.y == s.x[0]);
    }
  }
  SUBCASE("label variance for beta = 0") {
    RngStream rng(2);
    const int n = 100000;
    double sumsq = 0.0;
    for (const auto& s : sample_clean(RegressionInstance(2, Eigen::VectorXd::Zero(2), 1.0), n, rng))
      sumsq += s.y * s.y;
    CHECK(sumsq / n == doctest::Approx(1.0).epsilon(0.05));
  }
  SUBCASE("E[y x] recovers beta") {
    RngStream rng(3);
    const int d = 4, n = 100000;
    Eigen::VectorXd beta(d);
    beta << 0.5, -1.0, 0.0, 2.0;
    const RegressionInstance inst(d, beta, 1.0);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
    for (const auto& s : sample_clean(inst, n, rng)) sum += s.y * s.x;
    const double tol = 3.0 * std::sqrt((beta.squaredNorm() + 1.0) / n);
    CHECK(((sum / n) - beta).cwiseAbs().maxCoeff() < 2.0 * tol);
  }
  SUBCASE("residuals pass a KS test against N(0, sigma^2)") {
    RngStream rng(4);
    const int n = 100000;
    Eigen::VectorXd beta(3);
    beta << 1.0, 2.0, -1.0;
    const RegressionInstance inst(3, beta, 0.7);
    std::vector<double> resid;
    resid.reserve(n);
    for (const auto& s : sample_clean(inst, n, rng)) resid.push_back(s.y - beta.dot(s.x));
    CHECK(ks_statistic_normal(resid, 0.0, 0.49) < ks_critical_value(0.01, n));
  }
}

TEST_CASE("label_distribution") {
  CHECK(label_distribution(RegressionInstance(2, Eigen::VectorXd::Zero(2), 1.0)).variance ==
        doctest::Approx(1.0));
  CHECK(label_distribution(RegressionInstance(2, Eigen::VectorXd::Ones(2), 0.0)).variance ==
        doctest::Approx(2.0));
  Eigen::VectorXd beta(2);
  beta << 3.0, 4.0;
  CHECK(label_distribution(RegressionInstance(2, beta, 2.0)).variance == doctest::Approx(29.0));
}

TEST_CASE("label law matches the empirical labels of sample_clean") {
  RngStream rng(5);
  Eigen::VectorXd beta(4);
  beta << 0.3, -0.1, 0.7, 0.2;
  const RegressionInstance inst(4, beta, 0.5);
  const int n = 100000;
  std::vector<double> labels;
  labels.reserve(n);
  for (const auto& s : sample_clean(inst, n, rng)) labels.push_back(s.y);
  CHECK(ks_statistic_normal(labels, 0.0, label_distribution(inst).variance) <
        ks_critical_value(0.01, n));
}

TEST_CASE("make_small_beta_pair") {
  SUBCASE("r = 0 gives the sign-flipped diagonal pair") {
    const HypothesisPair p = make_small_beta_pair(4, 1.0, 1.0);
    CHECK(p.beta0.isApprox(Eigen::VectorXd::Constant(4, 0.5)));
    CHECK(p.beta1.isApprox(Eigen::VectorXd::Constant(4, -0.5)));
  }
  SUBCASE("b = 0 degenerates to zero vectors") {
    const HypothesisPair p = make_small_beta_pair(3, 0.0, 1.0);
    CHECK(p.beta0.norm() == 0.0);
    CHECK(p.beta1.norm() == 0.0);
  }
  SUBCASE("the r extension fixes the first coordinate") {
    const HypothesisPair p = make_small_beta_pair(2, 1.0, 1.0, 3.0);
    CHECK(p.beta0.norm() == doctest::Approx(std::sqrt(10.0)));
    CHECK(p.beta1.norm() == doctest::Approx(std::sqrt(10.0)));
    CHECK(p.beta0[0] == p.beta1[0]);
    CHECK(p.beta0[1] == -p.beta1[1]);
  }
  CHECK_THROWS_AS(make_small_beta_pair(1, 1.0, 1.0, 2.0), std::invalid_argument);
}

TEST_CASE("make_big_eta_pair") {
  const HypothesisPair p = make_big_eta_pair(3, 1.0);
  CHECK(p.beta0.isApprox(Eigen::VectorXd::Ones(3)));
  CHECK(p.beta1.isApprox(-Eigen::VectorXd::Ones(3)));
  CHECK(make_big_eta_pair(5, 0.0).separation() == 0.0);
  CHECK(make_big_eta_pair(9, 2.0).separation() == doctest::Approx(12.0));
}

TEST_CASE("make_interm_eta_pair") {
  const HypothesisPair p = make_interm_eta_pair(4, 1.0, 0.5);
  Eigen::VectorXd b0(4), b1(4);
  b0 << 0.5, 0.5, 1.0, 1.0;
  b1 << -0.5, -0.5, 1.0, 1.0;
  CHECK(p.beta0.isApprox(b0));
  CHECK(p.beta1.isApprox(b1));
  CHECK(make_interm_eta_pair(6, 1.0, 0.0).separation() == 0.0);
  // |beta - beta'| = s eps sqrt(2 d) / ... = 2 s eps sqrt(d/2)
  CHECK(make_interm_eta_pair(8, 1.0, 1.0).separation() == doctest::Approx(4.0));
  CHECK_THROWS_AS(make_interm_eta_pair(5, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("interm_epsilon") {
  const double threshold = 2.0 / (0.9 * 100.0);
  CHECK(interm_epsilon(threshold, 100, 0.1, 6.0) == doctest::Approx(0.0));
  CHECK(interm_epsilon(0.1, 100, 0.1, 6.0) == doctest::Approx(0.1296296).epsilon(1e-5));
  CHECK(interm_epsilon(0.2, 100, 0.1, 6.0) > interm_epsilon(0.1, 100, 0.1, 6.0));
  CHECK_THROWS_AS(interm_epsilon(0.01, 100, 0.1, 6.0), regime_error);
  // eps stays <= 1 up to eta = 4/sqrt(d) with the implemented constants
  CHECK(interm_epsilon(4.0 / 10.0, 100, 0.1, 6.0) <= 1.0);
}

TEST_CASE("interm_scale_for_norm hits the requested norm") {
  for (double target : {0.5, 1.0, 7.0}) {
    const double s = interm_scale_for_norm(target, 8, 0.3);
    CHECK(make_interm_eta_pair(8, s, 0.3).beta0.norm() ==
          doctest::Approx(target).epsilon(1e-12));
  }
}

TEST_CASE("make_small_eta_pair") {
  const HypothesisPair p = make_small_eta_pair(4, 2.0, 0.5, 1.0);
  Eigen::VectorXd b0(4), b1(4);
  b0 << 1.0, 1.0, 0.25, 0.25;
  b1 << 1.0, 1.0, -0.25, -0.25;
  CHECK(p.beta0.isApprox(b0));
  CHECK(p.beta1.isApprox(b1));
  CHECK(make_small_eta_pair(6, 1.0, 1e-12, 1.0).separation() < 1e-11);
  // |beta|^2 = (B^2 + E^2)/2 for any d
  for (int d : {4, 10, 64}) {
    CHECK(make_small_eta_pair(d, 2.0, 0.5, 1.0).beta0.squaredNorm() ==
          doctest::Approx((4.0 + 0.25) / 2.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(make_small_eta_pair(3, 1.0, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("small_eta_E") {
  CHECK(small_eta_E(0.01, 10, 0.0, 1.0, 5.0) == 0.0);
  CHECK(small_eta_E(0.001, 100, 1.0, 1.0, 5.0) == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(small_eta_E(0.002, 100, 1.0, 1.0, 5.0) ==
        doctest::Approx(2.0 * small_eta_E(0.001, 100, 1.0, 1.0, 5.0)).epsilon(1e-12));
  CHECK_THROWS_AS(small_eta_E(0.9, 100, 50.0, 50.0, 1.0), regime_error);
}

TEST_CASE("pair constructors are norm-symmetric and differ only where prescribed") {
  const auto agreeing = [](const HypothesisPair& p) {
    std::vector<int> idx;
    for (Eigen::Index i = 0; i < p.beta0.size(); ++i)
      if (p.beta0[i] == p.beta1[i]) idx.push_back(static_cast<int>(i));
    return idx;
  };
  CHECK(make_small_beta_pair(6, 0.5, 1.0).beta0.norm() ==
        make_small_beta_pair(6, 0.5, 1.0).beta1.norm());
  CHECK(agreeing(make_small_beta_pair(6, 0.5, 1.0, 2.0)) == std::vector<int>{0});
  CHECK(agreeing(make_big_eta_pair(4, 1.0)).empty());
  CHECK(agreeing(make_interm_eta_pair(6, 1.0, 0.5)) == std::vector<int>{3, 4, 5});
  CHECK(agreeing(make_small_eta_pair(6, 1.0, 0.5, 1.0)) == std::vector<int>{0, 1, 2});
}

TEST_CASE("jsonl round trip is exact") {
  RngStream rng(6);
  std::vector<MaskedSample> data;
  for (int i = 0; i < 50; ++i) {
    MaskedSample s;
    s.x = oracle::random_vector(7, rng, 13.7);
    s.present.assign(7, true);
    for (int j = 0; j < 7; ++j)
      if (rng.uniform() < 0.3) {
        s.present[static_cast<std::size_t>(j)] = false;
        s.x[j] = 0.0;
      }
    if (rng.uniform() < 0.8) s.y = rng.normal() * 1e-7;
    data.push_back(std::move(s));
  }
  std::ostringstream os;
  write_jsonl(os, data);
  std::istringstream is(os.str());
  const auto back = read_jsonl(is);
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(back[i].present == data[i].present);
    CHECK(back[i].y == data[i].y);
    for (int j = 0; j < 7; ++j)
      if (data[i].present[static_cast<std::size_t>(j)]) CHECK(back[i].x[j] == data[i].x[j]);
  }
}

TEST_CASE("to_labeled rejects erased entries") {
  MaskedSample s;
  s.x = Eigen::VectorXd::Zero(2);
  s.present = {true, false};
  s.y = 1.0;
  CHECK_THROWS(to_labeled({s}));
}
