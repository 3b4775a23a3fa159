#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "robustlr/errors.hpp"
#include "robustlr/gaussian.hpp"
#include "robustlr/stats.hpp"

using namespace robustlr;

TEST_CASE("tv_bound_univariate") {
  CHECK(tv_bound_univariate({0.0, 1.0}, {1.0, 1.0}) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(tv_bound_univariate({3.0, 4.0}, {3.0, 4.0}) == 0.0);
  // The bound dominates the exact TV (quadrature oracle).
  const double exact = oracle::tv_univariate(0.0, 1.0, 0.5, 1.0);
  CHECK(exact == doctest::Approx(0.19741).epsilon(1e-4));
  CHECK(tv_bound_univariate({0.0, 1.0}, {0.5, 1.0}) >= exact);
  CHECK_THROWS_AS(tv_bound_univariate({0.0, 1.0}, {0.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(tv_bound_univariate({0.0, 0.0}, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("tv_exact_univariate_equal_var against the quadrature oracle") {
  CHECK(std::abs(tv_exact_univariate_equal_var({0.0, 1.0}, {1.0, 1.0}) -
                 oracle::tv_univariate(0.0, 1.0, 1.0, 1.0)) < 1e-6);
  CHECK(tv_exact_univariate_equal_var({0.0, 1.0}, {1.0, 1.0}) ==
        doctest::Approx(0.38292492).epsilon(1e-6));
  CHECK(tv_exact_univariate_equal_var({0.0, 1.0}, {0.0, 1.0}) == 0.0);
  CHECK(1.0 - tv_exact_univariate_equal_var({0.0, 1.0}, {100.0, 1.0}) < 1e-12);
}

TEST_CASE("tv bound dominates exact tv for random equal-variance pairs") {
  RngStream rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double var = 0.1 + 3.0 * rng.uniform();
    const UnivariateGaussian g1{2.0 * rng.normal(), var}, g2{2.0 * rng.normal(), var};
    CHECK(tv_exact_univariate_equal_var(g1, g2) <= tv_bound_univariate(g1, g2) + 1e-15);
  }
}

TEST_CASE("kl_gaussians closed form") {
  const Eigen::MatrixXd id2 = Eigen::MatrixXd::Identity(2, 2);
  const MultivariateGaussian p(Eigen::VectorXd::Zero(2), id2);
  CHECK(kl_gaussians(p, p) == doctest::Approx(0.0));
  Eigen::VectorXd mu(2);
  mu << 1.0, 0.0;
  const MultivariateGaussian q(mu, id2);
  CHECK(kl_gaussians(p, q) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(kl_gaussians(p, MultivariateGaussian(mu, Eigen::MatrixXd::Zero(2, 2))),
                  singular_matrix_error);
}

TEST_CASE("kl_gaussians agrees with a Monte Carlo estimate of E_p[log p/q]") {
  RngStream rng(17);
  const int d = 3;
  const MultivariateGaussian p(oracle::random_vector(d, rng), oracle::random_spd(d, rng));
  const MultivariateGaussian q(oracle::random_vector(d, rng), oracle::random_spd(d, rng));
  const double closed = kl_gaussians(p, q);

  const int n = 1000000;
  double sum = 0.0, sumsq = 0.0;
  RngStream sampler = rng.child(0);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = sample_gaussian(p, sampler);
    const double v =
        oracle::mvn_logpdf(x, p.mean, p.covariance) - oracle::mvn_logpdf(x, q.mean, q.covariance);
    sum += v;
    sumsq += v * v;
  }
  const double mc = sum / n;
  const double se = std::sqrt((sumsq / n - mc * mc) / n);
  CHECK(std::abs(closed - mc) < 3.0 * se);
}

TEST_CASE("kl_gaussians is nonnegative on random SPD pairs") {
  RngStream rng(23);
  for (int i = 0; i < 1000; ++i) {
    const MultivariateGaussian p(oracle::random_vector(3, rng), oracle::random_spd(3, rng));
    const MultivariateGaussian q(oracle::random_vector(3, rng), oracle::random_spd(3, rng));
    CHECK(kl_gaussians(p, q) >= 0.0);
  }
}

TEST_CASE("pinsker_tv_bound") {
  CHECK(pinsker_tv_bound(0.0) == 0.0);
  CHECK(pinsker_tv_bound(0.5) == doctest::Approx(0.5));
  CHECK(pinsker_tv_bound(2.0) == doctest::Approx(1.0));  // may exceed 1, caller clamps
  CHECK_THROWS_AS(pinsker_tv_bound(-1e-9), std::invalid_argument);
}

TEST_CASE("sherman_morrison_inverse") {
  const Eigen::VectorXd zero2 = Eigen::VectorXd::Zero(2);
  CHECK(sherman_morrison_inverse(zero2, zero2).isApprox(Eigen::MatrixXd::Identity(2, 2)));

  // Inverse of I - 11'/3 is [[2,1],[1,2]] (checked by direct 2x2 inversion).
  const Eigen::VectorXd u = Eigen::VectorXd::Ones(2);
  const Eigen::VectorXd v = Eigen::VectorXd::Constant(2, -1.0 / 3.0);
  Eigen::MatrixXd expected(2, 2);
  expected << 2.0, 1.0, 1.0, 2.0;
  const Eigen::MatrixXd direct =
      (Eigen::MatrixXd::Identity(2, 2) + u * v.transpose()).inverse();
  CHECK(direct.isApprox(expected, 1e-12));
  CHECK(sherman_morrison_inverse(u, v).isApprox(expected, 1e-12));

  CHECK_THROWS_AS(sherman_morrison_inverse(u, Eigen::VectorXd::Constant(2, -0.5)),
                  singular_matrix_error);
}

TEST_CASE("sherman_morrison_inverse multiplies back to identity") {
  RngStream rng(31);
  int tested = 0;
  while (tested < 1000) {
    const int d = 2 + static_cast<int>(rng.uniform_below(6));
    const Eigen::VectorXd u = oracle::random_vector(d, rng);
    const Eigen::VectorXd v = oracle::random_vector(d, rng);
    if (std::abs(1.0 + v.dot(u)) <= 0.1) continue;
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d) + u * v.transpose();
    const Eigen::MatrixXd product = sherman_morrison_inverse(u, v) * m;
    CHECK((product - Eigen::MatrixXd::Identity(d, d)).norm() < 1e-10);
    ++tested;
  }
}

TEST_CASE("conditional_given_linear") {
  SUBCASE("conditioning on the first coordinate") {
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(3);
    e1[0] = 1.0;
    const MultivariateGaussian g = conditional_given_linear(3, e1, 0.0, 5.0);
    Eigen::VectorXd mean(3);
    mean << 5.0, 0.0, 0.0;
    CHECK(g.mean.isApprox(mean));
    CHECK(g.covariance.isApprox(Eigen::Vector3d(0.0, 1.0, 1.0).asDiagonal().toDenseMatrix()));
  }
  SUBCASE("conditioning on the coordinate sum") {
    const int d = 6;
    const double t = 2.5;
    const MultivariateGaussian g =
        conditional_given_linear(d, Eigen::VectorXd::Ones(d), 0.0, t);
    CHECK(g.mean.isApprox(Eigen::VectorXd::Constant(d, t / d)));
    const Eigen::MatrixXd expected =
        Eigen::MatrixXd::Identity(d, d) -
        Eigen::MatrixXd::Constant(d, d, 1.0 / static_cast<double>(d));
    CHECK(g.covariance.isApprox(expected, 1e-12));
    // sigma = 0 makes u an exact kernel direction
    CHECK((g.covariance * Eigen::VectorXd::Ones(d)).norm() < 1e-10);
  }
  SUBCASE("r = 0 keeps the mean at zero") {
    RngStream rng(3);
    const Eigen::VectorXd u = oracle::random_vector(4, rng);
    CHECK(conditional_given_linear(4, u, 0.7, 0.0).mean.norm() == 0.0);
  }
  CHECK_THROWS_AS(conditional_given_linear(2, Eigen::VectorXd::Zero(2), 0.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("sample_gaussian") {
  SUBCASE("degenerate covariance returns the mean exactly") {
    RngStream rng(4);
    Eigen::VectorXd mu(3);
    mu << 1.0, -2.0, 0.5;
    const MultivariateGaussian g(mu, Eigen::MatrixXd::Zero(3, 3));
    CHECK(sample_gaussian(g, rng) == mu);
  }
  SUBCASE("empirical mean concentrates") {
    RngStream rng(5);
    const int d = 5, n = 100000;
    const MultivariateGaussian g(Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d));
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < n; ++i) sum += sample_gaussian(g, rng);
    CHECK((sum / n).cwiseAbs().maxCoeff() < 0.02);
  }
  SUBCASE("identical seeds give identical draws") {
    const MultivariateGaussian g(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
    RngStream r1(9), r2(9);
    CHECK(sample_gaussian(g, r1) == sample_gaussian(g, r2));
  }
  SUBCASE("rank-deficient covariances sample on the right subspace") {
    RngStream rng(6);
    const int d = 4;
    const Eigen::VectorXd u = Eigen::VectorXd::Ones(d);
    const MultivariateGaussian g = conditional_given_linear(d, u, 0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
      CHECK(sample_gaussian(g, rng).sum() == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  SUBCASE("clearly non-PSD covariance is rejected") {
    Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
    bad(1, 1) = -0.5;
    RngStream rng(7);
    CHECK_THROWS_AS(sample_gaussian(MultivariateGaussian(Eigen::VectorXd::Zero(2), bad), rng),
                    std::invalid_argument);
  }
}

TEST_CASE("sample_sum_conditioned") {
  RngStream rng(8);
  SUBCASE("d = 1 is fully determined") {
    CHECK(sample_sum_conditioned(1, 3.0, rng)[0] == 3.0);
  }
  SUBCASE("the sum constraint holds") {
    for (int i = 0; i < 100; ++i) {
      CHECK(sample_sum_conditioned(10, 7.0, rng).sum() == doctest::Approx(7.0).epsilon(1e-9));
    }
  }
  SUBCASE("d = 2, t = 0 gives antithetic N(0, 1/2) coordinates") {
    const int n = 100000;
    std::vector<double> first(n);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd x = sample_sum_conditioned(2, 0.0, rng);
      CHECK(x[0] == doctest::Approx(-x[1]).epsilon(1e-9));
      first[static_cast<std::size_t>(i)] = x[0];
    }
    CHECK(ks_statistic_normal(first, 0.0, 0.5) < ks_critical_value(0.01, n));
  }
  SUBCASE("marginals are N(t/d, 1 - 1/d)") {
    const int d = 10, n = 100000;
    const double t = 7.0;
    std::vector<double> coord(n);
    for (int i = 0; i < n; ++i) coord[static_cast<std::size_t>(i)] =
        sample_sum_conditioned(d, t, rng)[3];
    CHECK(ks_statistic_normal(coord, t / d, 1.0 - 1.0 / d) < ks_critical_value(0.01, n));
  }
  CHECK_THROWS_AS(sample_sum_conditioned(0, 1.0, rng), std::invalid_argument);
}

TEST_CASE("multivariate gaussian validates symmetry") {
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.2, 0.1, 1.0;
  CHECK_THROWS_AS(MultivariateGaussian(Eigen::VectorXd::Zero(2), asym), std::invalid_argument);
}
