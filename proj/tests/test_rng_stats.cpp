#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "robustlr/rng.hpp"
#include "robustlr/stats.hpp"

using namespace robustlr;

TEST_CASE("rng determinism: same seed, same call sequence, same output") {
  RngStream a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  RngStream c(42), d(43);
  CHECK(c.next_u64() != d.next_u64());
}

TEST_CASE("rng child streams are reproducible and distinct") {
  RngStream root(7);
  RngStream c1 = root.child(3), c2 = root.child(3), c3 = root.child(4);
  CHECK(c1.next_u64() == c2.next_u64());
  CHECK(c1.next_u64() != c3.next_u64());
  // deriving children does not perturb the parent
  RngStream r1(7), r2(7);
  r1.child(0);
  CHECK(r1.next_u64() == r2.next_u64());
}

TEST_CASE("uniform lies in the open unit interval") {
  RngStream rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal draws have the right first two moments") {
  RngStream rng(2);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(double(n)));
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("uniform_below covers the range and respects the bound") {
  RngStream rng(3);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 5000; ++i) ++counts[rng.uniform_below(5)];
  for (int c : counts) CHECK(c > 800);
  CHECK_THROWS_AS(rng.uniform_below(0), std::invalid_argument);
}

TEST_CASE("normal_cdf matches the quadrature oracle to 1e-12") {
  for (double x : {-4.0, -1.0, -0.3, 0.0, 0.25, 0.5, 1.0, 2.5, 5.0}) {
    CHECK(std::abs(normal_cdf(x) - oracle::normal_cdf(x)) < 1e-12);
  }
}

TEST_CASE("normal_quantile inverts normal_cdf") {
  for (double p : {1e-10, 1e-4, 0.01, 0.3, 0.5, 0.75, 0.99, 1.0 - 1e-9}) {
    CHECK(std::abs(normal_cdf(normal_quantile(p)) - p) < 1e-12);
  }
  CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("ks statistic on hand-computable samples") {
  // A single sample at 0.25 against U(0,1): the empirical CDF jumps to 1
  // there, so the statistic is 0.75.
  CHECK(ks_statistic_from_sorted_cdf(std::vector<double>{0.25}) == doctest::Approx(0.75));
  // {0.1, 0.15, 0.2, 0.8} against U(0,1): max gap 0.55 just after 0.2.
  CHECK(ks_statistic_from_sorted_cdf(std::vector<double>{0.1, 0.15, 0.2, 0.8}) ==
        doctest::Approx(0.55));
}

TEST_CASE("ks test accepts normal samples and rejects uniform ones") {
  RngStream rng(11);
  const std::size_t n = 20000;
  std::vector<double> normal_samples(n), uniform_samples(n);
  for (auto& v : normal_samples) v = 2.0 + 3.0 * rng.normal();
  for (auto& v : uniform_samples) v = rng.uniform() * 6.0 - 1.0;
  const double crit = ks_critical_value(0.01, n);
  CHECK(ks_statistic_normal(normal_samples, 2.0, 9.0) < crit);
  CHECK(ks_statistic_normal(uniform_samples, 2.0, 9.0) > crit);
}

TEST_CASE("ks critical value has the classical asymptotic form") {
  // c(0.01) = sqrt(ln(200)/2) = 1.6276...
  CHECK(ks_critical_value(0.01, 100) == doctest::Approx(1.62762 / 10.0).epsilon(1e-4));
}

TEST_CASE("chi-square critical approximates well-known quantiles") {
  // chi^2_{10} at 1%: 23.209; Wilson-Hilferty is good to a fraction of a unit.
  CHECK(chi_square_critical(0.01, 10) == doctest::Approx(23.209).epsilon(0.01));
  CHECK(chi_square_critical(0.01, 99) == doctest::Approx(134.64).epsilon(0.01));
}

TEST_CASE("median and interquartile range") {
  CHECK(median({3.0, 1.0, 2.0}) == doctest::Approx(2.0));
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == doctest::Approx(2.5));
  CHECK(interquartile_range({1.0, 2.0, 3.0, 4.0, 5.0}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(median({}), std::invalid_argument);
}
