#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "topolow/common.hpp"
#include "topolow/likelihood.hpp"

using namespace topolow;

namespace {

// Two points on a line, `r` apart.
Configuration pair_at(double r) {
  Configuration c(2, 1);
  c.point(1)[0] = r;
  return c;
}

DissimilarityMatrix one_cell(ObservationCell cell) {
  DissimilarityMatrix d(default_labels(2));
  d.set(0, 1, cell);
  return d;
}

// Expanded Laplace log-density sum: -n log(2b) - sum|e| / b.
double expanded(const std::vector<double>& residuals, double b) {
  long double s = 0.0L;
  for (double e : residuals) s += std::abs(e);
  return static_cast<double>(-static_cast<long double>(residuals.size()) * std::log(2.0L * b) - s / b);
}

}  // namespace

TEST_SUITE("likelihood") {
  TEST_CASE("scale must be positive") {
    CHECK_THROWS_AS(LaplaceScale(0.0), DomainError);
    CHECK_THROWS_AS(LaplaceScale(-1.0), DomainError);
    CHECK(LaplaceScale(2.0).value() == 2.0);
  }

  TEST_CASE("cdf and survivor examples") {
    for (double b : {0.1, 1.0, 7.5}) {
      const LaplaceScale s(b);
      CHECK(laplace_cdf(0.0, s) == 0.5);
      CHECK(laplace_cdf(-b, s) == doctest::Approx(std::exp(-1.0) / 2).epsilon(1e-15));
      CHECK(laplace_survivor(b, s) == doctest::Approx(std::exp(-1.0) / 2).epsilon(1e-15));
      CHECK(laplace_pdf(0.0, s) == doctest::Approx(1.0 / (2 * b)).epsilon(1e-15));
    }
  }

  TEST_CASE("F + S = 1 exactly and logs agree with the probabilities") {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> z(-20.0, 20.0);
    const LaplaceScale b(1.7);
    for (int k = 0; k < 2000; ++k) {
      const double v = z(rng);
      const double f = laplace_cdf(v, b);
      const double s = laplace_survivor(v, b);
      CHECK(f + s == 1.0);
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
      CHECK(laplace_cdf(-v, b) == doctest::Approx(s).epsilon(1e-12));
      CHECK(log_laplace_cdf(v, b) == doctest::Approx(std::log(f)).epsilon(1e-9));
      CHECK(log_laplace_survivor(v, b) == doctest::Approx(std::log(s)).epsilon(1e-9));
    }
    // Deep tails stay finite and clamp at log(1e-300).
    CHECK(log_laplace_survivor(1e6, b) == doctest::Approx(std::log(kProbabilityFloor)));
    CHECK(log_laplace_cdf(-1e6, b) == doctest::Approx(std::log(kProbabilityFloor)));
  }

  TEST_CASE("mae examples") {
    CHECK(mae(pair_at(2.0), one_cell(ObservationCell::exact(2.0))) == 0.0);
    CHECK(mae(pair_at(2.0), one_cell(ObservationCell::exact(1.0))) == 1.0);
    // Errors {0.5, 1.5}: the two directions of one pair.
    auto d = one_cell(ObservationCell::exact(1.5));
    d.set(1, 0, ObservationCell::exact(3.5));
    CHECK(mae(pair_at(2.0), d) == 1.0);
    // Censored cells do not count.
    d.set(1, 0, ObservationCell::right_censored(50));
    CHECK(mae(pair_at(2.0), d) == 0.5);
    CHECK_THROWS_AS(mae(pair_at(1.0), one_cell(ObservationCell::left_censored(3))), DomainError);
  }

  TEST_CASE("exact log-likelihood examples") {
    CHECK(log_likelihood_exact(pair_at(1.5), one_cell(ObservationCell::exact(1.0))) == doctest::Approx(-1.0));
    auto d = one_cell(ObservationCell::exact(1.0));
    d.set(1, 0, ObservationCell::exact(3.0));
    CHECK(log_likelihood_exact(pair_at(2.0), d) == doctest::Approx(-2 * std::log(2.0) - 2).epsilon(1e-14));
    CHECK(laplace_log_likelihood(10, 0.5) == doctest::Approx(-10.0).epsilon(1e-15));
    CHECK(std::isfinite(laplace_log_likelihood(3, 0.0)));
    CHECK(laplace_log_likelihood(3, 0.0) == laplace_log_likelihood(3, kMaeFloor));
  }

  TEST_CASE("log-likelihood decreases in MAE and peaks at b = MAE") {
    double prev = laplace_log_likelihood(20, 0.01);
    for (double m = 0.02; m < 10.0; m *= 1.3) {
      const double cur = laplace_log_likelihood(20, m);
      CHECK(cur < prev);
      prev = cur;
    }
    std::mt19937 rng(4);
    std::normal_distribution<double> e(0.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> res(15);
      double sum = 0.0;
      for (double& r : res) {
        r = e(rng);
        sum += std::abs(r);
      }
      const double b_hat = sum / 15.0;
      const double peak = expanded(res, b_hat);
      for (double f : {0.5, 0.8, 0.95, 0.99, 1.01, 1.05, 1.2, 2.0}) CHECK(expanded(res, f * b_hat) < peak);
    }
  }

  TEST_CASE("censored terms at the threshold equal log 0.5") {
    const LaplaceScale b(0.7);
    auto right = log_likelihood_censored(pair_at(3.0), one_cell(ObservationCell::right_censored(3.0)), b);
    CHECK(right.right_censored_term == doctest::Approx(std::log(0.5)).epsilon(1e-15));
    CHECK(right.right_censored_count == 1);
    CHECK(right.total == right.right_censored_term);
    auto left = log_likelihood_censored(pair_at(3.0), one_cell(ObservationCell::left_censored(3.0)), b);
    CHECK(left.left_censored_term == doctest::Approx(std::log(0.5)).epsilon(1e-15));
    CHECK(left.left_censored_count == 1);
  }

  TEST_CASE("breakdown total is the sum of its terms") {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    const auto x = oracle::random_points(12, 2, 3);
    DissimilarityMatrix d(default_labels(12));
    for (std::size_t i = 0; i < 12; ++i)
      for (std::size_t j = 0; j < 12; ++j) {
        if (i == j) continue;
        const auto k = (i + 2 * j) % 4;
        if (k == 1) d.set(i, j, ObservationCell::exact(u(rng)));
        if (k == 2) d.set(i, j, ObservationCell::left_censored(u(rng)));
        if (k == 3) d.set(i, j, ObservationCell::right_censored(u(rng)));
      }
    const auto r = log_likelihood_censored(Configuration(x), d);
    CHECK(r.total == doctest::Approx(r.exact_term + r.left_censored_term + r.right_censored_term).epsilon(1e-15));
    CHECK(r.scale == doctest::Approx(mae(Configuration(x), d)).epsilon(1e-15));
    CHECK(r.exact_count + r.left_censored_count + r.right_censored_count == d.observed_count());
  }
}
