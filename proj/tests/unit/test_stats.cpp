#include "doctest.h"

#include <cmath>
#include <vector>

#include "shiftshare/stats.hpp"

using namespace shiftshare;

TEST_SUITE("stats") {

TEST_CASE("type-7 quantiles interpolate between order statistics") {
  std::vector<double> v = {4.0, 1.0, 3.0, 2.0};
  CHECK(stats::quantile(v, 0.0) == 1.0);
  CHECK(stats::quantile(v, 1.0) == 4.0);
  // h = (n-1)p = 0.75 -> 1 + 0.75
  CHECK(stats::quantile(v, 0.25) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(stats::quantile(v, 0.75) == doctest::Approx(3.25).epsilon(1e-15));
  CHECK(stats::quantile({7.0}, 0.3) == 7.0);
}

TEST_CASE("normal helpers agree with tabulated values") {
  CHECK(stats::normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(stats::normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(stats::normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(stats::normal_pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)));
}

TEST_CASE("KS distance of an exact uniform grid") {
  // points (i - 0.5)/n have distance 1/(2n)
  std::vector<double> u;
  for (int i = 1; i <= 100; ++i) u.push_back((i - 0.5) / 100.0);
  CHECK(stats::ks_uniform(u) == doctest::Approx(0.005).epsilon(1e-12));
}

TEST_CASE("Rng streams are reproducible and independent of consumption order") {
  stats::Rng a(42, 3), b(42, 3), c(42, 4);
  for (int i = 0; i < 10; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x > 0.0);
    CHECK(x < 1.0);
  }
  CHECK(a.uniform() != c.uniform());

  stats::Rng e(7, 0);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = e.exponential();
    sum += x;
    sq += x * x;
  }
  // Exp(1): mean 1, variance 1; 5 standard errors
  CHECK(std::abs(sum / n - 1.0) < 5.0 / std::sqrt(n));
  stats::Rng g(7, 1);
  sum = 0.0;
  for (int i = 0; i < n; ++i) sum += g.normal();
  CHECK(std::abs(sum / n) < 5.0 / std::sqrt(n));
}

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
  const auto rule = stats::gauss_legendre(5);
  double w = 0.0, x8 = 0.0, x9 = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    w += rule.weights[k];
    x8 += rule.weights[k] * std::pow(rule.nodes[k], 8);
    x9 += rule.weights[k] * std::pow(rule.nodes[k], 9);
  }
  CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(x8 == doctest::Approx(2.0 / 9.0).epsilon(1e-13));
  CHECK(std::abs(x9) < 1e-14);

  const auto big = stats::gauss_legendre(200);
  double e = 0.0;
  for (std::size_t k = 0; k < big.nodes.size(); ++k) e += big.weights[k] * std::exp(big.nodes[k]);
  CHECK(e == doctest::Approx(std::exp(1.0) - std::exp(-1.0)).epsilon(1e-13));
}

TEST_CASE("pearson correlation") {
  std::vector<double> a = {1, 2, 3, 4}, b = {2, 4, 6, 8}, c = {4, 3, 2, 1};
  CHECK(stats::pearson(a, b) == doctest::Approx(1.0));
  CHECK(stats::pearson(a, c) == doctest::Approx(-1.0));
}

}
