#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "shiftshare/basis.hpp"
#include "shiftshare/errors.hpp"

using namespace shiftshare;

namespace {

// Textbook Cox-de Boor recursion with 0/0 := 0; the last function is closed at the right end.
double cox_de_boor(const std::vector<double>& t, int i, int k, double x) {
  if (k == 0) {
    const bool last = x == t.back() && t[static_cast<std::size_t>(i + 1)] == t.back() &&
                      t[static_cast<std::size_t>(i)] < t.back();
    return (t[static_cast<std::size_t>(i)] <= x && x < t[static_cast<std::size_t>(i + 1)]) || last ? 1.0 : 0.0;
  }
  double out = 0.0;
  const double a = t[static_cast<std::size_t>(i + k)] - t[static_cast<std::size_t>(i)];
  const double b = t[static_cast<std::size_t>(i + k + 1)] - t[static_cast<std::size_t>(i + 1)];
  if (a > 0.0) out += (x - t[static_cast<std::size_t>(i)]) / a * cox_de_boor(t, i, k - 1, x);
  if (b > 0.0) out += (t[static_cast<std::size_t>(i + k + 1)] - x) / b * cox_de_boor(t, i + 1, k - 1, x);
  return out;
}

std::vector<double> clamped_knots(int degree, const std::vector<double>& interior, double lo, double hi) {
  std::vector<double> t(static_cast<std::size_t>(degree + 1), lo);
  t.insert(t.end(), interior.begin(), interior.end());
  t.insert(t.end(), static_cast<std::size_t>(degree + 1), hi);
  return t;
}

}  // namespace

TEST_SUITE("basis") {

TEST_CASE("degree 1 without interior knots is the linear hat pair") {
  SplineSpec spec;
  spec.degree = 1;
  spec.n_knots = 0;
  BSpline b(spec, {}, 0.0, 1.0);
  const auto r = b.row(0.5);
  REQUIRE(r.size() == 2);
  CHECK(r(0) == doctest::Approx(0.5));
  CHECK(r(1) == doctest::Approx(0.5));
}

TEST_CASE("evaluation matches the recursive definition") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (int degree = 1; degree <= 3; ++degree) {
    SplineSpec spec;
    spec.degree = degree;
    spec.n_knots = 4;
    const std::vector<double> interior = {-0.4, 0.1, 0.3, 1.2};
    BSpline b(spec, interior, -1.0, 2.0);
    const auto t = clamped_knots(degree, interior, -1.0, 2.0);
    CHECK(b.knot_vector() == t);
    for (int s = 0; s < 200; ++s) {
      const double x = s == 0 ? -1.0 : s == 1 ? 2.0 : u(gen);
      const auto row = b.row(x);
      for (int i = 0; i < b.dim(); ++i) CHECK(row(i) == doctest::Approx(cox_de_boor(t, i, degree, x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("partition of unity to 1e-12") {
  SplineSpec spec;
  BSpline b(spec, {0.2, 0.4, 0.5, 0.9}, 0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s <= 1000; ++s) worst = std::max(worst, std::abs(b.row(s / 1000.0).sum() - 1.0));
  CHECK(worst <= 1e-12);
}

TEST_CASE("derivative matches central differences") {
  SplineSpec spec;
  BSpline b(spec, {0.2, 0.4, 0.5, 0.9}, 0.0, 1.0);
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  const double h = 1e-5;
  for (int s = 0; s < 100; ++s) {
    const double x = u(gen);
    const auto d = b.drow(x);
    const Eigen::RowVectorXd fd = (b.row(x + h) - b.row(x - h)) / (2 * h);
    for (int i = 0; i < b.dim(); ++i) CHECK(std::abs(d(i) - fd(i)) <= 1e-6 * (1.0 + std::abs(d(i))));
  }
}

TEST_CASE("linear extrapolation outside the boundary") {
  SplineSpec spec;
  BSpline b(spec, {0.2, 0.4, 0.5, 0.9}, 0.0, 1.0);
  const Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(b.dim(), 1.0, 3.0).array().square();
  const double f0 = b.row(1.0).dot(c), s0 = b.drow(1.0).dot(c);
  CHECK(b.row(1.5).dot(c) == doctest::Approx(f0 + 0.5 * s0).epsilon(1e-12));
  CHECK(b.drow(1.5).dot(c) == doctest::Approx(s0).epsilon(1e-12));
  const double g0 = b.row(0.0).dot(c), t0 = b.drow(0.0).dot(c);
  CHECK(b.row(-0.25).dot(c) == doctest::Approx(g0 - 0.25 * t0).epsilon(1e-12));
}

TEST_CASE("knot placement rules") {
  std::vector<double> sample;
  for (int i = 0; i <= 100; ++i) sample.push_back(std::pow(i / 100.0, 2));
  SplineSpec q;
  q.n_knots = 3;
  const auto bq = BSpline::place(q, sample);
  // quartiles of i^2/10^4: (25/100)^2 etc.
  CHECK(bq.interior_knots()[0] == doctest::Approx(0.0625));
  CHECK(bq.interior_knots()[1] == doctest::Approx(0.25));
  SplineSpec uni = q;
  uni.rule = KnotRule::Uniform;
  const auto bu = BSpline::place(uni, sample);
  CHECK(bu.interior_knots()[1] == doctest::Approx(0.5));

  std::vector<double> tied(50, 1.0);
  tied.push_back(2.0);
  CHECK_THROWS_AS(BSpline::place(q, tied), Error);
}

TEST_CASE("spec validation and dimensions") {
  SplineSpec s;
  CHECK(s.dim() == 8);
  s.include_intercept = true;
  CHECK(s.dim() == 9);
  s.degree = 4;
  CHECK_THROWS_AS(s.validate(), Error);
  CHECK_THROWS_AS(SplineSpec::from_json({{"rule", "cubic-ish"}}), Error);
  const auto back = SplineSpec::from_json(SplineSpec{}.to_json());
  CHECK(back.dim() == 8);
}

TEST_CASE("K2 tensor layout and x-derivative") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  const int n = 300;
  Eigen::VectorXd x(n), v(n);
  Eigen::MatrixXd d(n, 2);
  for (int i = 0; i < n; ++i) {
    x(i) = nd(gen);
    v(i) = (i + 0.5) / n;
    d(i, 0) = nd(gen);
    d(i, 1) = nd(gen);
  }
  K2Spec spec;
  const auto k2 = build_k2(x, d, v, spec);
  REQUIRE(k2.k2.has_value());
  CHECK(k2.columns.cols() == 8 * 8 + 2);
  const auto& basis = *k2.k2;
  // column a*dim_v + b is qx_a(x) qv_b(v)
  const auto bx = basis.qx().row(x(7)), bv = basis.qv().row(v(7));
  CHECK(k2.columns(7, 3 * 8 + 5) == doctest::Approx(bx(3) * bv(5)));
  CHECK(k2.columns(7, 64) == d(7, 0));
  // the tensor block sums to one (both factors are partitions of unity)
  CHECK(k2.columns.row(7).head(64).sum() == doctest::Approx(1.0).epsilon(1e-12));

  const auto dd = d_dx_k2(k2, x, d, v);
  const double h = 1e-5;
  const Eigen::VectorXd xp = x.array() + h, xm = x.array() - h;
  const Eigen::MatrixXd fd = (evaluate_k2(basis, xp, d, v).columns - evaluate_k2(basis, xm, d, v).columns) / (2 * h);
  // the sample extremes sit on the boundary knots, where the second derivative jumps
  const double lo = x.minCoeff(), hi = x.maxCoeff();
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    if (x(i) - lo < 2 * h || hi - x(i) < 2 * h) continue;
    worst = std::max(worst, (dd.row(i) - fd.row(i)).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-6 * (1.0 + dd.cwiseAbs().maxCoeff()));
  CHECK(dd.rightCols(2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dependent columns follow pivot order") {
  Eigen::MatrixXd m(6, 3);
  m << 1, 2, 3, 1, 0, 1, 1, 1, 2, 1, 5, 6, 1, 3, 4, 1, 2, 3;  // col2 = col0 + col1
  const auto dep = dependent_columns(m);
  REQUIRE(dep.size() == 1);
  CHECK((dep[0] == 0 || dep[0] == 1 || dep[0] == 2));
}

}
