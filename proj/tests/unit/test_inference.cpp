#include "doctest.h"

#include <cmath>

#include "shiftshare/errors.hpp"
#include "shiftshare/inference.hpp"
#include "shiftshare/synthetic.hpp"

using namespace shiftshare;

namespace {

PipelineConfig small_config() {
  PipelineConfig c;
  c.grid.m1 = 39;
  c.grid_points = 10;
  return c;
}

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("bootstrap weights are a pure function of seed and replicate") {
  const auto a = bootstrap_weights(3, 7, 20000);
  const auto b = bootstrap_weights(3, 7, 20000);
  const auto c = bootstrap_weights(3, 8, 20000);
  CHECK(a == b);
  CHECK(a != c);
  double mean = 0.0, sq = 0.0;
  for (double w : a) {
    CHECK(w > 0.0);
    mean += w;
    sq += w * w;
  }
  mean /= 20000;
  const double var = sq / 20000 - mean * mean;
  // Exp(1): mean 1, variance 1; the mean has sd 1/sqrt(20000)
  CHECK(std::abs(mean - 1.0) <= 3.0 / std::sqrt(20000.0));
  CHECK(std::abs(var - 1.0) <= 0.1);
}

TEST_CASE("IQR standard error") {
  CHECK(se_iqr({1, 2, 3, 4}) == doctest::Approx(1.5 / 1.349).epsilon(1e-14));
  CHECK(se_iqr({4, 3, 2, 1, 5}) == doctest::Approx(2.0 / 1.349).epsilon(1e-14));
  try {
    se_iqr({1, 2, 3});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TooFewDraws);
  }
}

TEST_CASE("uniform band by hand") {
  // point (0, 0); draws give per-coordinate IQRs of 2 and 4
  std::vector<Eigen::VectorXd> draws;
  for (double t : {-1.5, -0.5, 0.5, 1.5, 0.0}) draws.push_back(Eigen::Vector2d(t, 2 * t));
  const Eigen::Vector2d point(0.0, 0.0);
  const auto band = uniform_band("t", draws, point, 0.2);
  // type-7 quartiles of {-1.5,-0.5,0,0.5,1.5} are -0.5 and 0.5
  CHECK(band.se(0) == doctest::Approx(1.0 / 1.349));
  CHECK(band.se(1) == doctest::Approx(2.0 / 1.349));
  // sup-t draws all equal |t| * 1.349; the 0.8 quantile of {0, .5, .5, 1.5, 1.5} * 1.349
  const double k = 1.5 * 1.349;
  CHECK(band.k_alpha == doctest::Approx(k));
  CHECK(band.upper(1) == doctest::Approx(k * 2.0 / 1.349));
  CHECK(band.lower(0) == doctest::Approx(-k / 1.349));
  CHECK(band.excluded.empty());

  // a constant coordinate is excluded from the sup
  std::vector<Eigen::VectorXd> flat;
  for (double t : {-1.0, 0.0, 1.0, 2.0}) flat.push_back(Eigen::Vector2d(t, 3.0));
  const auto b2 = uniform_band("t", flat, Eigen::Vector2d(0.5, 3.0), 0.1);
  REQUIRE(b2.excluded.size() == 1);
  CHECK(b2.excluded[0] == 1);
  CHECK(b2.lower(1) == 3.0);

  std::vector<Eigen::VectorXd> all_flat(5, Eigen::Vector2d(1.0, 1.0));
  try {
    uniform_band("t", all_flat, Eigen::Vector2d(1.0, 1.0), 0.1);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateSE);
  }
  CHECK_THROWS_AS(uniform_band("t", draws, point, 1.0), Error);
}

TEST_CASE("unit weights reproduce the point estimate") {
  const auto sim = generate(DgpSpec::canonical(DgpKind::LinearGaussian, 400, 3));
  const auto config = small_config();
  const PolicySet none;
  const auto point = run_algorithm1(sim.panel, config, none);
  BootstrapOptions opts;
  opts.b = 3;
  opts.unit_weights = true;
  const auto run = run_bootstrap(sim.panel, config, none, point, opts);
  REQUIRE(run.draws.size() == 3);
  for (const auto& d : run.draws) {
    CHECK(d.ad == doctest::Approx(point.estimates.ad).epsilon(1e-10));
    CHECK((d.asf - point.estimates.asf).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((d.lar - point.estimates.lar).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("replicates do not depend on the thread count") {
  const auto sim = generate(DgpSpec::canonical(DgpKind::LinearGaussian, 300, 4));
  const auto config = small_config();
  const PolicySet none;
  const auto point = run_algorithm1(sim.panel, config, none);
  BootstrapOptions opts;
  opts.b = 6;
  opts.seed = 99;
  opts.threads = 1;
  const auto one = run_bootstrap(sim.panel, config, none, point, opts);
  opts.threads = 3;
  const auto three = run_bootstrap(sim.panel, config, none, point, opts);
  REQUIRE(one.draws.size() == three.draws.size());
  for (std::size_t r = 0; r < one.draws.size(); ++r) {
    CHECK(one.replicate[r] == three.replicate[r]);
    CHECK(one.draws[r].ad == three.draws[r].ad);
    CHECK(one.draws[r].lar == three.draws[r].lar);
  }
  const auto bands = uniform_bands(one, point.estimates, 0.1);
  CHECK(bands.lar.point.size() == 10);
  CHECK((bands.lar.lower.array() <= bands.lar.upper.array()).all());
  CHECK(bands.ad.k_alpha > 0.0);

  opts.b = 0;
  CHECK_THROWS_AS(run_bootstrap(sim.panel, config, none, point, opts), Error);
}

}
