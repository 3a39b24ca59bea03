#include "doctest.h"

#include <cmath>

#include "shiftshare/errors.hpp"
#include "shiftshare/stats.hpp"
#include "shiftshare/synthetic.hpp"

using namespace shiftshare;

TEST_SUITE("synthetic") {

TEST_CASE("same seed, same draw") {
  for (auto kind : {DgpKind::LinearGaussian, DgpKind::HeteroskedasticQr, DgpKind::Quadratic,
                    DgpKind::SignFlipFirstStage}) {
    const auto a = generate(DgpSpec::canonical(kind, 200, 5));
    const auto b = generate(DgpSpec::canonical(kind, 200, 5));
    const auto c = generate(DgpSpec::canonical(kind, 200, 6));
    CHECK(a.panel.y == b.panel.y);
    CHECK(a.panel.w == b.panel.w);
    CHECK(a.panel.y != c.panel.y);
    CHECK(dgp_from_name(dgp_name(kind)) == kind);
  }
  CHECK_THROWS_AS(dgp_from_name("cubic"), Error);
}

TEST_CASE("invalid specifications") {
  auto s = DgpSpec::canonical(DgpKind::LinearGaussian, 100, 1);
  s.s0 = 0.0;
  try {
    s.validate();
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidSpec);
  }
  auto t = DgpSpec::canonical(DgpKind::HeteroskedasticQr, 100, 1);
  t.s1 = -1.0;  // scale 0.5 - 2 < 0 at the top of the support
  CHECK_THROWS_AS(t.validate(), Error);
  auto u = DgpSpec::canonical(DgpKind::LinearGaussian, 100, 1);
  u.d2.clear();
  CHECK_THROWS_AS(u.validate(), Error);
  const auto back = DgpSpec::from_json(DgpSpec::canonical(DgpKind::Quadratic, 50, 2).to_json());
  CHECK(back.kind == DgpKind::Quadratic);
  CHECK(back.b2 == 1.0);
}

TEST_CASE("simulated moments match the design") {
  const auto spec = DgpSpec::canonical(DgpKind::LinearGaussian, 20000, 9);
  const auto sim = generate(spec);
  const double n = 20000;
  // E[X] = 1 + E[Z] = 1 + (2 + 1 + 3)/2 = 4, Var(X) = Σ s_j²/12 + 0.25 + 0.09
  const double var_x = (4.0 + 1.0 + 9.0) / 12.0 + 0.25 + 0.09;
  CHECK(spec.mean_x() == doctest::Approx(4.0));
  CHECK(std::abs(sim.panel.x.mean() - 4.0) <= 3.0 * std::sqrt(var_x / n));
  const double var_hat = (sim.panel.x.array() - sim.panel.x.mean()).square().mean();
  CHECK(std::abs(var_hat - var_x) <= 0.05 * var_x);
  // η is uniform and equals the conditional CDF of X
  CHECK(std::abs(sim.latent.eta.mean() - 0.5) <= 3.0 * std::sqrt(1.0 / 12.0 / n));
  for (Eigen::Index i = 0; i < 50; ++i) {
    const double z = (*sim.panel.z)(i);
    const double mean = 1.0 + z + 0.3 * sim.panel.d(i, 0);
    CHECK(stats::normal_cdf((sim.panel.x(i) - mean) / 0.5) == doctest::Approx(sim.latent.eta(i)).epsilon(1e-9));
    CHECK(z == doctest::Approx(sim.panel.w.row(i).dot(Eigen::Vector3d(2.0, 1.0, 3.0))));
  }
}

TEST_CASE("sector embedding reproduces X at zero tariff") {
  const auto sim = generate(DgpSpec::canonical(DgpKind::HeteroskedasticQr, 500, 3));
  const auto ell = tariff_policy(sim.sectors, 0.0);
  CHECK((ell - sim.panel.x).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((sim.sectors.shares.array() >= 0.0).all());
}

TEST_CASE("closed-form targets") {
  const auto lin = DgpSpec::canonical(DgpKind::LinearGaussian, 10, 1);
  CHECK(true_ad(lin) == 2.0);
  CHECK(true_asf(lin, 3.0) == doctest::Approx(1.0 + 6.0 + 0.5));
  CHECK(true_shift_effect(lin, 0.7) == doctest::Approx(1.4));
  const auto quad = DgpSpec::canonical(DgpKind::Quadratic, 10, 1);
  // E[X] = -1 + 2 (1/2) = 0, so a shift of δ gives δ²
  CHECK(true_shift_effect(quad, 0.5) == doctest::Approx(0.25));
  const Eigen::RowVectorXd none(0);
  CHECK(true_m(quad, 1.5, none, 0.3) == doctest::Approx(2.25 + 0.3));
}

TEST_CASE("Monte Carlo oracles agree with closed forms") {
  const auto lin = DgpSpec::canonical(DgpKind::LinearGaussian, 10, 1);
  EvalGrid grid;
  grid.points = {2.0, 4.0, 6.0};
  const auto o = oracle_targets(lin, grid, {0.05, 0.1}, 1.19, 200000);
  CHECK(std::abs(o.ad_mc.value - 2.0) <= 3.0 * o.ad_mc.se + 1e-12);
  CHECK(o.lar_method == "closed_form");
  for (int k = 0; k < 3; ++k) {
    CHECK(o.asf_true(k) == doctest::Approx(true_asf(lin, grid.points[static_cast<std::size_t>(k)])));
    CHECK(o.lar_true(k) == doctest::Approx(2.0));
  }
  REQUIRE(o.pe_true.size() == 2);
  CHECK(o.pe_true[1].value < o.pe_true[0].value);

  const auto quad = DgpSpec::canonical(DgpKind::Quadratic, 10, 1);
  const auto oq = oracle_targets(quad, grid, {}, 1.19, 20000);
  for (int k = 0; k < 3; ++k) CHECK(oq.lar_true(k) == doctest::Approx(2.0 * grid.points[static_cast<std::size_t>(k)]));
  CHECK_THROWS_AS(oracle_targets(quad, grid, {}, 1.0, 100), Error);

  const auto het = DgpSpec::canonical(DgpKind::HeteroskedasticQr, 10, 1);
  CHECK(oracle_targets(het, grid, {}, 1.19, 20000).lar_method == "monte_carlo");
}

TEST_CASE("2SLS decomposition: homogeneous effects give normalization 1") {
  auto spec = DgpSpec::canonical(DgpKind::Quadratic, 10, 1);
  spec.b2 = 0.0;
  spec.b1 = 1.5;
  const auto d = oracle_tsls_decomposition(spec, 200000);
  CHECK(d.normalization == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(d.weighted_integral == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(std::abs(d.beta_2sls.value - 1.5) <= 3.0 * d.beta_2sls.se + 1e-3);
  CHECK_FALSE(d.surface.has_negative);

  const auto flip = oracle_tsls_decomposition(DgpSpec::canonical(DgpKind::SignFlipFirstStage, 10, 1), 200000);
  CHECK(flip.surface.has_negative);
  CHECK(flip.surface.negative_z_lo < 0.0);
  CHECK(std::abs(flip.weighted_integral - flip.beta_2sls.value) <= 1e-2 * std::abs(flip.weighted_integral));

  CHECK_THROWS_AS(oracle_tsls_decomposition(DgpSpec::canonical(DgpKind::LinearGaussian, 10, 1), 100), Error);
}

}
