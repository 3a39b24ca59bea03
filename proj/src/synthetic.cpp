#include "shiftshare/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "shiftshare/errors.hpp"
#include "shiftshare/stats.hpp"

namespace shiftshare {

namespace {

struct Draw {
  Eigen::RowVectorXd w, d;
  double z = 0, eta = 0, u = 0, x = 0, e1 = 0, e2 = 0, c = 0, y = 0;
};

// Uniform inputs of one draw: J shares, p covariates, η, c, e1, e2.
Eigen::Index uniform_count(const DgpSpec& s) { return s.J + s.p + 4; }

Draw make_draw(const DgpSpec& s, const double* uni) {
  Draw r;
  r.w.resize(s.J);
  r.d.resize(s.p);
  r.z = s.z_offset;
  for (int j = 0; j < s.J; ++j) {
    r.w(j) = s.share_max * uni[j];
    r.z += r.w(j) * s.shifts[static_cast<std::size_t>(j)];
  }
  for (int k = 0; k < s.p; ++k) r.d(k) = stats::normal_quantile(uni[s.J + k]);
  const double* tail = uni + s.J + s.p;
  r.eta = tail[0];
  r.u = stats::normal_quantile(r.eta);
  r.c = tail[1];
  r.e1 = s.tau > 0.0 ? stats::normal_quantile(tail[2]) : 0.0;
  r.e2 = stats::normal_quantile(tail[3]);

  double dx = 0.0, dy = 0.0;
  for (int k = 0; k < s.p; ++k) {
    dx += r.d(k) * s.d1[static_cast<std::size_t>(k)];
    dy += r.d(k) * s.d2[static_cast<std::size_t>(k)];
  }
  r.x = s.c0 + (s.c1 + s.c1h * r.eta) * r.z + s.c2 * r.z * r.z + (s.s0 + s.s1 * r.z) * r.u + dx;
  r.y = s.b0 + (s.b1 + s.rho1 * r.u + s.tau * r.e1) * r.x + s.b2 * r.x * r.x + s.bv * r.eta + dy + s.sigma2 * r.e2;
  return r;
}

// Calls fn(draw_a, draw_b) for `pairs` antithetic pairs.
template <class Fn>
void antithetic(const DgpSpec& s, Eigen::Index pairs, std::uint64_t seed, Fn fn) {
  stats::Rng rng(seed, 0xA5A5);
  std::vector<double> a(static_cast<std::size_t>(uniform_count(s))), b(a.size());
  for (Eigen::Index k = 0; k < pairs; ++k) {
    for (std::size_t q = 0; q < a.size(); ++q) {
      a[q] = rng.uniform();
      b[q] = 1.0 - a[q];
    }
    fn(make_draw(s, a.data()), make_draw(s, b.data()));
  }
}

// Running mean and variance of antithetic pair averages.
struct PairStats {
  double sum = 0.0, sum2 = 0.0;
  Eigen::Index count = 0;
  void add(double pair_mean) {
    sum += pair_mean;
    sum2 += pair_mean * pair_mean;
    ++count;
  }
  McEstimate result() const {
    const double m = sum / count;
    const double var = std::max(sum2 / count - m * m, 0.0);
    return {m, std::sqrt(var / count)};
  }
};

double tariff_factor(double phi, double kappa) { return std::pow(1.0 + phi, 1.0 - kappa); }

// ℓ(X) - X under the two-sector embedding
double tariff_shift(double x, double c, double factor) {
  const double w1 = std::max(x, 0.0) + c, w2 = std::max(-x, 0.0) + c;
  return (factor - 1.0) * (2.0 * w1 + w2);
}

double uniform_moment(double a, double b, int k) {
  return (std::pow(b, k + 1) - std::pow(a, k + 1)) / ((k + 1) * (b - a));
}

}  // namespace

const char* dgp_name(DgpKind kind) {
  switch (kind) {
    case DgpKind::LinearGaussian: return "linear_gaussian";
    case DgpKind::HeteroskedasticQr: return "heteroskedastic_qr";
    case DgpKind::Quadratic: return "quadratic";
    case DgpKind::SignFlipFirstStage: return "sign_flip_first_stage";
    case DgpKind::Custom: return "custom";
  }
  return "custom";
}

DgpKind dgp_from_name(const std::string& name) {
  for (auto k : {DgpKind::LinearGaussian, DgpKind::HeteroskedasticQr, DgpKind::Quadratic,
                 DgpKind::SignFlipFirstStage, DgpKind::Custom}) {
    if (name == dgp_name(k)) return k;
  }
  throw Error(Errc::InvalidSpec, "unknown DGP '" + name + "'");
}

DgpSpec DgpSpec::canonical(DgpKind kind, Eigen::Index n, std::uint64_t seed) {
  DgpSpec s;
  s.kind = kind;
  s.n = n;
  s.seed = seed;
  switch (kind) {
    case DgpKind::LinearGaussian:
      // X = 1 + Z + 0.5u + 0.3D with Z = W (2, 1, 3)',  Y = 1 + 2X + η + 0.5D + 0.1e.
      // Z spans six noise standard deviations, so V has full support at every interior x.
      s.J = 3;
      s.shifts = {2.0, 1.0, 3.0};
      s.p = 1;
      s.c0 = 1.0;
      s.c1 = 1.0;
      s.s0 = 0.5;
      s.d1 = {0.3};
      s.b0 = 1.0;
      s.b1 = 2.0;
      s.bv = 1.0;
      s.d2 = {0.5};
      break;
    case DgpKind::HeteroskedasticQr:
      // X = 1 + 2w + (0.5 + 0.2w)u, w ~ U(0,2);  Y = 1 + (2 + 0.5u + 0.3e1)X + 0.25X² + η + 0.1e2
      s.share_max = 2.0;
      s.c0 = 1.0;
      s.c1 = 2.0;
      s.s0 = 0.5;
      s.s1 = 0.2;
      s.b0 = 1.0;
      s.b1 = 2.0;
      s.b2 = 0.25;
      s.bv = 1.0;
      s.rho1 = 0.5;
      s.tau = 0.3;
      break;
    case DgpKind::Quadratic:
      // X = -1 + 2Z + 0.5u, Z ~ U(0,1);  Y = X² + η + 0.1e
      s.c0 = -1.0;
      s.c1 = 2.0;
      s.s0 = 0.5;
      s.b1 = 0.0;
      s.b2 = 1.0;
      s.bv = 1.0;
      break;
    case DgpKind::SignFlipFirstStage:
      // Z ~ U(-1,2), X = Z² + 0.5u;  Y = 2X + 0.5X² + η + 0.1e
      s.shifts = {3.0};
      s.z_offset = -1.0;
      s.c1 = 0.0;
      s.c2 = 1.0;
      s.s0 = 0.5;
      s.b1 = 2.0;
      s.b2 = 0.5;
      s.bv = 1.0;
      break;
    case DgpKind::Custom:
      break;
  }
  s.validate();
  return s;
}

double DgpSpec::z_lo() const {
  double z = z_offset;
  for (double s : shifts) z += std::min(0.0, s * share_max);
  return z;
}

double DgpSpec::z_hi() const {
  double z = z_offset;
  for (double s : shifts) z += std::max(0.0, s * share_max);
  return z;
}

double DgpSpec::mean_z() const {
  double z = z_offset;
  for (double s : shifts) z += s * share_max / 2.0;
  return z;
}

double DgpSpec::mean_x() const {
  double var_z = 0.0;
  for (double s : shifts) var_z += s * s * share_max * share_max / 12.0;
  const double ez = mean_z();
  return c0 + (c1 + c1h / 2.0) * ez + c2 * (var_z + ez * ez);
}

void DgpSpec::validate() const {
  if (n < 2) throw Error(Errc::InvalidSpec, "n must be at least 2");
  if (J < 1 || static_cast<int>(shifts.size()) != J) throw Error(Errc::InvalidSpec, "need J >= 1 shifts");
  if (p < 0 || static_cast<int>(d1.size()) != p || static_cast<int>(d2.size()) != p) {
    throw Error(Errc::InvalidSpec, "covariate coefficient blocks must have length p");
  }
  if (!(share_max > 0.0)) throw Error(Errc::InvalidSpec, "share_max must be positive");
  if (s0 == 0.0 && s1 == 0.0) throw Error(Errc::InvalidSpec, "first-stage noise scale is zero");
  if (!(sigma2 > 0.0)) throw Error(Errc::InvalidSpec, "outcome noise scale must be positive");
  if (tau < 0.0) throw Error(Errc::InvalidSpec, "tau must be nonnegative");
  // ∂X/∂η = c1h Z + (s0 + s1 Z)/φ(u) and 1/φ(u) >= sqrt(2π); both bounds are linear in Z
  const double root2pi = std::sqrt(2.0 * std::numbers::pi);
  for (double z : {z_lo(), z_hi()}) {
    const double scale = s0 + s1 * z;
    if (!(scale > 0.0) || !(c1h * z + scale * root2pi > 0.0)) {
      throw Error(Errc::InvalidSpec, "first stage is not strictly increasing in the rank variable at z = " +
                                         std::to_string(z));
    }
  }
}

DgpSpec DgpSpec::from_json(const nlohmann::json& j) {
  DgpSpec s;
  if (j.contains("kind")) {
    const auto kind = dgp_from_name(j.at("kind").get<std::string>());
    if (kind != DgpKind::Custom) s = canonical(kind, j.value("n", s.n), j.value("seed", s.seed));
    s.kind = kind;
  }
  s.n = j.value("n", s.n);
  s.seed = j.value("seed", s.seed);
  s.J = j.value("J", s.J);
  s.share_max = j.value("share_max", s.share_max);
  s.shifts = j.value("shifts", s.shifts);
  s.z_offset = j.value("z_offset", s.z_offset);
  s.p = j.value("p", s.p);
  s.c0 = j.value("c0", s.c0);
  s.c1 = j.value("c1", s.c1);
  s.c1h = j.value("c1h", s.c1h);
  s.c2 = j.value("c2", s.c2);
  s.s0 = j.value("s0", s.s0);
  s.s1 = j.value("s1", s.s1);
  s.d1 = j.value("d1", s.d1);
  s.b0 = j.value("b0", s.b0);
  s.b1 = j.value("b1", s.b1);
  s.b2 = j.value("b2", s.b2);
  s.bv = j.value("bv", s.bv);
  s.rho1 = j.value("rho1", s.rho1);
  s.tau = j.value("tau", s.tau);
  s.sigma2 = j.value("sigma2", s.sigma2);
  s.d2 = j.value("d2", s.d2);
  s.validate();
  return s;
}

nlohmann::json DgpSpec::to_json() const {
  return {{"kind", dgp_name(kind)}, {"n", n},       {"seed", seed}, {"J", J},     {"share_max", share_max},
          {"shifts", shifts},       {"z_offset", z_offset},         {"p", p},     {"c0", c0},
          {"c1", c1},               {"c1h", c1h},   {"c2", c2},     {"s0", s0},   {"s1", s1},
          {"d1", d1},               {"b0", b0},     {"b1", b1},     {"b2", b2},   {"bv", bv},
          {"rho1", rho1},           {"tau", tau},   {"sigma2", sigma2},           {"d2", d2}};
}

Simulation generate(const DgpSpec& spec) {
  spec.validate();
  const auto n = spec.n;
  Simulation sim;
  auto& pd = sim.panel;
  pd.y.resize(n);
  pd.x.resize(n);
  pd.w.resize(n, spec.J);
  pd.d.resize(n, spec.p);
  pd.z = Eigen::VectorXd(n);
  sim.latent.eta.resize(n);
  sim.latent.e1.resize(n);
  sim.latent.e2.resize(n);
  sim.latent.c.resize(n);
  sim.sectors.m_t = Eigen::Vector2d(2.0, 1.0);
  sim.sectors.m_tm1 = Eigen::Vector2d(1.0, 2.0);
  sim.sectors.l_t = Eigen::Vector2d(1.0, 1.0);
  sim.sectors.shares.resize(n, 2);

  stats::Rng rng(spec.seed, 0);
  std::vector<double> uni(static_cast<std::size_t>(uniform_count(spec)));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (auto& u : uni) u = rng.uniform();
    const Draw r = make_draw(spec, uni.data());
    pd.y(i) = r.y;
    pd.x(i) = r.x;
    pd.w.row(i) = r.w;
    pd.d.row(i) = r.d;
    (*pd.z)(i) = r.z;
    sim.latent.eta(i) = r.eta;
    sim.latent.e1(i) = r.e1;
    sim.latent.e2(i) = r.e2;
    sim.latent.c(i) = r.c;
    sim.sectors.shares(i, 0) = std::max(r.x, 0.0) + r.c;
    sim.sectors.shares(i, 1) = std::max(-r.x, 0.0) + r.c;
    pd.region_id.push_back("r" + std::to_string(i));
  }
  for (int j = 0; j < spec.J; ++j) pd.share_names.push_back("w_" + std::to_string(j + 1));
  for (int k = 0; k < spec.p; ++k) pd.covariate_names.push_back("d" + std::to_string(k + 1));
  pd.period_label = dgp_name(spec.kind);
  return sim;
}

double true_m(const DgpSpec& s, double x, const Eigen::Ref<const Eigen::RowVectorXd>& d, double v) {
  double dy = 0.0;
  for (int k = 0; k < s.p; ++k) dy += d(k) * s.d2[static_cast<std::size_t>(k)];
  const double u = s.rho1 != 0.0 ? stats::normal_quantile(v) : 0.0;
  return s.b0 + (s.b1 + s.rho1 * u) * x + s.b2 * x * x + s.bv * v + dy;
}

double true_asf(const DgpSpec& s, double x) { return s.b0 + s.b1 * x + s.b2 * x * x + s.bv / 2.0; }

double true_ad(const DgpSpec& s) { return s.b1 + 2.0 * s.b2 * s.mean_x(); }

double true_shift_effect(const DgpSpec& s, double delta) {
  return s.b1 * delta + s.b2 * (2.0 * delta * s.mean_x() + delta * delta);
}

OracleValues oracle_targets(const DgpSpec& spec, const EvalGrid& grid, const std::vector<double>& phi_ladder,
                            double kappa, Eigen::Index draws, std::uint64_t seed) {
  spec.validate();
  if (!std::isfinite(kappa) || kappa == 1.0) throw Error(Errc::InvalidElasticity, "elasticity must differ from 1");
  OracleValues o;
  o.grid = grid;
  o.phi = phi_ladder;
  o.kappa = kappa;
  const auto g = static_cast<Eigen::Index>(grid.points.size());
  o.asf_true.resize(g);
  o.lar_true.resize(g);
  for (Eigen::Index k = 0; k < g; ++k) {
    const double x = grid.points[static_cast<std::size_t>(k)];
    o.asf_true(k) = true_asf(spec, x);
    o.lar_true(k) = spec.b1 + 2.0 * spec.b2 * x;
  }
  o.ad_true = true_ad(spec);

  std::vector<double> factors;
  for (double phi : phi_ladder) factors.push_back(tariff_factor(phi, kappa));
  std::vector<PairStats> pe(phi_ladder.size());
  PairStats ad;
  const bool lar_mc = spec.rho1 != 0.0;
  std::vector<double> xs, us;
  const Eigen::Index pairs = std::max<Eigen::Index>(draws / 2, 1);
  if (lar_mc) {
    xs.reserve(static_cast<std::size_t>(2 * pairs));
    us.reserve(static_cast<std::size_t>(2 * pairs));
  }

  auto effect = [&spec](const Draw& r, double factor) {
    const double delta = tariff_shift(r.x, r.c, factor);
    return (spec.b1 + spec.rho1 * r.u) * delta + spec.b2 * (2.0 * r.x * delta + delta * delta);
  };
  antithetic(spec, pairs, seed, [&](const Draw& a, const Draw& b) {
    auto slope = [&spec](const Draw& r) { return spec.b1 + spec.rho1 * r.u + spec.tau * r.e1 + 2.0 * spec.b2 * r.x; };
    ad.add(0.5 * (slope(a) + slope(b)));
    for (std::size_t k = 0; k < factors.size(); ++k) pe[k].add(0.5 * (effect(a, factors[k]) + effect(b, factors[k])));
    if (lar_mc) {
      xs.push_back(a.x);
      us.push_back(a.u);
      xs.push_back(b.x);
      us.push_back(b.u);
    }
  });
  o.ad_mc = ad.result();
  for (const auto& s : pe) o.pe_true.push_back(s.result());

  o.lar_method = "closed_form";
  if (lar_mc) {
    // E[u | X = x] by Gaussian-kernel regression on the simulated draws
    o.lar_method = "monte_carlo";
    const Eigen::Map<const Eigen::VectorXd> xv(xs.data(), static_cast<Eigen::Index>(xs.size()));
    const double sd = std::sqrt((xv.array() - xv.mean()).square().mean());
    const double h = 0.5 * 1.06 * sd * std::pow(static_cast<double>(xs.size()), -0.2);
    for (Eigen::Index k = 0; k < g; ++k) {
      const double x = grid.points[static_cast<std::size_t>(k)];
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double t = (xs[i] - x) / h;
        if (std::abs(t) > 8.0) continue;
        const double kw = std::exp(-0.5 * t * t);
        num += kw * us[i];
        den += kw;
      }
      o.lar_true(k) += spec.rho1 * (den > 0.0 ? num / den : 0.0);
    }
  }
  return o;
}

namespace {

struct QuadratureResult {
  double num = 0.0, den = 0.0;
};

QuadratureResult lambda_quadrature(const DgpSpec& s, int nodes, LambdaSurface* surface) {
  const double a = s.z_lo(), b = s.z_hi(), ez = s.mean_z();
  const auto rule = stats::gauss_legendre(nodes);
  constexpr double tmax = 8.0;
  QuadratureResult q;
  if (surface) {
    surface->z.resize(static_cast<std::size_t>(nodes));
    surface->eta.resize(static_cast<std::size_t>(nodes));
    surface->lambda.resize(nodes, nodes);
  }
  std::vector<double> g(static_cast<std::size_t>(nodes)), wz(g.size()), zz(g.size());
  for (int i = 0; i < nodes; ++i) {
    const auto k = static_cast<std::size_t>(i);
    zz[k] = a + (b - a) * (rule.nodes[k] + 1.0) / 2.0;
    wz[k] = (b - a) / 2.0 * rule.weights[k];
    // G(ω) = ∫_ω^b (ζ - E Z) f(ζ) dζ for uniform Z
    g[k] = ((b - ez) * (b - ez) - (zz[k] - ez) * (zz[k] - ez)) / (2.0 * (b - a));
  }
  for (int j = 0; j < nodes; ++j) {
    const auto k = static_cast<std::size_t>(j);
    const double u = tmax * rule.nodes[k];
    const double eta = stats::normal_cdf(u);
    const double wu = tmax * rule.weights[k] * stats::normal_pdf(u);
    if (surface) surface->eta[k] = eta;
    for (int i = 0; i < nodes; ++i) {
      const auto m = static_cast<std::size_t>(i);
      const double w = zz[m];
      const double h1 = s.c0 + (s.c1 + s.c1h * eta) * w + s.c2 * w * w + (s.s0 + s.s1 * w) * u;
      const double dh1 = s.c1 + s.c1h * eta + 2.0 * s.c2 * w + s.s1 * u;
      const double dh2 = s.b1 + s.rho1 * u + 2.0 * s.b2 * h1;  // E[∂h2/∂x | η] at x = h1(ω, η)
      const double weight = dh1 * g[m];
      q.num += wz[m] * wu * dh2 * weight;
      q.den += wz[m] * wu * weight;
      if (surface) {
        surface->z[m] = w;
        surface->lambda(i, j) = weight;  // normalized below
      }
    }
  }
  return q;
}

}  // namespace

TslsDecomposition oracle_tsls_decomposition(const DgpSpec& spec, Eigen::Index draws, std::uint64_t seed, int nodes) {
  spec.validate();
  if (spec.J != 1 || spec.p != 0) {
    throw Error(Errc::InvalidSpec, "the 2SLS decomposition needs a scalar instrument and no covariates");
  }
  TslsDecomposition out;
  const double a = spec.z_lo(), b = spec.z_hi();
  const double ez = uniform_moment(a, b, 1), ez2 = uniform_moment(a, b, 2), ez3 = uniform_moment(a, b, 3);
  out.cov_xz = (spec.c1 + spec.c1h / 2.0) * (ez2 - ez * ez) + spec.c2 * (ez3 - ez2 * ez);
  if (std::abs(out.cov_xz) < 1e-12) throw Error(Errc::WeakDesign, "Cov(X, Z) is zero for this DGP");

  const auto coarse = lambda_quadrature(spec, nodes, &out.surface);
  const auto fine = lambda_quadrature(spec, 2 * nodes, nullptr);
  const double i_coarse = coarse.num / coarse.den, i_fine = fine.num / fine.den;
  out.richardson_gap = std::abs(i_coarse - i_fine) / std::max(std::abs(i_fine), 1e-300);
  if (out.richardson_gap > 1e-6 || std::abs(coarse.den - fine.den) > 1e-6 * std::abs(fine.den)) {
    throw Error(Errc::QuadratureNotConverged, "quadrature changed by " + std::to_string(out.richardson_gap) +
                                                  " between " + std::to_string(nodes) + " and " +
                                                  std::to_string(2 * nodes) + " nodes");
  }
  out.weighted_integral = i_fine;
  out.normalization = fine.den / out.cov_xz;

  // λ = ∂h1/∂z G / E[∫ ∂h1/∂z G dω]; report where it is negative
  auto& sf = out.surface;
  sf.lambda /= coarse.den;
  const auto rule = stats::gauss_legendre(nodes);
  sf.min_lambda = sf.lambda.minCoeff();
  sf.negative_z_lo = b;
  sf.negative_z_hi = a;
  for (Eigen::Index i = 0; i < sf.lambda.rows(); ++i) {
    for (Eigen::Index j = 0; j < sf.lambda.cols(); ++j) {
      const double lam = sf.lambda(i, j);
      if (lam >= 0.0) continue;
      sf.has_negative = true;
      const double u = 8.0 * rule.nodes[static_cast<std::size_t>(j)];
      const double wgt = (b - a) / 2.0 * rule.weights[static_cast<std::size_t>(i)] * 8.0 *
                         rule.weights[static_cast<std::size_t>(j)] * stats::normal_pdf(u);
      sf.negative_mass += -lam * wgt;
      sf.negative_z_lo = std::min(sf.negative_z_lo, sf.z[static_cast<std::size_t>(i)]);
      sf.negative_z_hi = std::max(sf.negative_z_hi, sf.z[static_cast<std::size_t>(i)]);
    }
  }
  if (!sf.has_negative) sf.negative_z_lo = sf.negative_z_hi = 0.0;

  // covariance ratio on simulated draws
  const Eigen::Index pairs = std::max<Eigen::Index>(draws / 2, 2);
  std::vector<double> zs, xs, ys;
  zs.reserve(static_cast<std::size_t>(2 * pairs));
  xs.reserve(zs.capacity());
  ys.reserve(zs.capacity());
  antithetic(spec, pairs, seed, [&](const Draw& p, const Draw& q) {
    for (const Draw* r : {&p, &q}) {
      zs.push_back(r->z);
      xs.push_back(r->x);
      ys.push_back(r->y);
    }
  });
  const auto m = static_cast<Eigen::Index>(zs.size());
  const Eigen::Map<const Eigen::VectorXd> zv(zs.data(), m), xv(xs.data(), m), yv(ys.data(), m);
  const Eigen::ArrayXd zc = zv.array() - zv.mean(), xc = xv.array() - xv.mean(), yc = yv.array() - yv.mean();
  const double cxz = (xc * zc).mean(), cyz = (yc * zc).mean();
  const double beta = cyz / cxz;
  // influence function of the ratio, averaged within antithetic pairs
  const Eigen::ArrayXd psi = (yc - beta * xc) * zc / cxz;
  PairStats ps;
  for (Eigen::Index k = 0; k + 1 < m; k += 2) ps.add(0.5 * (psi(k) + psi(k + 1)));
  out.beta_2sls = {beta, ps.result().se};
  return out;
}

PanelDataset two_period_sign_flip(Eigen::Index n_per_period, std::uint64_t seed) {
  if (n_per_period < 4) throw Error(Errc::InvalidSpec, "need at least four rows per period");
  PanelDataset pd;
  const auto n = 2 * n_per_period;
  pd.y.resize(n);
  pd.x.resize(n);
  pd.w.resize(n, 1);
  pd.d.resize(n, 0);
  pd.z = Eigen::VectorXd(n);
  stats::Rng rng(seed, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool second = i >= n_per_period;
    const double w = rng.uniform();
    const double u = rng.normal();
    const double e = rng.normal();
    const double z = w;
    const double x = (second ? -0.8 : 1.0) * z + 0.5 * u;
    pd.w(i, 0) = w;
    (*pd.z)(i) = z;
    pd.x(i) = x;
    pd.y(i) = (second ? 2.0 : 1.0) * x + 0.5 * u + 0.1 * e;  // u enters both stages: X is endogenous
    pd.region_id.push_back("r" + std::to_string(i % n_per_period));
    pd.period.push_back(second ? "p2" : "p1");
    pd.cluster.push_back("c" + std::to_string(i % 20));
  }
  pd.share_names = {"w_1"};
  return pd;
}

}  // namespace shiftshare
