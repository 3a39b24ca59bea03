#include "shiftshare/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "shiftshare/errors.hpp"
#include "shiftshare/stats.hpp"

namespace shiftshare {

namespace {

struct IvDesign {
  Eigen::MatrixXd x;  // regressors
  Eigen::MatrixXd z;  // instruments
  std::vector<std::string> names;
};

IvDesign iv_design(const PanelDataset& panel, bool pooled) {
  if (!panel.z) throw Error(Errc::MissingColumn, "2SLS needs the instrument column z");
  const auto n = panel.n(), p = panel.p();
  std::vector<std::string> labels;
  if (pooled && !panel.period.empty()) {
    for (const auto& s : panel.period) {
      if (std::find(labels.begin(), labels.end(), s) == labels.end()) labels.push_back(s);
    }
  }
  const auto np = labels.empty() ? 0 : static_cast<Eigen::Index>(labels.size()) - 1;
  IvDesign dz;
  dz.x.resize(n, 2 + np + p);
  dz.x.col(0).setOnes();
  dz.x.col(1) = panel.x;
  dz.names = {"const", "x"};
  for (Eigen::Index k = 0; k < np; ++k) {
    const auto& label = labels[static_cast<std::size_t>(k + 1)];
    for (Eigen::Index i = 0; i < n; ++i) dz.x(i, 2 + k) = panel.period[static_cast<std::size_t>(i)] == label;
    dz.names.push_back("period_" + label);
  }
  if (p > 0) dz.x.rightCols(p) = panel.d;
  for (Eigen::Index k = 0; k < p; ++k) {
    dz.names.push_back(static_cast<std::size_t>(k) < panel.covariate_names.size()
                           ? panel.covariate_names[static_cast<std::size_t>(k)]
                           : "d" + std::to_string(k));
  }
  dz.z = dz.x;
  dz.z.col(1) = *panel.z;
  return dz;
}

// Sandwich meat Σ s_g s_g' with scores s = instrument row times residual.
Eigen::MatrixXd meat(const Eigen::MatrixXd& inst, const Eigen::VectorXd& u, const std::vector<std::string>* cluster,
                     Eigen::Index& groups) {
  const auto k = inst.cols();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
  if (!cluster) {
    for (Eigen::Index i = 0; i < inst.rows(); ++i) {
      const Eigen::VectorXd s = inst.row(i).transpose() * u(i);
      m.noalias() += s * s.transpose();
    }
    groups = inst.rows();
    return m;
  }
  std::map<std::string, Eigen::VectorXd> sums;
  for (Eigen::Index i = 0; i < inst.rows(); ++i) {
    auto [it, fresh] = sums.try_emplace((*cluster)[static_cast<std::size_t>(i)], Eigen::VectorXd::Zero(k));
    it->second += inst.row(i).transpose() * u(i);
  }
  for (const auto& [id, s] : sums) m.noalias() += s * s.transpose();
  groups = static_cast<Eigen::Index>(sums.size());
  return m;
}

Eigen::VectorXd robust_se(const Eigen::MatrixXd& bread, const Eigen::MatrixXd& inst, const Eigen::VectorXd& u,
                          const std::vector<std::string>* cluster, Eigen::Index& groups) {
  const auto n = inst.rows(), k = inst.cols();
  const Eigen::MatrixXd m = meat(inst, u, cluster, groups);
  double scale = static_cast<double>(n) / static_cast<double>(n - k);
  if (cluster) {
    if (groups < 2) throw Error(Errc::InvalidPanel, "cluster-robust errors need at least two clusters");
    scale = static_cast<double>(groups) / (groups - 1) * (n - 1.0) / static_cast<double>(n - k);
  }
  const Eigen::MatrixXd v = scale * bread * m * bread.transpose();
  return v.diagonal().cwiseMax(0.0).cwiseSqrt();
}

}  // namespace

TslsFit tsls(const PanelDataset& panel, bool pooled, bool cluster) {
  const auto dz = iv_design(panel, pooled);
  const auto n = panel.n(), k = dz.x.cols();
  if (n <= k) throw Error(Errc::InvalidPanel, "2SLS needs more rows than regressors");
  const std::vector<std::string>* clusters = nullptr;
  if (cluster) {
    if (panel.cluster.empty()) throw Error(Errc::MissingColumn, "cluster-robust errors need a cluster column");
    clusters = &panel.cluster;
  }

  // weak-design check on the instrument after partialling out the exogenous columns
  Eigen::MatrixXd exog(n, k - 1);
  exog.col(0) = dz.x.col(0);
  exog.rightCols(k - 2) = dz.x.rightCols(k - 2);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> eq(exog);
  const Eigen::VectorXd zt = *panel.z - exog * eq.solve(*panel.z);
  const Eigen::VectorXd xt = panel.x - exog * eq.solve(panel.x);
  if (std::abs(zt.dot(xt)) < 1e-12 * zt.norm() * xt.norm() || zt.norm() == 0.0) {
    throw Error(Errc::WeakDesign, "instrument is (numerically) uncorrelated with the treatment");
  }

  TslsFit fit;
  fit.names = dz.names;
  fit.pooled = pooled;
  fit.n = n;
  fit.se_kind = cluster ? "CR1" : "HC1";
  const Eigen::MatrixXd zx = dz.z.transpose() * dz.x;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(zx);
  if (!lu.isInvertible()) throw Error(Errc::RankDeficient, "2SLS moment matrix is singular");
  fit.alpha = lu.solve(dz.z.transpose() * panel.y);
  const Eigen::VectorXd u = panel.y - dz.x * fit.alpha;
  const Eigen::MatrixXd bread = lu.inverse();  // (Z'X)^{-1}
  fit.se = robust_se(bread, dz.z, u, clusters, fit.clusters);
  if (!cluster) fit.clusters = 0;

  // first stage: OLS of x on the instruments
  const Eigen::MatrixXd zz = dz.z.transpose() * dz.z;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(zz);
  const Eigen::VectorXd pi = ldlt.solve(dz.z.transpose() * panel.x);
  const Eigen::VectorXd v = panel.x - dz.z * pi;
  const Eigen::MatrixXd zzinv = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
  Eigen::Index groups = 0;
  const Eigen::VectorXd fse = robust_se(zzinv, dz.z, v, clusters, groups);
  fit.first_stage_coef = pi(1);
  fit.first_stage_se = fse(1);
  return fit;
}

namespace {

double exogenous_part(const TslsFit& fit, const PanelDataset& panel) {
  const auto dz = iv_design(panel, fit.pooled);
  if (dz.x.cols() != fit.alpha.size()) throw Error(Errc::InvalidPanel, "2SLS fit does not match the panel");
  double total = 0.0;
  for (Eigen::Index c = 0; c < dz.x.cols(); ++c) {
    if (c != fit.slope_index) total += fit.alpha(c) * dz.x.col(c).mean();
  }
  return total;
}

}  // namespace

Eigen::VectorXd linear_asf(const TslsFit& fit, const PanelDataset& panel, const EvalGrid& grid) {
  const double base = exogenous_part(fit, panel);
  return (base + fit.alpha(fit.slope_index) * grid.vector().array()).matrix();
}

double linear_pe(const TslsFit& fit, const PanelDataset& panel, const Eigen::Ref<const Eigen::VectorXd>& ell) {
  if (ell.size() != panel.n()) throw Error(Errc::InvalidPanel, "policy vector does not match the panel");
  return exogenous_part(fit, panel) + fit.alpha(fit.slope_index) * ell.mean() - panel.y.mean();
}

FirstStageSurface first_stage_effects(const PanelDataset& panel, const Eigen::Ref<const Eigen::VectorXd>& z,
                                      const SplineSpec& zspec, const std::vector<double>& levels,
                                      const SolverOptions& solver, int z_points, double lo, double hi) {
  if (z.size() != panel.n()) throw Error(Errc::InvalidPanel, "instrument length does not match the panel");
  if (levels.empty()) throw Error(Errc::InvalidConfig, "first-stage effects need at least one level");
  const TensorBasis k1 = build_k1_instrument(z, panel.d, zspec);
  SplineSpec s = zspec;
  s.include_intercept = false;
  const auto spline = BSpline::place(s, {z.data(), static_cast<std::size_t>(z.size())});
  const auto nz = spline.dim();

  FirstStageSurface out;
  out.levels = levels;
  out.dropped = dependent_columns(k1.columns);
  const QrFit* warm = nullptr;
  for (double v : levels) {
    out.fits.push_back(fit_quantile(k1.columns, panel.x, v, solver, {}, warm, &out.dropped));
    warm = &out.fits.back();
  }

  const auto grid = EvalGrid::percentile(z, lo, hi, z_points);
  out.z = grid.points;
  const Eigen::MatrixXd dq = spline.ddesign(grid.vector());  // points x nz; D drops out of the derivative
  out.derivative.resize(static_cast<Eigen::Index>(levels.size()), dq.rows());
  for (std::size_t m = 0; m < levels.size(); ++m) {
    out.derivative.row(static_cast<Eigen::Index>(m)) = (dq * out.fits[m].coef.head(nz)).transpose();
  }
  return out;
}

WeightReport tsls_weight_diagnostic(const FirstStageSurface& surface, const Eigen::Ref<const Eigen::VectorXd>& z) {
  WeightReport rep;
  const double zbar = z.mean();
  const auto n = static_cast<double>(z.size());
  for (double w : surface.z) {
    double g = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      if (z(i) >= w) g += z(i) - zbar;
    }
    rep.g.push_back(g / n);
  }

  double pos = 0.0, neg = 0.0, lo = 0.0, hi = 0.0;
  const double scale = surface.derivative.cwiseAbs().maxCoeff();
  const double tol = 1e-10 * std::max(scale, 1e-300);
  for (Eigen::Index m = 0; m < surface.derivative.rows(); ++m) {
    const auto row = surface.derivative.row(m);
    for (Eigen::Index k = 0; k < row.size(); ++k) {
      const double lam = row(k) * rep.g[static_cast<std::size_t>(k)];
      (lam < 0.0 ? neg : pos) += std::abs(lam);
      lo = std::min(lo, row(k));
      hi = std::max(hi, row(k));
      if (k > 0 && ((row(k - 1) > tol && row(k) < -tol) || (row(k - 1) < -tol && row(k) > tol))) {
        const double t = row(k - 1) / (row(k - 1) - row(k));
        const double z0 = surface.z[static_cast<std::size_t>(k - 1)];
        const double z1 = surface.z[static_cast<std::size_t>(k)];
        rep.loci.push_back({surface.levels[static_cast<std::size_t>(m)], z0 + t * (z1 - z0)});
      }
    }
  }
  rep.sign_change = lo < -tol && hi > tol;
  rep.negative_weight_share = pos + neg > 0.0 ? neg / (pos + neg) : 0.0;
  return rep;
}

}  // namespace shiftshare
