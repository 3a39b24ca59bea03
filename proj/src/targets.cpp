#include "shiftshare/targets.hpp"

#include <cmath>

#include "shiftshare/errors.hpp"
#include "shiftshare/linalg.hpp"
#include "shiftshare/stats.hpp"

namespace shiftshare {

namespace {

double weighted_mean(const Eigen::Ref<const Eigen::VectorXd>& values, std::span<const double> weights) {
  if (weights.empty()) return values.mean();
  const Eigen::Map<const Eigen::VectorXd> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
  return w.dot(values) / w.sum();
}

void check_inputs(const PanelDataset& panel, const Eigen::Ref<const Eigen::VectorXd>& v_hat,
                  std::span<const double> weights) {
  if (v_hat.size() != panel.n()) throw Error(Errc::InvalidPanel, "control values do not match the panel");
  if (!weights.empty() && static_cast<Eigen::Index>(weights.size()) != panel.n()) {
    throw Error(Errc::InvalidPanel, "weights do not match the panel");
  }
}

}  // namespace

EvalGrid EvalGrid::percentile(const Eigen::Ref<const Eigen::VectorXd>& x, double lo, double hi, int count) {
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0) || count < 2) {
    throw Error(Errc::InvalidConfig, "grid: need 0 <= lo < hi <= 1 and at least two points");
  }
  std::vector<double> xs(x.data(), x.data() + x.size());
  const double a = stats::quantile(xs, lo), b = stats::quantile(xs, hi);
  if (!(b > a)) throw Error(Errc::DegenerateTreatment, "grid: treatment quantiles coincide");
  EvalGrid g;
  g.points.resize(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) g.points[static_cast<std::size_t>(k)] = a + (b - a) * k / (count - 1);
  g.points.back() = b;
  return g;
}

Eigen::VectorXd EvalGrid::vector() const {
  return Eigen::Map<const Eigen::VectorXd>(points.data(), static_cast<Eigen::Index>(points.size()));
}

Eigen::VectorXd asf(const StructuralFit& fit, const PanelDataset& panel, const Eigen::Ref<const Eigen::VectorXd>& v_hat,
                    const EvalGrid& grid, std::span<const double> weights) {
  check_inputs(panel, v_hat, weights);
  if (!fit.basis) throw Error(Errc::InvalidConfig, "structural fit has no basis");
  const auto& basis = *fit.basis;
  const auto n = panel.n();
  const auto dv = basis.qv().dim();
  const auto p = basis.n_covariates();

  // m̂(x, D_i, V̂_i) = q_X(x)' Π q_V(V̂_i) + D_i'δ, so average q_V and D once
  const Eigen::MatrixXd qv = basis.qv().design(v_hat);
  Eigen::RowVectorXd qv_bar(dv);
  Eigen::RowVectorXd d_bar = Eigen::RowVectorXd::Zero(p);
  if (weights.empty()) {
    qv_bar = qv.colwise().mean();
    if (p > 0) d_bar = panel.d.colwise().mean();
  } else {
    const Eigen::Map<const Eigen::VectorXd> w(weights.data(), n);
    qv_bar = (w.transpose() * qv) / w.sum();
    if (p > 0) d_bar = (w.transpose() * panel.d) / w.sum();
  }
  const Eigen::Map<const Eigen::MatrixXd> pi(fit.pi2.data(), dv, basis.qx().dim());  // column a holds block a
  const Eigen::VectorXd block = pi.transpose() * qv_bar.transpose();
  const double dpart = p > 0 ? d_bar.dot(fit.pi2.tail(p)) : 0.0;

  Eigen::VectorXd out(static_cast<Eigen::Index>(grid.points.size()));
  for (std::size_t k = 0; k < grid.points.size(); ++k) {
    out(static_cast<Eigen::Index>(k)) = basis.qx().row(grid.points[k]).dot(block) + dpart;
  }
  return out;
}

double avg_derivative(const StructuralFit& fit, const PanelDataset& panel,
                      const Eigen::Ref<const Eigen::VectorXd>& v_hat, std::span<const double> weights) {
  check_inputs(panel, v_hat, weights);
  return weighted_mean(m_x_hat(fit, panel.x, panel.d, v_hat), weights);
}

LarFit lar(const StructuralFit& fit, const PanelDataset& panel, const Eigen::Ref<const Eigen::VectorXd>& v_hat,
           const EvalGrid& grid, std::span<const double> weights) {
  check_inputs(panel, v_hat, weights);
  if (!fit.basis) throw Error(Errc::InvalidConfig, "structural fit has no basis");
  const auto& qx = fit.basis->qx();
  const Eigen::VectorXd mx = m_x_hat(fit, panel.x, panel.d, v_hat);
  const Eigen::MatrixXd design = qx.design(panel.x);
  LsFit ls = least_squares(design, mx, weights);
  LarFit out;
  out.pi_x = std::move(ls.coef);
  out.dropped = std::move(ls.dropped);
  out.values = qx.design(grid.vector()) * out.pi_x;
  return out;
}

Eigen::VectorXd tariff_policy(const SectorPanel& sectors, double phi, double kappa) {
  if (!std::isfinite(kappa) || kappa == 1.0) throw Error(Errc::InvalidElasticity, "elasticity must differ from 1");
  if (!(phi >= 0.0) || !std::isfinite(phi)) throw Error(Errc::InvalidConfig, "tariff increase must be nonnegative");
  validate(sectors, sectors.shares.rows());
  const double factor = std::pow(1.0 + phi, 1.0 - kappa);
  const Eigen::VectorXd per_sector =
      ((factor * sectors.m_t - sectors.m_tm1).array() / sectors.l_t.array()).matrix();
  return sectors.shares * per_sector;
}

double policy_effect(const StructuralFit& fit, const PanelDataset& panel, const Eigen::Ref<const Eigen::VectorXd>& v_hat,
                     const Eigen::Ref<const Eigen::VectorXd>& ell, std::span<const double> weights) {
  check_inputs(panel, v_hat, weights);
  if (ell.size() != panel.n()) throw Error(Errc::InvalidPanel, "policy vector does not match the panel");
  const Eigen::VectorXd counterfactual = m_hat(fit, ell, panel.d, v_hat);
  return weighted_mean(counterfactual - panel.y, weights);
}

PolicySet PolicySet::tariff_ladder(const SectorPanel& sectors, const std::vector<double>& phi, double kappa) {
  PolicySet s;
  for (double f : phi) {
    s.phi.push_back(f);
    s.ell.push_back(tariff_policy(sectors, f, kappa));
  }
  return s;
}

std::vector<double> PolicySet::default_ladder() {
  std::vector<double> phi;
  for (int k = 1; k <= 30; ++k) phi.push_back(k / 100.0);
  return phi;
}

}  // namespace shiftshare
