#include "shiftshare/pipeline.hpp"

#include "shiftshare/errors.hpp"

namespace shiftshare {

Estimation run_algorithm1(const PanelDataset& panel, const PipelineConfig& config, const PolicySet& policy,
                          std::span<const double> weights, const Estimation* reference) {
  Estimation out;
  if (reference) {
    out.k1 = reference->k1;
  } else {
    validate(panel);
    out.k1 = build_k1(panel, config.k1);
  }
  out.grid = fit_grid(out.k1.columns, panel.x, config.grid, weights, reference ? &reference->grid : nullptr,
                      reference ? &reference->grid.dropped : nullptr);
  out.v_hat = control_values(out.grid, out.k1.columns, panel.x);

  if (reference) {
    out.fit = fit_structural(panel, out.v_hat, config.k2, weights, &*reference->fit.basis, &reference->fit.dropped);
  } else {
    out.fit = fit_structural(panel, out.v_hat, config.k2, weights);
  }

  auto& est = out.estimates;
  est.grid = reference ? reference->estimates.grid
                       : EvalGrid::percentile(panel.x, config.grid_lo, config.grid_hi, config.grid_points);
  est.n = panel.n();
  est.asf = asf(out.fit, panel, out.v_hat, est.grid, weights);
  est.ad = avg_derivative(out.fit, panel, out.v_hat, weights);
  out.lar_fit = lar(out.fit, panel, out.v_hat, est.grid, weights);
  est.lar = out.lar_fit.values;
  est.phi = policy.phi;
  est.pe.resize(static_cast<Eigen::Index>(policy.ell.size()));
  for (std::size_t k = 0; k < policy.ell.size(); ++k) {
    est.pe(static_cast<Eigen::Index>(k)) = policy_effect(out.fit, panel, out.v_hat, policy.ell[k], weights);
  }
  return out;
}

}  // namespace shiftshare
