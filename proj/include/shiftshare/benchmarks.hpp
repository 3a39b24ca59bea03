#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "shiftshare/basis.hpp"
#include "shiftshare/dataset.hpp"
#include "shiftshare/quantile.hpp"
#include "shiftshare/targets.hpp"

namespace shiftshare {

struct TslsFit {
  std::vector<std::string> names;  // "const", "x", period dummies, covariates
  Eigen::VectorXd alpha;
  Eigen::VectorXd se;
  std::string se_kind;             // "HC1" or "CR1"
  double first_stage_coef = 0.0;   // coefficient on z in the first stage
  double first_stage_se = 0.0;
  Eigen::Index n = 0;
  Eigen::Index clusters = 0;
  Eigen::Index slope_index = 1;    // position of x in alpha
  bool pooled = false;             // period dummies included
};

// Just-identified IV of y on [1, x, period dummies, D] with instruments
// [1, z, period dummies, D]. Period dummies (all but the first label) are
// added when `pooled` is set and the panel carries per-row periods. Standard
// errors are HC1, or CR1 when the panel carries cluster ids and
// `cluster` is set.
TslsFit tsls(const PanelDataset& panel, bool pooled, bool cluster);

// α̂0 + α̂1 x + Σ_k α̂_k mean(column k) over the exogenous regressors.
Eigen::VectorXd linear_asf(const TslsFit& fit, const PanelDataset& panel, const EvalGrid& grid);

// mean_i [α̂1 ℓ_i + Σ_k α̂_k mean(column k)] - mean(Y)
double linear_pe(const TslsFit& fit, const PanelDataset& panel, const Eigen::Ref<const Eigen::VectorXd>& ell);

struct FirstStageSurface {
  std::vector<double> levels;       // quantile levels v
  std::vector<double> z;            // evaluation points
  Eigen::MatrixXd derivative;       // levels x z, ∂ĥ1/∂z
  std::vector<QrFit> fits;
  std::vector<Eigen::Index> dropped;
};

// Quantile fits of x on [q_Z(z), D] at each level and the analytic z-derivative
// of the fitted quantile on `z_points` equally spaced points between the lo and
// hi sample quantiles of z.
FirstStageSurface first_stage_effects(const PanelDataset& panel, const Eigen::Ref<const Eigen::VectorXd>& z,
                                      const SplineSpec& zspec, const std::vector<double>& levels,
                                      const SolverOptions& solver = {}, int z_points = 50, double lo = 0.05,
                                      double hi = 0.95);

struct SignChange {
  double level;
  double z;  // interpolated zero crossing
};

struct WeightReport {
  bool sign_change = false;          // first-stage effect changes sign: not weakly causal
  std::vector<SignChange> loci;
  double negative_weight_share = 0.0;  // Σ|λ| over λ<0 divided by Σ|λ|
  std::vector<double> g;             // G(ω) = mean_i (z_i - z̄) 1{z_i >= ω} on the surface z points
};

// λ̂(ω, v) ∝ ∂ĥ1/∂z(ω, v) G(ω) with G from the empirical distribution of z.
WeightReport tsls_weight_diagnostic(const FirstStageSurface& surface, const Eigen::Ref<const Eigen::VectorXd>& z);

}  // namespace shiftshare
