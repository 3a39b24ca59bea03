#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shiftshare/dataset.hpp"
#include "shiftshare/structural.hpp"

namespace shiftshare {

struct EvalGrid {
  std::vector<double> points;  // strictly increasing

  // `count` equally spaced points between the lo and hi sample quantiles of x.
  static EvalGrid percentile(const Eigen::Ref<const Eigen::VectorXd>& x, double lo = 0.05, double hi = 0.95,
                             int count = 50);
  Eigen::VectorXd vector() const;
};

// Weighted sample means throughout; empty weights mean equal weights.
Eigen::VectorXd asf(const StructuralFit& fit, const PanelDataset& panel, const Eigen::Ref<const Eigen::VectorXd>& v_hat,
                    const EvalGrid& grid, std::span<const double> weights = {});

double avg_derivative(const StructuralFit& fit, const PanelDataset& panel,
                      const Eigen::Ref<const Eigen::VectorXd>& v_hat, std::span<const double> weights = {});

struct LarFit {
  Eigen::VectorXd pi_x;  // projection coefficients on q_X
  Eigen::VectorXd values;  // β̂(x) on the grid
  std::vector<Eigen::Index> dropped;
};

// OLS of m̂_x(X_i, D_i, V̂_i) on q_X(X_i), evaluated on the grid. q_X is the x
// factor of the fit's own K2 basis, which spans the constant.
LarFit lar(const StructuralFit& fit, const PanelDataset& panel, const Eigen::Ref<const Eigen::VectorXd>& v_hat,
           const EvalGrid& grid, std::span<const double> weights = {});

// ℓ_i = Σ_j W_ij ((1+φ)^{1-κ} M_t,j - M_{t-1},j) / L_j
Eigen::VectorXd tariff_policy(const SectorPanel& sectors, double phi, double kappa = 1.19);

// mean_i (m̂(ℓ_i, D_i, V̂_i) - Y_i)
double policy_effect(const StructuralFit& fit, const PanelDataset& panel, const Eigen::Ref<const Eigen::VectorXd>& v_hat,
                     const Eigen::Ref<const Eigen::VectorXd>& ell, std::span<const double> weights = {});

// Counterfactual treatment vectors, one per policy point.
struct PolicySet {
  std::vector<double> phi;  // labels (tariff increase, or index for custom maps)
  std::vector<Eigen::VectorXd> ell;

  static PolicySet tariff_ladder(const SectorPanel& sectors, const std::vector<double>& phi, double kappa);
  static std::vector<double> default_ladder();  // 0.01, 0.02, ..., 0.30
  bool empty() const { return ell.empty(); }
};

struct EstimateSet {
  EvalGrid grid;
  Eigen::VectorXd asf;
  Eigen::VectorXd lar;
  double ad = 0.0;
  std::vector<double> phi;
  Eigen::VectorXd pe;

  // meta
  Eigen::Index n = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
};

}  // namespace shiftshare
