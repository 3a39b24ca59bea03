#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "shiftshare/basis.hpp"
#include "shiftshare/control_function.hpp"
#include "shiftshare/dataset.hpp"
#include "shiftshare/structural.hpp"
#include "shiftshare/targets.hpp"

namespace shiftshare {

struct PipelineConfig {
  K1Spec k1;
  K2Spec k2;
  GridOptions grid;
  double grid_lo = 0.05;  // evaluation grid quantiles
  double grid_hi = 0.95;
  int grid_points = 50;
};

// Everything Algorithm 1 produces for one (possibly weighted) sample.
struct Estimation {
  TensorBasis k1;
  QuantileFitGrid grid;
  Eigen::VectorXd v_hat;
  StructuralFit fit;
  LarFit lar_fit;
  EstimateSet estimates;
};

// First stage (quantile grid and V̂), second stage (K2 least squares), third
// stage (ASF, AD, LAR, policy effects). With `reference` the run is a
// bootstrap replicate: K1, the evaluation grid, the K2 knots and both
// dropped-column sets are taken from the reference, and the quantile grid is
// warm-started from the reference fits.
Estimation run_algorithm1(const PanelDataset& panel, const PipelineConfig& config, const PolicySet& policy,
                          std::span<const double> weights = {}, const Estimation* reference = nullptr);

}  // namespace shiftshare
