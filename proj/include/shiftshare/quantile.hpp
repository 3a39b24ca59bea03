#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "json.hpp"

namespace shiftshare {

struct SolverOptions {
  double delta0 = 1e-2;     // initial smoothing, relative to the response scale
  double delta_min = 1e-8;  // final smoothing
  int max_iter = 500;       // total reweighting iterations across all smoothing stages
  double tol = 1e-10;       // relative objective change that ends a stage
  int max_pivots = 0;       // exact polish cap; 0 = 20 * (rows + cols)

  static SolverOptions from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

enum class QrStatus { Converged, MaxIter, Degenerate };

const char* status_name(QrStatus s);

struct QrFit {
  double v = 0.5;
  Eigen::VectorXd coef;                // full design width; dropped columns are zero
  double objective = 0.0;              // weighted check loss at coef
  int iterations = 0;                  // smoothing iterations
  int pivots = 0;                      // exact polish steps
  QrStatus status = QrStatus::Degenerate;
  std::vector<Eigen::Index> dropped;   // columns excluded as linearly dependent
  std::vector<Eigen::Index> basis;     // rows interpolated exactly by the solution
};

// Σ w_i ρ_v(r_i) with ρ_v(a) = (v - 1{a<0})·a. Empty weights mean all ones.
double check_loss(double v, std::span<const double> residuals, std::span<const double> weights = {});

// Minimizes the weighted check loss. Smoothed-check IRLS provides a starting
// point; an exact vertex polish then moves along edges of the LP until the
// dual (subgradient) certificate holds. With `warm` the IRLS phase is skipped
// and the polish starts from warm->coef, reusing its basis rows when they are
// still independent. `drop` fixes the excluded columns;
// when null, dependent columns are detected by pivoted QR.
QrFit fit_quantile(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& response,
                   double v, const SolverOptions& opts = {}, std::span<const double> weights = {},
                   const QrFit* warm = nullptr, const std::vector<Eigen::Index>* drop = nullptr);

// Largest violation of the column-wise subgradient band
//   |Σ_{r_i≠0} w_i ψ_v(r_i) x_ig| <= Σ_{r_i=0} w_i max(v,1-v) |x_ig|,
// relative to Σ w_i |x_ig|. Residuals with |r| <= zero_tol count as zero.
double subgradient_violation(const Eigen::Ref<const Eigen::MatrixXd>& design,
                             const Eigen::Ref<const Eigen::VectorXd>& response, double v,
                             const Eigen::Ref<const Eigen::VectorXd>& coef, std::span<const double> weights = {},
                             double zero_tol = 1e-9);

}  // namespace shiftshare
