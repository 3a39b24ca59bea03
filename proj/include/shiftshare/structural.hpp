#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "shiftshare/basis.hpp"
#include "shiftshare/dataset.hpp"

namespace shiftshare {

struct StructuralFit {
  Eigen::VectorXd pi2;                 // full K2 width; dropped columns are zero
  K2Spec spec;
  std::optional<K2Basis> basis;        // knots fixed at fit time
  std::vector<Eigen::Index> dropped;   // pivot order
  double residual_ss = 0.0;            // weighted
  bool pivot_mismatch = false;         // own pivoting disagreed with a forced drop set
};

// Least squares of y on K2(x, d, v_hat). With `fixed_basis` the knots are
// reused instead of placed on this sample; with `drop` those columns are
// excluded (and `pivot_mismatch` records whether this sample would have
// dropped a different set).
StructuralFit fit_structural(const PanelDataset& panel, const Eigen::Ref<const Eigen::VectorXd>& v_hat,
                             const K2Spec& spec, std::span<const double> weights = {},
                             const K2Basis* fixed_basis = nullptr, const std::vector<Eigen::Index>* drop = nullptr);

double m_hat(const StructuralFit& fit, double x, const Eigen::Ref<const Eigen::RowVectorXd>& d, double v);
double m_x_hat(const StructuralFit& fit, double x, const Eigen::Ref<const Eigen::RowVectorXd>& d, double v);

// Row-wise versions.
Eigen::VectorXd m_hat(const StructuralFit& fit, const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::MatrixXd>& d, const Eigen::Ref<const Eigen::VectorXd>& v);
Eigen::VectorXd m_x_hat(const StructuralFit& fit, const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::MatrixXd>& d, const Eigen::Ref<const Eigen::VectorXd>& v);

// column, factor, qx index, qv index, coefficient, dropped
void write_coefficients_csv(const StructuralFit& fit, const std::filesystem::path& path);

}  // namespace shiftshare
