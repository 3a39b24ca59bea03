#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace shiftshare {

struct LsFit {
  Eigen::VectorXd coef;                // full length; dropped columns are zero
  std::vector<Eigen::Index> dropped;   // pivot order
  double rss = 0.0;                    // weighted residual sum of squares
};

// Weighted least squares by column-pivoted Householder QR. Columns beyond the
// numerical rank are dropped in pivot order. `forced_drop` columns are removed
// before factorizing.
LsFit least_squares(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& response,
                    std::span<const double> weights = {}, const std::vector<Eigen::Index>& forced_drop = {},
                    double threshold = 1e-10);

Eigen::MatrixXd select_columns(const Eigen::Ref<const Eigen::MatrixXd>& m, const std::vector<Eigen::Index>& cols);

// Complement of `drop` in [0, n).
std::vector<Eigen::Index> kept_columns(Eigen::Index n, const std::vector<Eigen::Index>& drop);

}  // namespace shiftshare
