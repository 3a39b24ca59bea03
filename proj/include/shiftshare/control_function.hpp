#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "shiftshare/quantile.hpp"

namespace shiftshare {

// Uniform mesh eps = v_1 < ... < v_m1 = 1 - eps.
std::vector<double> uniform_mesh(double eps, int m1);

struct QuantileFitGrid {
  double eps = 0.01;
  std::vector<double> levels;
  std::vector<QrFit> fits;
  std::uint64_t design_hash = 0;
  std::vector<Eigen::Index> dropped;  // K1 columns excluded from every level

  // q x M matrix of coefficient vectors, one column per level
  Eigen::MatrixXd coefficients() const;
  // trapezoid weights of the indicator integral; they sum to 1 - 2 eps
  std::vector<double> weights() const;
};

struct GridOptions {
  double eps = 0.01;
  int m1 = 599;
  std::vector<double> levels;  // custom mesh; empty means uniform_mesh(eps, m1)
  SolverOptions solver;

  std::vector<double> mesh() const;
};

// FNV-1a over the raw bytes of the design; identifies the K1 a grid was fit on.
std::uint64_t design_fingerprint(const Eigen::Ref<const Eigen::MatrixXd>& design);

// Quantile fits of x on k1 at every mesh level. Levels are solved in order,
// each warm-started from the previous level, so the result never depends on
// scheduling. `warm` seeds the first level from warm->fits[0] instead of the
// smoothed solver (bootstrap replicates start from the point estimate).
// `drop` fixes the excluded columns.
QuantileFitGrid fit_grid(const Eigen::Ref<const Eigen::MatrixXd>& k1, const Eigen::Ref<const Eigen::VectorXd>& x,
                         const GridOptions& opts, std::span<const double> weights = {},
                         const QuantileFitGrid* warm = nullptr, const std::vector<Eigen::Index>* drop = nullptr);

// eps + ∫ 1{k1_row'π(v) <= x} dv over the mesh.
double estimate_cdf(const QuantileFitGrid& grid, const Eigen::Ref<const Eigen::RowVectorXd>& k1_row, double x);

// V̂_i = estimate_cdf(grid, k1_i, x_i) for every row.
Eigen::VectorXd control_values(const QuantileFitGrid& grid, const Eigen::Ref<const Eigen::MatrixXd>& k1,
                               const Eigen::Ref<const Eigen::VectorXd>& x);

// level, status, objective, then one column per K1 coefficient
void write_grid_csv(const QuantileFitGrid& grid, const std::filesystem::path& path,
                    const std::vector<std::string>& column_names = {});

}  // namespace shiftshare
