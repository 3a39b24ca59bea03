#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"
#include "shiftshare/dataset.hpp"

namespace shiftshare {

enum class KnotRule { Quantile, Uniform };

struct SplineSpec {
  int degree = 3;
  int n_knots = 4;  // interior knots
  KnotRule rule = KnotRule::Quantile;
  bool include_intercept = false;

  // degree + n_knots + 1, plus one when an explicit intercept column is requested
  int dim() const { return degree + n_knots + 1 + (include_intercept ? 1 : 0); }
  void validate() const;

  static SplineSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Clamped B-spline basis on [lo, hi]. Outside the boundary each basis function
// is extended linearly from its boundary value with its boundary slope, so any
// linear combination extrapolates linearly and stays C^1 at the boundary.
class BSpline {
 public:
  BSpline(SplineSpec spec, std::vector<double> interior_knots, double lo, double hi);

  // Knots from the training sample per spec.rule; throws DegenerateKnots on ties.
  static BSpline place(const SplineSpec& spec, std::span<const double> sample);

  const SplineSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim(); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<double>& interior_knots() const { return interior_; }
  const std::vector<double>& knot_vector() const { return knots_; }

  void eval(double t, std::span<double> out) const;
  void deriv(double t, std::span<double> out) const;
  Eigen::RowVectorXd row(double t) const;
  Eigen::RowVectorXd drow(double t) const;
  Eigen::MatrixXd design(const Eigen::Ref<const Eigen::VectorXd>& t) const;
  Eigen::MatrixXd ddesign(const Eigen::Ref<const Eigen::VectorXd>& t) const;

 private:
  int n_splines() const { return spec_.degree + spec_.n_knots + 1; }
  int find_span(double t) const;
  void basis_funs(int span, double t, int degree, double* out) const;
  void eval_inside(double t, double* value, double* slope) const;

  SplineSpec spec_;
  std::vector<double> interior_;
  std::vector<double> knots_;
  double lo_, hi_;
};

enum class Factor { Intercept, Share, Covariate, Spline, Tensor };

struct ColumnInfo {
  Factor factor;
  int first = -1;   // share/covariate index, or q_X index for tensor columns
  int second = -1;  // q_V index for tensor columns, spline basis index for additive blocks
  bool depends_on_x = false;
};

// The x-varying tensor factor q_X(x) ⊗ q_V(v) plus covariates entering linearly.
class K2Basis {
 public:
  K2Basis(BSpline qx, BSpline qv, Eigen::Index n_covariates);

  const BSpline& qx() const { return qx_; }
  const BSpline& qv() const { return qv_; }
  Eigen::Index n_covariates() const { return p_; }
  Eigen::Index tensor_dim() const { return static_cast<Eigen::Index>(qx_.dim()) * qv_.dim(); }
  Eigen::Index dim() const { return tensor_dim() + p_; }

  Eigen::RowVectorXd row(double x, const Eigen::Ref<const Eigen::RowVectorXd>& d, double v) const;
  Eigen::RowVectorXd d_dx_row(double x, const Eigen::Ref<const Eigen::RowVectorXd>& d, double v) const;
  Eigen::MatrixXd design(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& d,
                         const Eigen::Ref<const Eigen::VectorXd>& v) const;
  Eigen::MatrixXd d_dx_design(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& d,
                              const Eigen::Ref<const Eigen::VectorXd>& v) const;
  std::vector<ColumnInfo> structure() const;

 private:
  BSpline qx_, qv_;
  Eigen::Index p_;
};

struct TensorBasis {
  Eigen::MatrixXd columns;
  std::vector<ColumnInfo> structure;
  std::vector<std::pair<double, double>> boundary;  // per spline input
  std::vector<Eigen::Index> redundant;              // pivot-order dependent columns (flagged, kept)
  std::optional<K2Basis> k2;                        // generator, for K2 designs
};

enum class K1Kind { Linear, Spline };

struct K1Spec {
  K1Kind kind = K1Kind::Linear;
  SplineSpec spline;  // for K1Kind::Spline: additive expansion of every share and covariate

  static K1Spec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct K2Spec {
  SplineSpec qx;
  SplineSpec qv;

  static K2Spec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Columns dependent on earlier ones under column-pivoted QR (relative threshold).
std::vector<Eigen::Index> dependent_columns(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                            double threshold = 1e-10);

TensorBasis build_k1(const PanelDataset& panel, const K1Spec& spec);

// [q_Z(z), D]: spline in the scalar instrument (spans the constant), covariates linear.
TensorBasis build_k1_instrument(const Eigen::Ref<const Eigen::VectorXd>& z, const Eigen::Ref<const Eigen::MatrixXd>& d,
                                const SplineSpec& zspec);

TensorBasis build_k2(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& d,
                     const Eigen::Ref<const Eigen::VectorXd>& v, const K2Spec& spec);

// Evaluate the design of an existing K2 basis at new points (fixed knots).
TensorBasis evaluate_k2(const K2Basis& basis, const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::MatrixXd>& d, const Eigen::Ref<const Eigen::VectorXd>& v);

Eigen::MatrixXd d_dx_k2(const TensorBasis& basis, const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::MatrixXd>& d, const Eigen::Ref<const Eigen::VectorXd>& v);

}  // namespace shiftshare
