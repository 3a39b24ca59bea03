#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "shiftshare/dataset.hpp"
#include "shiftshare/targets.hpp"

namespace shiftshare {

enum class DgpKind { LinearGaussian, HeteroskedasticQr, Quadratic, SignFlipFirstStage, Custom };

const char* dgp_name(DgpKind kind);
DgpKind dgp_from_name(const std::string& name);

// Triangular system with a scalar rank variable η ~ U(0,1), u = Φ^{-1}(η):
//   W_ij ~ U(0, share_max),  Z = z_offset + W S,  D ~ N(0, I_p)
//   X = c0 + (c1 + c1h η) Z + c2 Z² + (s0 + s1 Z) u + D'd1
//   Y = b0 + (b1 + rho1 u + tau e1) X + b2 X² + bv η + D'd2 + sigma2 e2
// with e1, e2 ~ N(0,1). X is strictly increasing in η, so F_{X|W,D}(X) = η and
//   m(x, d, v) = E[Y | X=x, D=d, V=v] = b0 + (b1 + rho1 Φ^{-1}(v)) x + b2 x² + bv v + d'd2.
// A two-sector embedding supplies tariff inputs: sector 1 has M_t = 2,
// M_{t-1} = 1; sector 2 has M_t = 1, M_{t-1} = 2; L = 1; region weights are
// (max(X,0) + c, max(-X,0) + c) with c ~ U(0,1), so the zero-tariff policy
// reproduces X exactly.
struct DgpSpec {
  DgpKind kind = DgpKind::Custom;
  Eigen::Index n = 1000;
  std::uint64_t seed = 1;

  int J = 1;
  double share_max = 1.0;
  std::vector<double> shifts = {1.0};  // S, length J
  double z_offset = 0.0;
  int p = 0;

  double c0 = 0.0, c1 = 1.0, c1h = 0.0, c2 = 0.0, s0 = 0.5, s1 = 0.0;
  std::vector<double> d1;  // length p

  double b0 = 0.0, b1 = 1.0, b2 = 0.0, bv = 0.0, rho1 = 0.0, tau = 0.0, sigma2 = 0.1;
  std::vector<double> d2;  // length p

  static DgpSpec canonical(DgpKind kind, Eigen::Index n, std::uint64_t seed);
  void validate() const;  // InvalidSpec on zero noise or a first stage not monotone in η

  // support of Z
  double z_lo() const;
  double z_hi() const;
  double mean_z() const;
  double mean_x() const;

  static DgpSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Draw-level quantities kept out of the observable panel.
struct Latent {
  Eigen::VectorXd eta;     // true control variable V
  Eigen::VectorXd e1, e2;
  Eigen::VectorXd c;       // sector-embedding noise
};

struct Simulation {
  PanelDataset panel;  // y, x, w, d, z; region ids "r<i>"
  SectorPanel sectors;
  Latent latent;
};

Simulation generate(const DgpSpec& spec);

// Closed-form structural objects.
double true_m(const DgpSpec& spec, double x, const Eigen::Ref<const Eigen::RowVectorXd>& d, double v);
double true_asf(const DgpSpec& spec, double x);
double true_ad(const DgpSpec& spec);
double true_shift_effect(const DgpSpec& spec, double delta);  // policy ℓ(x) = x + δ

struct McEstimate {
  double value = 0.0;
  double se = 0.0;
};

struct OracleValues {
  EvalGrid grid;
  Eigen::VectorXd asf_true;
  Eigen::VectorXd lar_true;
  std::string lar_method;  // "closed_form" or "monte_carlo"
  double ad_true = 0.0;
  McEstimate ad_mc;
  std::vector<double> phi;
  std::vector<McEstimate> pe_true;  // tariff ladder, κ as given
  double kappa = 1.19;
};

// Monte Carlo parts use `draws` antithetic draws (pairs of reflected uniforms).
OracleValues oracle_targets(const DgpSpec& spec, const EvalGrid& grid, const std::vector<double>& phi_ladder,
                            double kappa = 1.19, Eigen::Index draws = 1000000, std::uint64_t seed = 7);

struct LambdaSurface {
  std::vector<double> z;    // ω nodes
  std::vector<double> eta;  // η nodes
  Eigen::MatrixXd lambda;   // z x eta
  double min_lambda = 0.0;
  double negative_mass = 0.0;  // ∫∫ max(-λ, 0)
  double negative_z_lo = 0.0, negative_z_hi = 0.0;  // ω range where λ < 0 for some η
  bool has_negative = false;
};

struct TslsDecomposition {
  McEstimate beta_2sls;          // Cov(Y,Z)/Cov(X,Z) by simulation
  double weighted_integral = 0.0;  // ∫∫ E[∂h2/∂x | η, ω] λ(ω, η) dω dη
  double normalization = 0.0;    // ∫∫ λ, using the closed-form Cov(X,Z)
  double cov_xz = 0.0;           // closed form
  double richardson_gap = 0.0;   // |I_200 - I_400| / |I_400|
  LambdaSurface surface;
};

// Needs a scalar instrument (J = 1) and no covariates.
TslsDecomposition oracle_tsls_decomposition(const DgpSpec& spec, Eigen::Index draws = 1000000,
                                            std::uint64_t seed = 11, int nodes = 200);

// Pooled two-period panel whose first stages have opposite signs, so the
// pooled 2SLS slope falls outside the range of the per-period slopes.
// Period "p1": X = Z + 0.5u, Y = X + noise; period "p2": X = -0.8 Z + 0.5u,
// Y = 2X + noise. Carries z, period and 20 cluster ids.
PanelDataset two_period_sign_flip(Eigen::Index n_per_period, std::uint64_t seed);

}  // namespace shiftshare
