#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "shiftshare/pipeline.hpp"

namespace shiftshare {

struct BootstrapOptions {
  int b = 199;
  std::uint64_t seed = 0;
  int threads = 1;
  bool unit_weights = false;  // test hook: every e_ib = 1
};

struct ReplicateFailure {
  int replicate;
  std::string message;
};

struct BootstrapRun {
  int b = 0;
  std::uint64_t seed = 0;
  std::vector<EstimateSet> draws;      // successful replicates, in replicate order
  std::vector<int> replicate;          // replicate index of each draw
  std::vector<ReplicateFailure> failures;
  std::vector<int> pivot_mismatch;     // replicates refit on the point estimate's column set
  bool flagged = false;                // fewer than 90% of replicates succeeded
};

// Observation weights e_ib ~ Exp(1) of replicate `r`; a pure function of (seed, r).
std::vector<double> bootstrap_weights(std::uint64_t seed, int r, Eigen::Index n);

// Reruns Algorithm 1 on B exponentially reweighted samples. Replicate
// failures are recorded; more than 10% failed replicates throws BootstrapFailed.
BootstrapRun run_bootstrap(const PanelDataset& panel, const PipelineConfig& config, const PolicySet& policy,
                           const Estimation& point, const BootstrapOptions& opts);

// IQR / 1.349 with type-7 quantiles. Needs at least four draws.
double se_iqr(std::vector<double> draws);

struct Band {
  std::string target;
  Eigen::VectorXd point;
  Eigen::VectorXd se;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double k_alpha = 0.0;            // (1 - alpha) quantile of the sup-t draws
  std::vector<Eigen::Index> excluded;  // grid points with se = 0, left out of the sup
};

// draws: one vector per replicate, conformable with `point`.
Band uniform_band(const std::string& target, const std::vector<Eigen::VectorXd>& draws,
                  const Eigen::Ref<const Eigen::VectorXd>& point, double alpha);

struct BootstrapBands {
  double alpha = 0.1;
  Band asf, lar, ad, pe;
};

BootstrapBands uniform_bands(const BootstrapRun& run, const EstimateSet& point, double alpha);

}  // namespace shiftshare
