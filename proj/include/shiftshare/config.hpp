#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "shiftshare/basis.hpp"
#include "shiftshare/dataset.hpp"
#include "shiftshare/pipeline.hpp"

namespace shiftshare {

// Executable form of an estimation specification. Every field has a default;
// a JSON config overrides any subset.
struct RunConfig {
  std::filesystem::path panel;       // data.panel
  std::filesystem::path sectors;     // data.sectors (tariff policy inputs)
  std::filesystem::path policy_map;  // data.policy_map (custom ℓ columns)
  ColumnMapping columns;
  SectorSchema sector_columns;

  K1Spec k1;
  K2Spec k2;
  SplineSpec first_stage_spline;                 // q_Z for the first-stage effects
  std::vector<double> first_stage_levels = {0.2, 0.5, 0.8};

  double eps = 0.01;
  int m1 = 599;
  SolverOptions solver;
  double grid_lo = 0.05, grid_hi = 0.95;
  int grid_points = 50;

  int bootstrap = 199;
  double alpha = 0.1;
  std::uint64_t seed = 20240101;
  int threads = 1;

  std::vector<double> phi;  // tariff ladder
  double kappa = 1.19;
  bool cluster_se = true;   // CR1 when the panel has a cluster column

  std::filesystem::path out = "results";

  // InvalidConfig with the offending field path.
  void validate() const;
  PipelineConfig pipeline() const;

  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  // FNV-1a of the canonical JSON dump, as 16 hex digits.
  std::string hash() const;
};

std::string fnv1a_hex(const std::string& text);

}  // namespace shiftshare
