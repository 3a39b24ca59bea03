#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "shiftshare/benchmarks.hpp"
#include "shiftshare/inference.hpp"
#include "shiftshare/synthetic.hpp"
#include "shiftshare/targets.hpp"

namespace shiftshare {

inline constexpr int kSchemaVersion = 1;

nlohmann::json provenance_json(const std::string& config_hash, std::uint64_t seed);

// {asf: {x, mu}, lar: {x, beta}, ad, pe: [{phi, gamma}], n, provenance}
nlohmann::json estimates_json(const EstimateSet& est);
EstimateSet estimates_from_json(const nlohmann::json& j);

nlohmann::json band_json(const Band& band);
// {alpha, B, failures, asf: band, lar: band, ad: band, pe: band, provenance}
nlohmann::json bands_json(const BootstrapBands& bands, const BootstrapRun& run, const EstimateSet& point);

nlohmann::json tsls_json(const TslsFit& fit);
nlohmann::json surface_json(const FirstStageSurface& surface, const WeightReport& report);
nlohmann::json oracle_json(const OracleValues& oracle);
nlohmann::json decomposition_json(const TslsDecomposition& d);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

// x, estimate[, se, lower, upper]
void write_curve_csv(const std::filesystem::path& path, const EvalGrid& grid, const Eigen::VectorXd& values,
                     const std::string& value_name, const Band* band = nullptr);
// phi, gamma[, se, lower, upper][, gamma_2sls]
void write_pe_csv(const std::filesystem::path& path, const EstimateSet& est, const Band* band = nullptr,
                  const Eigen::VectorXd* linear = nullptr);
// equal-width histogram of the treatment: bin_lo, bin_hi, count
void write_histogram_csv(const std::filesystem::path& path, const Eigen::Ref<const Eigen::VectorXd>& x, int bins = 30);

}  // namespace shiftshare
