#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace shiftshare {

// One period of regional observations. Conditioning on the common shift
// draw is implicit: every row of a dataset shares the same shock vector.
struct PanelDataset {
  Eigen::VectorXd y;  // outcome
  Eigen::VectorXd x;  // treatment (exposure change)
  Eigen::MatrixXd w;  // n x J shares, nonnegative
  Eigen::MatrixXd d;  // n x p covariates
  std::optional<Eigen::VectorXd> z;  // scalar shift-share instrument, when supplied

  std::vector<std::string> region_id;  // empty: row index is the identifier
  std::vector<std::string> period;     // per-row period labels (pooled panels)
  std::vector<std::string> cluster;    // per-row cluster ids (2SLS inference)
  std::string period_label;

  std::vector<std::string> share_names;
  std::vector<std::string> covariate_names;

  Eigen::Index n() const { return y.size(); }
  Eigen::Index J() const { return w.cols(); }
  Eigen::Index p() const { return d.cols(); }
};

// Sector-level inputs of the tariff policy map.
struct SectorPanel {
  Eigen::VectorXd m_t;    // imports at period end, per sector
  Eigen::VectorXd m_tm1;  // imports at period start
  Eigen::VectorXd l_t;    // workforce denominators
  Eigen::MatrixXd shares; // n x J contemporaneous exposure weights

  Eigen::Index J() const { return m_t.size(); }
};

// Maps panel roles to CSV column names.
struct ColumnMapping {
  std::string y = "y";
  std::string x = "x";
  std::string shares_prefix = "w_";  // prefix, or a glob when it contains * ? [
  std::vector<std::string> covariates;
  std::string z;        // optional
  std::string id;       // optional
  std::string period;   // optional
  std::string cluster;  // optional
  bool standardize_covariates = false;

  static ColumnMapping from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct SectorSchema {
  std::string m_t = "m_t";
  std::string m_tm1 = "m_tm1";
  std::string l_t = "l_t";
  std::string shares_prefix;  // share columns in the panel CSV; defaults to the panel's prefix
  std::string period;         // optional: sector rows carry a period label

  static SectorSchema from_json(const nlohmann::json& j);
};

// Throws Error on any invariant violation.
void validate(const PanelDataset& panel);
void validate(const SectorPanel& sectors, Eigen::Index n_regions);

PanelDataset load_panel(const std::filesystem::path& path, const ColumnMapping& schema);
void write_panel(const PanelDataset& panel, const std::filesystem::path& path);

// One dataset per distinct period label, in order of first appearance.
// A panel without period labels is returned unchanged.
std::vector<PanelDataset> split_periods(const PanelDataset& panel);
// Row indices behind each split_periods entry.
std::vector<std::vector<Eigen::Index>> period_rows(const PanelDataset& panel);

// Rows of `panel` selected by index; keeps metadata.
PanelDataset select_rows(const PanelDataset& panel, const std::vector<Eigen::Index>& rows);

// Sector rows from `sector_csv`; `shares` are the contemporaneous region x sector
// weights (typically read from the panel CSV with SectorSchema::shares_prefix).
// When the schema names a period column, only rows labelled `period_label` are kept.
SectorPanel load_sector_panel(const std::filesystem::path& sector_csv, const SectorSchema& schema,
                              Eigen::MatrixXd shares, const std::string& period_label = {});

// Columns of `header` selected by a prefix or glob pattern, in header order.
std::vector<std::string> match_columns(const std::vector<std::string>& header, const std::string& pattern);

}  // namespace shiftshare
