#include "shiftshare/dataset.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <utility>

#include "shiftshare/csv.hpp"
#include "shiftshare/errors.hpp"

namespace shiftshare {

namespace {

bool is_glob(const std::string& pattern) { return pattern.find_first_of("*?[") != std::string::npos; }

void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& m, const std::string& what) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (!std::isfinite(m(r, c))) {
        throw Error(Errc::NonFinite, what + " at row " + std::to_string(r + 1) + ", col " + std::to_string(c + 1));
      }
    }
  }
}

}  // namespace

ColumnMapping ColumnMapping::from_json(const nlohmann::json& j) {
  ColumnMapping m;
  if (!j.is_object()) throw Error(Errc::InvalidConfig, "columns: expected an object");
  m.y = j.value("y", m.y);
  m.x = j.value("x", m.x);
  m.shares_prefix = j.value("shares_prefix", m.shares_prefix);
  if (j.contains("covariates")) m.covariates = j.at("covariates").get<std::vector<std::string>>();
  m.z = j.value("z", std::string{});
  m.id = j.value("id", std::string{});
  m.period = j.value("period", std::string{});
  m.cluster = j.value("cluster", std::string{});
  m.standardize_covariates = j.value("standardize_covariates", false);
  return m;
}

nlohmann::json ColumnMapping::to_json() const {
  return {{"y", y},           {"x", x},           {"shares_prefix", shares_prefix},
          {"covariates", covariates}, {"z", z},   {"id", id},
          {"period", period}, {"cluster", cluster}, {"standardize_covariates", standardize_covariates}};
}

SectorSchema SectorSchema::from_json(const nlohmann::json& j) {
  SectorSchema s;
  s.m_t = j.value("m_t", s.m_t);
  s.m_tm1 = j.value("m_tm1", s.m_tm1);
  s.l_t = j.value("l_t", s.l_t);
  s.shares_prefix = j.value("shares_prefix", std::string{});
  s.period = j.value("period", std::string{});
  return s;
}

std::vector<std::string> match_columns(const std::vector<std::string>& header, const std::string& pattern) {
  std::vector<std::string> out;
  for (const auto& h : header) {
    bool hit = is_glob(pattern) ? fnmatch(pattern.c_str(), h.c_str(), 0) == 0 : h.rfind(pattern, 0) == 0;
    if (hit) out.push_back(h);
  }
  return out;
}

void validate(const PanelDataset& panel) {
  const auto n = panel.n();
  if (n == 0) throw Error(Errc::EmptyPanel, "panel has no rows");
  if (n < 2) throw Error(Errc::InvalidPanel, "panel needs at least 2 rows");
  if (panel.x.size() != n || panel.w.rows() != n || panel.d.rows() != n) {
    throw Error(Errc::InvalidPanel, "column lengths disagree");
  }
  if (panel.J() < 1) throw Error(Errc::InvalidPanel, "at least one share column is required");
  if (panel.z && panel.z->size() != n) throw Error(Errc::InvalidPanel, "instrument length disagrees");
  require_finite(panel.y, "y");
  require_finite(panel.x, "x");
  require_finite(panel.w, "shares");
  require_finite(panel.d, "covariates");
  if (panel.z) require_finite(*panel.z, "z");
  if ((panel.w.array() < 0.0).any()) throw Error(Errc::NegativeShare, "shares must be nonnegative");
  if (!panel.region_id.empty()) {
    if (static_cast<Eigen::Index>(panel.region_id.size()) != n) throw Error(Errc::InvalidPanel, "id length disagrees");
    // a region may appear once per period in a pooled panel
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t i = 0; i < panel.region_id.size(); ++i) {
      const auto& id = panel.region_id[i];
      const std::string period = i < panel.period.size() ? panel.period[i] : std::string();
      if (!seen.insert({period, id}).second) throw Error(Errc::DuplicateRegion, "duplicate region id '" + id + "'");
    }
  }
  const double mean = panel.x.mean();
  const double var = (panel.x.array() - mean).square().sum() / static_cast<double>(n - 1);
  if (!(var > 0.0)) throw Error(Errc::DegenerateTreatment, "treatment has zero sample variance");
}

void validate(const SectorPanel& s, Eigen::Index n_regions) {
  const auto J = s.J();
  if (J < 1 || s.m_tm1.size() != J || s.l_t.size() != J || s.shares.cols() != J) {
    throw Error(Errc::InvalidPanel, "sector panel dimensions disagree");
  }
  if (s.shares.rows() != n_regions) throw Error(Errc::InvalidPanel, "sector shares row count differs from panel");
  require_finite(s.m_t, "m_t");
  require_finite(s.m_tm1, "m_tm1");
  require_finite(s.l_t, "l_t");
  require_finite(s.shares, "sector shares");
  if ((s.l_t.array() <= 0.0).any()) throw Error(Errc::InvalidPanel, "l_t must be strictly positive");
  if ((s.m_t.array() < 0.0).any() || (s.m_tm1.array() < 0.0).any()) {
    throw Error(Errc::InvalidPanel, "imports must be nonnegative");
  }
  if ((s.shares.array() < 0.0).any()) throw Error(Errc::NegativeShare, "sector shares must be nonnegative");
}

PanelDataset load_panel(const std::filesystem::path& path, const ColumnMapping& schema) {
  const auto table = csv::read(path);
  if (table.rows.empty()) throw Error(Errc::EmptyPanel, path.string() + " has no data rows");

  auto col = [&](const std::string& name) {
    long c = table.column(name);
    if (c < 0) throw Error(Errc::MissingColumn, "column '" + name + "' not found in " + path.string());
    return static_cast<std::size_t>(c);
  };
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  auto numeric = [&](std::size_t c, Eigen::Index r) {
    double v;
    if (!csv::parse_double(table.rows[r][c], v)) {
      throw Error(Errc::NonFinite, "unparseable value '" + table.rows[r][c] + "' at row " + std::to_string(r + 1) +
                                       ", col " + table.header[c]);
    }
    if (!std::isfinite(v)) {
      throw Error(Errc::NonFinite, "row " + std::to_string(r + 1) + ", col " + table.header[c]);
    }
    return v;
  };

  PanelDataset panel;
  panel.share_names = match_columns(table.header, schema.shares_prefix);
  if (panel.share_names.empty()) {
    throw Error(Errc::MissingColumn, "no share columns match '" + schema.shares_prefix + "'");
  }
  panel.covariate_names = schema.covariates;

  const auto cy = col(schema.y), cx = col(schema.x);
  std::vector<std::size_t> cw, cd;
  for (const auto& s : panel.share_names) cw.push_back(col(s));
  for (const auto& s : panel.covariate_names) cd.push_back(col(s));

  panel.y.resize(n);
  panel.x.resize(n);
  panel.w.resize(n, static_cast<Eigen::Index>(cw.size()));
  panel.d.resize(n, static_cast<Eigen::Index>(cd.size()));
  for (Eigen::Index r = 0; r < n; ++r) {
    panel.y(r) = numeric(cy, r);
    panel.x(r) = numeric(cx, r);
    for (std::size_t j = 0; j < cw.size(); ++j) panel.w(r, static_cast<Eigen::Index>(j)) = numeric(cw[j], r);
    for (std::size_t k = 0; k < cd.size(); ++k) panel.d(r, static_cast<Eigen::Index>(k)) = numeric(cd[k], r);
  }
  if (!schema.z.empty()) {
    const auto cz = col(schema.z);
    Eigen::VectorXd z(n);
    for (Eigen::Index r = 0; r < n; ++r) z(r) = numeric(cz, r);
    panel.z = std::move(z);
  }
  auto text = [&](const std::string& name, std::vector<std::string>& out) {
    if (name.empty()) return;
    const auto c = col(name);
    out.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) out.push_back(table.rows[r][c]);
  };
  text(schema.id, panel.region_id);
  text(schema.period, panel.period);
  text(schema.cluster, panel.cluster);
  if (!panel.period.empty() && std::all_of(panel.period.begin(), panel.period.end(),
                                           [&](const auto& s) { return s == panel.period.front(); })) {
    panel.period_label = panel.period.front();
  }

  if (schema.standardize_covariates) {
    for (Eigen::Index k = 0; k < panel.p(); ++k) {
      auto c = panel.d.col(k);
      const double mean = c.mean();
      const double sd = std::sqrt((c.array() - mean).square().sum() / static_cast<double>(n - 1));
      if (sd > 0.0) c = (c.array() - mean) / sd;
    }
  }
  validate(panel);
  return panel;
}

void write_panel(const PanelDataset& panel, const std::filesystem::path& path) {
  csv::Table t;
  const bool has_id = !panel.region_id.empty(), has_period = !panel.period.empty(),
             has_cluster = !panel.cluster.empty();
  if (has_id) t.header.push_back("id");
  if (has_period) t.header.push_back("period");
  if (has_cluster) t.header.push_back("cluster");
  t.header.push_back("y");
  t.header.push_back("x");
  if (panel.z) t.header.push_back("z");
  for (Eigen::Index j = 0; j < panel.J(); ++j) {
    t.header.push_back(j < static_cast<Eigen::Index>(panel.share_names.size()) ? panel.share_names[j]
                                                                                : "w_" + std::to_string(j + 1));
  }
  for (Eigen::Index k = 0; k < panel.p(); ++k) {
    t.header.push_back(k < static_cast<Eigen::Index>(panel.covariate_names.size()) ? panel.covariate_names[k]
                                                                                  : "d_" + std::to_string(k + 1));
  }
  for (Eigen::Index r = 0; r < panel.n(); ++r) {
    std::vector<std::string> row;
    if (has_id) row.push_back(panel.region_id[r]);
    if (has_period) row.push_back(panel.period[r]);
    if (has_cluster) row.push_back(panel.cluster[r]);
    row.push_back(csv::format_double(panel.y(r)));
    row.push_back(csv::format_double(panel.x(r)));
    if (panel.z) row.push_back(csv::format_double((*panel.z)(r)));
    for (Eigen::Index j = 0; j < panel.J(); ++j) row.push_back(csv::format_double(panel.w(r, j)));
    for (Eigen::Index k = 0; k < panel.p(); ++k) row.push_back(csv::format_double(panel.d(r, k)));
    t.rows.push_back(std::move(row));
  }
  csv::write(path, t);
}

PanelDataset select_rows(const PanelDataset& panel, const std::vector<Eigen::Index>& rows) {
  PanelDataset out;
  const auto m = static_cast<Eigen::Index>(rows.size());
  out.y.resize(m);
  out.x.resize(m);
  out.w.resize(m, panel.J());
  out.d.resize(m, panel.p());
  if (panel.z) out.z = Eigen::VectorXd(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto r = rows[static_cast<std::size_t>(k)];
    out.y(k) = panel.y(r);
    out.x(k) = panel.x(r);
    out.w.row(k) = panel.w.row(r);
    out.d.row(k) = panel.d.row(r);
    if (panel.z) (*out.z)(k) = (*panel.z)(r);
    if (!panel.region_id.empty()) out.region_id.push_back(panel.region_id[r]);
    if (!panel.period.empty()) out.period.push_back(panel.period[r]);
    if (!panel.cluster.empty()) out.cluster.push_back(panel.cluster[r]);
  }
  out.period_label = panel.period_label;
  out.share_names = panel.share_names;
  out.covariate_names = panel.covariate_names;
  return out;
}

std::vector<std::vector<Eigen::Index>> period_rows(const PanelDataset& panel) {
  std::vector<std::vector<Eigen::Index>> out;
  if (panel.period.empty()) {
    out.emplace_back(static_cast<std::size_t>(panel.n()));
    std::iota(out.back().begin(), out.back().end(), Eigen::Index{0});
    return out;
  }
  std::map<std::string, std::size_t> slot;
  for (Eigen::Index r = 0; r < panel.n(); ++r) {
    auto [it, inserted] = slot.try_emplace(panel.period[r], out.size());
    if (inserted) out.emplace_back();
    out[it->second].push_back(r);
  }
  return out;
}

std::vector<PanelDataset> split_periods(const PanelDataset& panel) {
  if (panel.period.empty()) return {panel};
  std::vector<PanelDataset> out;
  for (const auto& rows : period_rows(panel)) {
    auto part = select_rows(panel, rows);
    part.period_label = panel.period[rows.front()];
    out.push_back(std::move(part));
  }
  return out;
}

SectorPanel load_sector_panel(const std::filesystem::path& sector_csv, const SectorSchema& schema,
                              Eigen::MatrixXd shares, const std::string& period_label) {
  auto table = csv::read(sector_csv);
  if (!schema.period.empty()) {
    const long pc = table.column(schema.period);
    if (pc < 0) throw Error(Errc::MissingColumn, "column '" + schema.period + "' not found in " + sector_csv.string());
    std::erase_if(table.rows, [&](const std::vector<std::string>& r) {
      return r[static_cast<std::size_t>(pc)] != period_label;
    });
  }
  if (table.rows.empty()) throw Error(Errc::EmptyPanel, sector_csv.string() + " has no sector rows");
  auto col = [&](const std::string& name) {
    long c = table.column(name);
    if (c < 0) throw Error(Errc::MissingColumn, "column '" + name + "' not found in " + sector_csv.string());
    return static_cast<std::size_t>(c);
  };
  const auto J = static_cast<Eigen::Index>(table.rows.size());
  SectorPanel s;
  s.m_t.resize(J);
  s.m_tm1.resize(J);
  s.l_t.resize(J);
  const auto c1 = col(schema.m_t), c0 = col(schema.m_tm1), cl = col(schema.l_t);
  for (Eigen::Index j = 0; j < J; ++j) {
    auto get = [&](std::size_t c) {
      double v;
      if (!csv::parse_double(table.rows[j][c], v) || !std::isfinite(v)) {
        throw Error(Errc::NonFinite, "sector row " + std::to_string(j + 1) + ", col " + table.header[c]);
      }
      return v;
    };
    s.m_t(j) = get(c1);
    s.m_tm1(j) = get(c0);
    s.l_t(j) = get(cl);
  }
  s.shares = std::move(shares);
  validate(s, s.shares.rows());
  return s;
}

}  // namespace shiftshare
