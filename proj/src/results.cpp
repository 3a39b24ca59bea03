#include "shiftshare/results.hpp"

#include <algorithm>
#include <fstream>

#include "shiftshare/csv.hpp"
#include "shiftshare/errors.hpp"

namespace shiftshare {

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json provenance_json(const std::string& config_hash, std::uint64_t seed) {
  return {{"config_hash", config_hash}, {"seed", seed}, {"schema_version", kSchemaVersion}};
}

nlohmann::json estimates_json(const EstimateSet& est) {
  nlohmann::json pe = nlohmann::json::array();
  for (std::size_t k = 0; k < est.phi.size(); ++k) {
    pe.push_back({{"phi", est.phi[k]}, {"gamma", est.pe(static_cast<Eigen::Index>(k))}});
  }
  return {{"asf", {{"x", est.grid.points}, {"mu", to_vec(est.asf)}}},
          {"lar", {{"x", est.grid.points}, {"beta", to_vec(est.lar)}}},
          {"ad", est.ad},
          {"pe", pe},
          {"n", est.n},
          {"provenance", provenance_json(est.config_hash, est.seed)}};
}

EstimateSet estimates_from_json(const nlohmann::json& j) {
  try {
    EstimateSet est;
    est.grid.points = j.at("asf").at("x").get<std::vector<double>>();
    est.asf = from_vec(j.at("asf").at("mu").get<std::vector<double>>());
    est.lar = from_vec(j.at("lar").at("beta").get<std::vector<double>>());
    est.ad = j.at("ad").get<double>();
    std::vector<double> gamma;
    for (const auto& e : j.at("pe")) {
      est.phi.push_back(e.at("phi").get<double>());
      gamma.push_back(e.at("gamma").get<double>());
    }
    est.pe = from_vec(gamma);
    est.n = j.value("n", Eigen::Index{0});
    if (j.contains("provenance")) {
      est.config_hash = j["provenance"].value("config_hash", std::string{});
      est.seed = j["provenance"].value("seed", std::uint64_t{0});
    }
    return est;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("estimates JSON: ") + e.what());
  }
}

nlohmann::json band_json(const Band& band) {
  return {{"target", band.target},   {"point", to_vec(band.point)}, {"se", to_vec(band.se)},
          {"lower", to_vec(band.lower)}, {"upper", to_vec(band.upper)}, {"k_alpha", band.k_alpha},
          {"excluded", band.excluded}};
}

nlohmann::json bands_json(const BootstrapBands& bands, const BootstrapRun& run, const EstimateSet& point) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : run.failures) failures.push_back({{"replicate", f.replicate}, {"message", f.message}});
  return {{"alpha", bands.alpha},
          {"B", run.b},
          {"successful", run.draws.size()},
          {"failures", failures},
          {"pivot_mismatch", run.pivot_mismatch},
          {"x", point.grid.points},
          {"phi", point.phi},
          {"asf", band_json(bands.asf)},
          {"lar", band_json(bands.lar)},
          {"ad", band_json(bands.ad)},
          {"pe", band_json(bands.pe)},
          {"provenance", provenance_json(point.config_hash, run.seed)}};
}

nlohmann::json tsls_json(const TslsFit& fit) {
  return {{"names", fit.names},
          {"alpha", to_vec(fit.alpha)},
          {"se", to_vec(fit.se)},
          {"se_kind", fit.se_kind},
          {"slope", fit.alpha(fit.slope_index)},
          {"slope_se", fit.se(fit.slope_index)},
          {"first_stage", fit.first_stage_coef},
          {"first_stage_se", fit.first_stage_se},
          {"n", fit.n},
          {"clusters", fit.clusters},
          {"pooled", fit.pooled}};
}

nlohmann::json surface_json(const FirstStageSurface& surface, const WeightReport& report) {
  nlohmann::json curves = nlohmann::json::array();
  for (std::size_t m = 0; m < surface.levels.size(); ++m) {
    curves.push_back({{"v", surface.levels[m]},
                      {"derivative", to_vec(surface.derivative.row(static_cast<Eigen::Index>(m)).transpose())}});
  }
  nlohmann::json loci = nlohmann::json::array();
  for (const auto& s : report.loci) loci.push_back({{"v", s.level}, {"z", s.z}});
  return {{"z", surface.z},
          {"curves", curves},
          {"sign_change", report.sign_change},
          {"not_weakly_causal", report.sign_change},
          {"sign_change_loci", loci},
          {"negative_weight_share", report.negative_weight_share}};
}

nlohmann::json oracle_json(const OracleValues& o) {
  nlohmann::json pe = nlohmann::json::array();
  for (std::size_t k = 0; k < o.phi.size(); ++k) {
    pe.push_back({{"phi", o.phi[k]}, {"gamma", o.pe_true[k].value}, {"mc_se", o.pe_true[k].se}});
  }
  return {{"asf", {{"x", o.grid.points}, {"mu", to_vec(o.asf_true)}}},
          {"lar", {{"x", o.grid.points}, {"beta", to_vec(o.lar_true)}, {"method", o.lar_method}}},
          {"ad", o.ad_true},
          {"ad_mc", {{"value", o.ad_mc.value}, {"mc_se", o.ad_mc.se}}},
          {"kappa", o.kappa},
          {"pe", pe}};
}

nlohmann::json decomposition_json(const TslsDecomposition& d) {
  return {{"beta_2sls", d.beta_2sls.value},
          {"beta_2sls_mc_se", d.beta_2sls.se},
          {"weighted_integral", d.weighted_integral},
          {"normalization", d.normalization},
          {"cov_xz", d.cov_xz},
          {"richardson_gap", d.richardson_gap},
          {"lambda_min", d.surface.min_lambda},
          {"lambda_negative_mass", d.surface.negative_mass},
          {"lambda_negative", d.surface.has_negative},
          {"lambda_negative_z", {d.surface.negative_z_lo, d.surface.negative_z_hi}}};
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidConfig, path.string() + ": " + e.what());
  }
}

void write_curve_csv(const std::filesystem::path& path, const EvalGrid& grid, const Eigen::VectorXd& values,
                     const std::string& value_name, const Band* band) {
  csv::Table t;
  t.header = {"x", value_name};
  if (band) t.header.insert(t.header.end(), {"se", "lower", "upper"});
  for (std::size_t k = 0; k < grid.points.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    std::vector<std::string> row = {csv::format_double(grid.points[k]), csv::format_double(values(i))};
    if (band) {
      row.push_back(csv::format_double(band->se(i)));
      row.push_back(csv::format_double(band->lower(i)));
      row.push_back(csv::format_double(band->upper(i)));
    }
    t.rows.push_back(std::move(row));
  }
  csv::write(path, t);
}

void write_pe_csv(const std::filesystem::path& path, const EstimateSet& est, const Band* band,
                  const Eigen::VectorXd* linear) {
  csv::Table t;
  t.header = {"phi", "gamma"};
  if (band) t.header.insert(t.header.end(), {"se", "lower", "upper"});
  if (linear) t.header.push_back("gamma_2sls");
  for (std::size_t k = 0; k < est.phi.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    std::vector<std::string> row = {csv::format_double(est.phi[k]), csv::format_double(est.pe(i))};
    if (band) {
      row.push_back(csv::format_double(band->se(i)));
      row.push_back(csv::format_double(band->lower(i)));
      row.push_back(csv::format_double(band->upper(i)));
    }
    if (linear) row.push_back(csv::format_double((*linear)(i)));
    t.rows.push_back(std::move(row));
  }
  csv::write(path, t);
}

void write_histogram_csv(const std::filesystem::path& path, const Eigen::Ref<const Eigen::VectorXd>& x, int bins) {
  if (bins < 1 || x.size() == 0) throw Error(Errc::InvalidConfig, "histogram needs data and at least one bin");
  const double lo = x.minCoeff(), hi = x.maxCoeff();
  const double width = hi > lo ? (hi - lo) / bins : 1.0;
  std::vector<long> counts(static_cast<std::size_t>(bins), 0);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const int b = std::min(bins - 1, static_cast<int>((x(i) - lo) / width));
    ++counts[static_cast<std::size_t>(b)];
  }
  csv::Table t;
  t.header = {"bin_lo", "bin_hi", "count"};
  for (int b = 0; b < bins; ++b) {
    t.rows.push_back({csv::format_double(lo + b * width), csv::format_double(lo + (b + 1) * width),
                      std::to_string(counts[static_cast<std::size_t>(b)])});
  }
  csv::write(path, t);
}

}  // namespace shiftshare
