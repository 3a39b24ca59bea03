#include "shiftshare/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "shiftshare/errors.hpp"
#include "shiftshare/targets.hpp"

namespace shiftshare {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& why) {
  throw Error(Errc::InvalidConfig, path + ": " + why);
}

template <class T>
T field(const nlohmann::json& j, const std::string& path, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    bad(path.empty() ? key : path + "." + key, e.what());
  }
}

// Message without the leading "<Errc>: " tag.
std::string bare(const Error& e) {
  const std::string what = e.what();
  const auto tag = std::string(errc_name(e.code())) + ": ";
  return what.rfind(tag, 0) == 0 ? what.substr(tag.size()) : what;
}

// Runs a nested parser; errors get the field path prefixed.
template <class F>
auto nested(const nlohmann::json& j, const std::string& path, const char* key, F parse) {
  const auto& sub = j.contains(key) ? j.at(key) : nlohmann::json::object();
  const std::string where = path.empty() ? key : path + "." + key;
  if (!sub.is_object()) bad(where, "expected an object");
  try {
    return parse(sub);
  } catch (const Error& e) {
    bad(where, bare(e));
  } catch (const nlohmann::json::exception& e) {
    bad(where, e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void RunConfig::validate() const {
  if (!(eps > 0.0 && eps < 0.5)) bad("eps", "must lie in (0, 0.5)");
  if (m1 < 2) bad("m1", "must be at least 2");
  if (!(alpha > 0.0 && alpha < 1.0)) bad("alpha", "must lie in (0, 1)");
  if (bootstrap < 0) bad("bootstrap", "must be nonnegative");
  if (threads < 0) bad("threads", "must be nonnegative");
  if (!(grid_lo >= 0.0 && grid_lo < grid_hi && grid_hi <= 1.0)) bad("grid", "need 0 <= lo < hi <= 1");
  if (grid_points < 2) bad("grid.points", "need at least two points");
  if (!std::isfinite(kappa) || kappa == 1.0) bad("policy.kappa", "elasticity must differ from 1");
  for (double f : phi) {
    if (!(f >= 0.0) || !std::isfinite(f)) bad("policy.phi", "tariff increases must be nonnegative");
  }
  for (double v : first_stage_levels) {
    if (!(v > 0.0 && v < 1.0)) bad("first_stage.levels", "levels must lie in (0, 1)");
  }
  try {
    k2.qx.validate();
  } catch (const Error& e) {
    bad("k2.q_x", bare(e));
  }
  try {
    k2.qv.validate();
  } catch (const Error& e) {
    bad("k2.q_v", bare(e));
  }
  try {
    first_stage_spline.validate();
  } catch (const Error& e) {
    bad("first_stage.spline", bare(e));
  }
}

PipelineConfig RunConfig::pipeline() const {
  PipelineConfig pc;
  pc.k1 = k1;
  pc.k2 = k2;
  pc.grid.eps = eps;
  pc.grid.m1 = m1;
  pc.grid.solver = solver;
  pc.grid_lo = grid_lo;
  pc.grid_hi = grid_hi;
  pc.grid_points = grid_points;
  return pc;
}

RunConfig RunConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) bad("<root>", "config must be a JSON object");
  RunConfig c;
  c.phi = PolicySet::default_ladder();

  nested(j, "", "data", [&](const nlohmann::json& d) {
    c.panel = resolve(base_dir, field<std::string>(d, "data", "panel", ""));
    c.sectors = resolve(base_dir, field<std::string>(d, "data", "sectors", ""));
    c.policy_map = resolve(base_dir, field<std::string>(d, "data", "policy_map", ""));
    return 0;
  });
  c.columns = nested(j, "", "columns", [](const nlohmann::json& s) { return ColumnMapping::from_json(s); });
  c.sector_columns =
      nested(j, "", "sector_columns", [](const nlohmann::json& s) { return SectorSchema::from_json(s); });
  c.k1 = nested(j, "", "k1", [](const nlohmann::json& s) { return K1Spec::from_json(s); });
  c.k2 = nested(j, "", "k2", [](const nlohmann::json& s) { return K2Spec::from_json(s); });
  nested(j, "", "first_stage", [&](const nlohmann::json& s) {
    c.first_stage_spline = SplineSpec::from_json(s.value("spline", nlohmann::json::object()));
    c.first_stage_levels = field(s, "first_stage", "levels", c.first_stage_levels);
    return 0;
  });
  c.solver = nested(j, "", "solver", [](const nlohmann::json& s) { return SolverOptions::from_json(s); });

  c.eps = field(j, "", "eps", c.eps);
  c.m1 = field(j, "", "m1", c.m1);
  nested(j, "", "grid", [&](const nlohmann::json& g) {
    c.grid_lo = field(g, "grid", "lo", c.grid_lo);
    c.grid_hi = field(g, "grid", "hi", c.grid_hi);
    c.grid_points = field(g, "grid", "points", c.grid_points);
    return 0;
  });
  c.bootstrap = field(j, "", "bootstrap", c.bootstrap);
  c.alpha = field(j, "", "alpha", c.alpha);
  c.seed = field(j, "", "seed", c.seed);
  c.threads = field(j, "", "threads", c.threads);
  nested(j, "", "policy", [&](const nlohmann::json& p) {
    c.phi = field(p, "policy", "phi", c.phi);
    c.kappa = field(p, "policy", "kappa", c.kappa);
    return 0;
  });
  c.cluster_se = field(j, "", "cluster_se", c.cluster_se);
  if (j.contains("out")) c.out = resolve(base_dir, field<std::string>(j, "", "out", ""));
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidConfig, path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json sector = {{"m_t", sector_columns.m_t},
                           {"m_tm1", sector_columns.m_tm1},
                           {"l_t", sector_columns.l_t},
                           {"shares_prefix", sector_columns.shares_prefix},
                           {"period", sector_columns.period}};
  return {{"data", {{"panel", panel.string()}, {"sectors", sectors.string()}, {"policy_map", policy_map.string()}}},
          {"columns", columns.to_json()},
          {"sector_columns", sector},
          {"k1", k1.to_json()},
          {"k2", k2.to_json()},
          {"first_stage", {{"spline", first_stage_spline.to_json()}, {"levels", first_stage_levels}}},
          {"solver", solver.to_json()},
          {"eps", eps},
          {"m1", m1},
          {"grid", {{"lo", grid_lo}, {"hi", grid_hi}, {"points", grid_points}}},
          {"bootstrap", bootstrap},
          {"alpha", alpha},
          {"seed", seed},
          {"policy", {{"phi", phi}, {"kappa", kappa}}},
          {"cluster_se", cluster_se},
          {"out", out.string()}};
}

std::string RunConfig::hash() const {
  // thread count and output location do not affect results
  auto j = to_json();
  j.erase("out");
  return fnv1a_hex(j.dump());
}

}  // namespace shiftshare
