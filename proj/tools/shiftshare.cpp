#include <CLI11.hpp>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "shiftshare/benchmarks.hpp"
#include "shiftshare/config.hpp"
#include "shiftshare/control_function.hpp"
#include "shiftshare/csv.hpp"
#include "shiftshare/dataset.hpp"
#include "shiftshare/errors.hpp"
#include "shiftshare/inference.hpp"
#include "shiftshare/parallel.hpp"
#include "shiftshare/pipeline.hpp"
#include "shiftshare/results.hpp"
#include "shiftshare/synthetic.hpp"

namespace fs = std::filesystem;
using namespace shiftshare;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  std::optional<double> eps;
  std::optional<int> m1;
  std::optional<int> bootstrap;
  std::optional<double> alpha;
};

RunConfig load_config(const Overrides& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : RunConfig::load(o.config);
  if (o.config.empty()) cfg.phi = PolicySet::default_ladder();
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (o.out) cfg.out = *o.out;
  if (o.eps) cfg.eps = *o.eps;
  if (o.m1) cfg.m1 = *o.m1;
  if (o.bootstrap) cfg.bootstrap = *o.bootstrap;
  if (o.alpha) cfg.alpha = *o.alpha;
  cfg.validate();
  if (cfg.panel.empty()) throw Error(Errc::InvalidConfig, "data.panel: no panel file given");
  return cfg;
}

// One estimation sample: a period of the panel with its policy inputs.
struct Sample {
  std::string label;
  PanelDataset panel;
  PolicySet policy;
  fs::path dir;
};

Eigen::MatrixXd read_columns(const csv::Table& t, const std::vector<std::string>& names, const std::string& what) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t c = 0; c < names.size(); ++c) {
    const auto col = static_cast<std::size_t>(t.column(names[c]));
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      double v;
      if (!csv::parse_double(t.rows[r][col], v) || !std::isfinite(v)) {
        throw Error(Errc::NonFinite, what + " row " + std::to_string(r + 1) + ", col " + names[c]);
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return m;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  return out;
}

std::string safe_name(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return s.empty() ? "period" : s;
}

std::vector<Sample> load_samples(const RunConfig& cfg) {
  const auto panel = load_panel(cfg.panel, cfg.columns);
  const auto groups = period_rows(panel);
  auto parts = split_periods(panel);

  Eigen::MatrixXd sector_shares, custom;
  if (!cfg.sectors.empty() || !cfg.policy_map.empty()) {
    if (!cfg.sectors.empty()) {
      const auto table = csv::read(cfg.panel);
      const auto prefix =
          cfg.sector_columns.shares_prefix.empty() ? cfg.columns.shares_prefix : cfg.sector_columns.shares_prefix;
      const auto names = match_columns(table.header, prefix);
      if (names.empty()) throw Error(Errc::MissingColumn, "no sector share columns match '" + prefix + "'");
      sector_shares = read_columns(table, names, cfg.panel.string());
    } else {
      const auto table = csv::read(cfg.policy_map);
      std::vector<std::string> names;
      for (const auto& h : table.header) {
        if (h != cfg.columns.id && h != cfg.columns.period) names.push_back(h);
      }
      custom = read_columns(table, names, cfg.policy_map.string());
      if (custom.rows() != panel.n()) {
        throw Error(Errc::InvalidPanel, "data.policy_map: row count differs from the panel");
      }
    }
  }

  std::vector<Sample> out;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    Sample s;
    s.label = parts[k].period_label;
    s.panel = std::move(parts[k]);
    s.dir = parts.size() > 1 ? cfg.out / safe_name(s.label) : cfg.out;
    if (sector_shares.size() > 0) {
      auto sectors = load_sector_panel(cfg.sectors, cfg.sector_columns, take_rows(sector_shares, groups[k]), s.label);
      s.policy = PolicySet::tariff_ladder(sectors, cfg.phi, cfg.kappa);
    } else if (custom.size() > 0) {
      const auto sub = take_rows(custom, groups[k]);
      for (Eigen::Index c = 0; c < sub.cols(); ++c) {
        s.policy.phi.push_back(static_cast<double>(c + 1));
        s.policy.ell.push_back(sub.col(c));
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

Estimation estimate(const Sample& s, const RunConfig& cfg) {
  auto est = run_algorithm1(s.panel, cfg.pipeline(), s.policy);
  est.estimates.config_hash = cfg.hash();
  est.estimates.seed = cfg.seed;
  return est;
}

nlohmann::json diagnostics(const Estimation& est) {
  int not_converged = 0;
  for (const auto& f : est.grid.fits) not_converged += f.status != QrStatus::Converged;
  return {{"k1_dropped", est.grid.dropped},
          {"k2_dropped", est.fit.dropped},
          {"levels", est.grid.levels.size()},
          {"levels_not_converged", not_converged},
          {"residual_ss", est.fit.residual_ss}};
}

// `bands`, when given, is embedded next to the point estimates.
void write_point(const Sample& s, const Estimation& est, const RunConfig& cfg, const nlohmann::json* bands = nullptr) {
  fs::create_directories(s.dir);
  auto j = estimates_json(est.estimates);
  j["period"] = s.label;
  j["diagnostics"] = diagnostics(est);
  if (bands) j["bands"] = *bands;
  j["config"] = cfg.to_json();
  write_json(s.dir / "estimates.json", j);
  write_curve_csv(s.dir / "asf.csv", est.estimates.grid, est.estimates.asf, "mu");
  write_curve_csv(s.dir / "lar.csv", est.estimates.grid, est.estimates.lar, "beta");
  write_grid_csv(est.grid, s.dir / "quantile_grid.csv");
  write_coefficients_csv(est.fit, s.dir / "pi2.csv");
  write_histogram_csv(s.dir / "histogram.csv", s.panel.x);
}

struct Banded {
  BootstrapRun run;
  BootstrapBands bands;
};

Banded bootstrap(const Sample& s, const Estimation& est, const RunConfig& cfg) {
  BootstrapOptions opts;
  opts.b = cfg.bootstrap;
  opts.seed = cfg.seed;
  opts.threads = resolve_threads(cfg.threads);
  Banded out;
  out.run = run_bootstrap(s.panel, cfg.pipeline(), s.policy, est, opts);
  out.bands = uniform_bands(out.run, est.estimates, cfg.alpha);
  return out;
}

int cmd_estimate(const Overrides& o) {
  const auto cfg = load_config(o);
  for (const auto& s : load_samples(cfg)) {
    const auto est = estimate(s, cfg);
    write_point(s, est, cfg);
    if (!est.estimates.phi.empty()) write_pe_csv(s.dir / "pe.csv", est.estimates);
    std::cout << (s.label.empty() ? std::string("sample") : s.label) << ": n=" << s.panel.n()
              << " AD=" << est.estimates.ad << "\n";
  }
  return 0;
}

int cmd_bootstrap(const Overrides& o) {
  const auto cfg = load_config(o);
  for (const auto& s : load_samples(cfg)) {
    const auto est = estimate(s, cfg);
    const auto b = bootstrap(s, est, cfg);
    const auto bands = bands_json(b.bands, b.run, est.estimates);
    write_point(s, est, cfg, &bands);
    write_json(s.dir / "bands.json", bands);
    write_curve_csv(s.dir / "asf.csv", est.estimates.grid, est.estimates.asf, "mu", &b.bands.asf);
    write_curve_csv(s.dir / "lar.csv", est.estimates.grid, est.estimates.lar, "beta", &b.bands.lar);
    if (!est.estimates.phi.empty()) write_pe_csv(s.dir / "pe.csv", est.estimates, &b.bands.pe);
    std::cout << (s.label.empty() ? std::string("sample") : s.label) << ": AD=" << est.estimates.ad << " ["
              << b.bands.ad.lower(0) << ", " << b.bands.ad.upper(0) << "], " << b.run.draws.size() << "/"
              << b.run.b << " replicates\n";
  }
  return 0;
}

int cmd_policy(const Overrides& o) {
  const auto cfg = load_config(o);
  if (cfg.sectors.empty() && cfg.policy_map.empty()) {
    throw Error(Errc::InvalidConfig, "data.sectors: the policy command needs sector data or a policy map");
  }
  for (const auto& s : load_samples(cfg)) {
    const auto est = estimate(s, cfg);
    std::optional<Banded> b;
    if (cfg.bootstrap > 0) b = bootstrap(s, est, cfg);
    const auto bands = b ? bands_json(b->bands, b->run, est.estimates) : nlohmann::json();
    write_point(s, est, cfg, b ? &bands : nullptr);

    std::optional<Eigen::VectorXd> linear;
    if (s.panel.z) {
      const auto fit = tsls(s.panel, false, cfg.cluster_se && !s.panel.cluster.empty());
      linear = Eigen::VectorXd(static_cast<Eigen::Index>(s.policy.ell.size()));
      for (std::size_t k = 0; k < s.policy.ell.size(); ++k) {
        (*linear)(static_cast<Eigen::Index>(k)) = linear_pe(fit, s.panel, s.policy.ell[k]);
      }
    }

    nlohmann::json ladder = nlohmann::json::array();
    for (std::size_t k = 0; k < est.estimates.phi.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      nlohmann::json e = {{"phi", est.estimates.phi[k]}, {"gamma", est.estimates.pe(i)}};
      if (b) {
        e["se"] = b->bands.pe.se(i);
        e["lower"] = b->bands.pe.lower(i);
        e["upper"] = b->bands.pe.upper(i);
      }
      if (linear) e["gamma_2sls"] = (*linear)(i);
      ladder.push_back(std::move(e));
    }
    nlohmann::json j = {{"period", s.label},
                        {"kind", cfg.sectors.empty() ? "custom_map" : "tariff"},
                        {"kappa", cfg.kappa},
                        {"ladder", ladder},
                        {"provenance", provenance_json(cfg.hash(), cfg.seed)}};
    if (b) {
      j["alpha"] = cfg.alpha;
      j["k_alpha"] = b->bands.pe.k_alpha;
      j["B"] = b->run.b;
      write_json(s.dir / "bands.json", bands);
    }
    write_json(s.dir / "pe.json", j);
    write_pe_csv(s.dir / "pe.csv", est.estimates, b ? &b->bands.pe : nullptr, linear ? &*linear : nullptr);
    std::cout << (s.label.empty() ? std::string("sample") : s.label) << ": " << est.estimates.phi.size()
              << " policy points\n";
  }
  return 0;
}

int cmd_compare(const Overrides& o) {
  const auto cfg = load_config(o);
  const auto panel = load_panel(cfg.panel, cfg.columns);
  if (!panel.z) throw Error(Errc::InvalidConfig, "columns.z: 2SLS comparison needs an instrument column");
  const auto samples = load_samples(cfg);

  csv::Table table;
  table.header = {"period", "n", "ad", "tsls", "tsls_se", "first_stage", "first_stage_se", "se_kind", "sign_change",
                  "negative_weight_share"};
  nlohmann::json periods = nlohmann::json::array();
  for (const auto& s : samples) {
    const auto est = estimate(s, cfg);
    write_point(s, est, cfg);
    const auto fit = tsls(s.panel, false, cfg.cluster_se && !s.panel.cluster.empty());
    const auto surface = first_stage_effects(s.panel, *s.panel.z, cfg.first_stage_spline, cfg.first_stage_levels,
                                             cfg.solver, cfg.grid_points, cfg.grid_lo, cfg.grid_hi);
    const auto report = tsls_weight_diagnostic(surface, *s.panel.z);

    const auto lin = linear_asf(fit, s.panel, est.estimates.grid);
    write_curve_csv(s.dir / "asf_2sls.csv", est.estimates.grid, lin, "mu");
    auto fs_json = surface_json(surface, report);
    fs_json["provenance"] = provenance_json(cfg.hash(), cfg.seed);
    write_json(s.dir / "first_stage.json", fs_json);

    csv::Table curves;
    curves.header = {"z"};
    for (double v : surface.levels) curves.header.push_back("v" + csv::format_double(v));
    for (std::size_t c = 0; c < surface.z.size(); ++c) {
      std::vector<std::string> row = {csv::format_double(surface.z[c])};
      for (Eigen::Index m = 0; m < surface.derivative.rows(); ++m) {
        row.push_back(csv::format_double(surface.derivative(m, static_cast<Eigen::Index>(c))));
      }
      curves.rows.push_back(std::move(row));
    }
    csv::write(s.dir / "first_stage.csv", curves);

    periods.push_back({{"period", s.label},
                       {"ad", est.estimates.ad},
                       {"tsls", tsls_json(fit)},
                       {"first_stage_effects", {{"sign_change", report.sign_change},
                                                {"negative_weight_share", report.negative_weight_share}}}});
    table.rows.push_back({s.label, std::to_string(s.panel.n()), csv::format_double(est.estimates.ad),
                          csv::format_double(fit.alpha(fit.slope_index)), csv::format_double(fit.se(fit.slope_index)),
                          csv::format_double(fit.first_stage_coef), csv::format_double(fit.first_stage_se), fit.se_kind,
                          report.sign_change ? "true" : "false", csv::format_double(report.negative_weight_share)});
  }

  nlohmann::json j = {{"periods", periods}, {"provenance", provenance_json(cfg.hash(), cfg.seed)}};
  if (samples.size() > 1) {
    const auto pooled = tsls(panel, true, cfg.cluster_se && !panel.cluster.empty());
    j["pooled"] = tsls_json(pooled);
    table.rows.push_back({"pooled", std::to_string(panel.n()), "", csv::format_double(pooled.alpha(pooled.slope_index)),
                          csv::format_double(pooled.se(pooled.slope_index)),
                          csv::format_double(pooled.first_stage_coef), csv::format_double(pooled.first_stage_se),
                          pooled.se_kind, "", ""});
  }
  fs::create_directories(cfg.out);
  write_json(cfg.out / "compare_2sls.json", j);
  csv::write(cfg.out / "compare_2sls.csv", table);
  for (const auto& row : table.rows) std::cout << row[0] << ": AD=" << row[2] << " 2SLS=" << row[3] << "\n";
  return 0;
}

int cmd_simulate(const Overrides& o, const std::string& dgp, Eigen::Index n, long draws) {
  const std::uint64_t seed = o.seed.value_or(1);
  const fs::path out = o.out.value_or("simulated");
  auto spec = DgpSpec::canonical(dgp_from_name(dgp), n, seed);
  const auto sim = generate(spec);
  fs::create_directories(out);

  write_panel(sim.panel, out / "panel.csv");
  // sector shares ride along as extra panel columns
  auto table = csv::read(out / "panel.csv");
  table.header.push_back("sec_1");
  table.header.push_back("sec_2");
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (Eigen::Index j = 0; j < 2; ++j) {
      table.rows[r].push_back(csv::format_double(sim.sectors.shares(static_cast<Eigen::Index>(r), j)));
    }
  }
  csv::write(out / "panel.csv", table);

  csv::Table sectors;
  sectors.header = {"sector", "m_t", "m_tm1", "l_t"};
  for (Eigen::Index j = 0; j < sim.sectors.J(); ++j) {
    sectors.rows.push_back({"s" + std::to_string(j + 1), csv::format_double(sim.sectors.m_t(j)),
                            csv::format_double(sim.sectors.m_tm1(j)), csv::format_double(sim.sectors.l_t(j))});
  }
  csv::write(out / "sectors.csv", sectors);

  const auto phi = PolicySet::default_ladder();
  const auto grid = EvalGrid::percentile(sim.panel.x);
  auto oracle = oracle_json(oracle_targets(spec, grid, phi, 1.19, draws, seed + 1));
  oracle["dgp"] = spec.to_json();
  oracle["shift_effect"] = {{"delta", 1.0}, {"gamma", true_shift_effect(spec, 1.0)}};
  if (spec.J == 1 && spec.p == 0) oracle["tsls_decomposition"] = decomposition_json(oracle_tsls_decomposition(spec, draws));
  oracle["provenance"] = provenance_json(fnv1a_hex(spec.to_json().dump()), seed);
  write_json(out / "oracle.json", oracle);

  // ready-to-run estimation config for the simulated data
  nlohmann::json cfg = {{"data", {{"panel", "panel.csv"}, {"sectors", "sectors.csv"}}},
                        {"columns", {{"y", "y"}, {"x", "x"}, {"z", "z"}, {"id", "id"}, {"shares_prefix", "w_"},
                                     {"covariates", sim.panel.covariate_names}}},
                        {"sector_columns", {{"shares_prefix", "sec_"}}},
                        {"seed", seed},
                        {"out", "results"}};
  write_json(out / "config.json", cfg);
  std::cout << dgp << ": n=" << n << " written to " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear shift-share estimation with a control-function first stage"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--threads", o.threads, "Worker threads (0 = hardware)");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--eps", o.eps, "Quantile mesh trimming");
  app.add_option("--m1", o.m1, "Number of quantile levels");
  app.add_option("--bootstrap", o.bootstrap, "Bootstrap replicates B");
  app.add_option("--alpha", o.alpha, "Band level is 1 - alpha");

  auto* est = app.add_subcommand("estimate", "Point estimates of ASF, LAR, AD and policy effects");
  auto* boot = app.add_subcommand("bootstrap", "Point estimates with uniform bootstrap bands");
  auto* pol = app.add_subcommand("policy", "Tariff ladder or custom policy effects");
  auto* cmp = app.add_subcommand("compare-2sls", "Linear 2SLS benchmarks and first-stage effects");
  auto* sim = app.add_subcommand("simulate", "Draw a synthetic panel with oracle values");
  std::string dgp = "linear_gaussian";
  Eigen::Index n = 5000;
  long draws = 1000000;
  sim->add_option("--dgp", dgp, "linear_gaussian, heteroskedastic_qr, quadratic or sign_flip_first_stage");
  sim->add_option("--n", n, "Number of regions")->check(CLI::PositiveNumber);
  sim->add_option("--draws", draws, "Monte Carlo draws for the oracle")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*est) return cmd_estimate(o);
    if (*boot) return cmd_bootstrap(o);
    if (*pol) return cmd_policy(o);
    if (*cmp) return cmd_compare(o);
    if (*sim) return cmd_simulate(o, dgp, n, draws);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_input_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
