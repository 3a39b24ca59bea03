#include "shiftshare/inference.hpp"

#include <algorithm>
#include <cmath>

#include "shiftshare/errors.hpp"
#include "shiftshare/parallel.hpp"
#include "shiftshare/stats.hpp"

namespace shiftshare {

std::vector<double> bootstrap_weights(std::uint64_t seed, int r, Eigen::Index n) {
  stats::Rng rng(seed, static_cast<std::uint64_t>(r));
  std::vector<double> w(static_cast<std::size_t>(n));
  for (auto& e : w) e = rng.exponential();
  return w;
}

BootstrapRun run_bootstrap(const PanelDataset& panel, const PipelineConfig& config, const PolicySet& policy,
                           const Estimation& point, const BootstrapOptions& opts) {
  if (opts.b < 1) throw Error(Errc::InvalidConfig, "bootstrap: B must be at least 1");
  const auto b = static_cast<std::size_t>(opts.b);
  std::vector<std::optional<EstimateSet>> slots(b);
  std::vector<std::string> errors(b);
  std::vector<char> mismatch(b, 0);

  parallel_for(b, opts.threads, [&](std::size_t r) {
    const auto w = opts.unit_weights ? std::vector<double>(static_cast<std::size_t>(panel.n()), 1.0)
                                     : bootstrap_weights(opts.seed, static_cast<int>(r), panel.n());
    try {
      auto rep = run_algorithm1(panel, config, policy, w, &point);
      mismatch[r] = rep.fit.pivot_mismatch ? 1 : 0;
      if (!rep.estimates.asf.allFinite() || !rep.estimates.lar.allFinite() || !std::isfinite(rep.estimates.ad) ||
          !rep.estimates.pe.allFinite()) {
        errors[r] = "non-finite estimates";
        return;
      }
      slots[r] = std::move(rep.estimates);
    } catch (const std::exception& e) {
      errors[r] = e.what();
    }
  });

  BootstrapRun run;
  run.b = opts.b;
  run.seed = opts.seed;
  for (std::size_t r = 0; r < b; ++r) {
    if (mismatch[r]) run.pivot_mismatch.push_back(static_cast<int>(r));
    if (slots[r]) {
      run.draws.push_back(std::move(*slots[r]));
      run.replicate.push_back(static_cast<int>(r));
    } else {
      run.failures.push_back({static_cast<int>(r), errors[r]});
    }
  }
  run.flagged = run.draws.size() < 0.9 * static_cast<double>(b);
  if (run.flagged) {
    throw Error(Errc::BootstrapFailed, std::to_string(run.failures.size()) + " of " + std::to_string(b) +
                                           " replicates failed" +
                                           (run.failures.empty() ? "" : "; first: " + run.failures.front().message));
  }
  return run;
}

double se_iqr(std::vector<double> draws) {
  if (draws.size() < 4) throw Error(Errc::TooFewDraws, "need at least four bootstrap draws");
  std::sort(draws.begin(), draws.end());
  return (stats::quantile_sorted(draws, 0.75) - stats::quantile_sorted(draws, 0.25)) / 1.349;
}

Band uniform_band(const std::string& target, const std::vector<Eigen::VectorXd>& draws,
                  const Eigen::Ref<const Eigen::VectorXd>& point, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::InvalidConfig, "alpha must lie in (0, 1)");
  Band band;
  band.target = target;
  band.point = point;
  const auto g = point.size();
  band.se.resize(g);
  band.lower = point;
  band.upper = point;
  if (g == 0) return band;

  std::vector<double> column(draws.size());
  for (Eigen::Index j = 0; j < g; ++j) {
    for (std::size_t b = 0; b < draws.size(); ++b) {
      if (draws[b].size() != g) throw Error(Errc::InvalidPanel, target + ": bootstrap draw is not conformable");
      column[b] = draws[b](j);
    }
    band.se(j) = se_iqr(column);
    if (!(band.se(j) > 0.0)) band.excluded.push_back(j);
  }
  if (static_cast<Eigen::Index>(band.excluded.size()) == g) {
    throw Error(Errc::DegenerateSE, target + ": standard error is zero at every grid point");
  }

  std::vector<double> sups(draws.size(), 0.0);
  for (std::size_t b = 0; b < draws.size(); ++b) {
    double sup = 0.0;
    for (Eigen::Index j = 0; j < g; ++j) {
      if (band.se(j) > 0.0) sup = std::max(sup, std::abs(draws[b](j) - point(j)) / band.se(j));
    }
    sups[b] = sup;
  }
  band.k_alpha = stats::quantile(sups, 1.0 - alpha);
  band.lower = point - band.k_alpha * band.se;
  band.upper = point + band.k_alpha * band.se;
  return band;
}

BootstrapBands uniform_bands(const BootstrapRun& run, const EstimateSet& point, double alpha) {
  std::vector<Eigen::VectorXd> asf, lar, ad, pe;
  for (const auto& d : run.draws) {
    asf.push_back(d.asf);
    lar.push_back(d.lar);
    ad.push_back(Eigen::VectorXd::Constant(1, d.ad));
    pe.push_back(d.pe);
  }
  BootstrapBands bands;
  bands.alpha = alpha;
  bands.asf = uniform_band("asf", asf, point.asf, alpha);
  bands.lar = uniform_band("lar", lar, point.lar, alpha);
  bands.ad = uniform_band("ad", ad, Eigen::VectorXd::Constant(1, point.ad), alpha);
  bands.pe = uniform_band("pe", pe, point.pe, alpha);
  return bands;
}

}  // namespace shiftshare
