#include "shiftshare/control_function.hpp"

#include <cmath>
#include <string>

#include "shiftshare/basis.hpp"
#include "shiftshare/csv.hpp"
#include "shiftshare/errors.hpp"

namespace shiftshare {

std::vector<double> uniform_mesh(double eps, int m1) {
  if (!(eps > 0.0 && eps < 0.5)) throw Error(Errc::InvalidConfig, "eps must lie in (0, 0.5)");
  if (m1 < 2) throw Error(Errc::InvalidConfig, "m1 must be at least 2");
  std::vector<double> mesh(static_cast<std::size_t>(m1));
  const double h = (1.0 - 2.0 * eps) / (m1 - 1);
  for (int m = 0; m < m1; ++m) mesh[static_cast<std::size_t>(m)] = eps + m * h;
  mesh.back() = 1.0 - eps;
  return mesh;
}

std::vector<double> GridOptions::mesh() const {
  if (levels.empty()) return uniform_mesh(eps, m1);
  if (levels.size() < 2) throw Error(Errc::InvalidConfig, "levels: need at least two mesh points");
  if (std::abs(levels.front() - eps) > 1e-12 || std::abs(levels.back() - (1.0 - eps)) > 1e-12) {
    throw Error(Errc::InvalidConfig, "levels: mesh must run from eps to 1 - eps");
  }
  for (std::size_t m = 1; m < levels.size(); ++m) {
    if (!(levels[m] > levels[m - 1])) throw Error(Errc::InvalidConfig, "levels: mesh must be strictly increasing");
  }
  return levels;
}

Eigen::MatrixXd QuantileFitGrid::coefficients() const {
  if (fits.empty()) return {};
  Eigen::MatrixXd c(fits.front().coef.size(), static_cast<Eigen::Index>(fits.size()));
  for (std::size_t m = 0; m < fits.size(); ++m) c.col(static_cast<Eigen::Index>(m)) = fits[m].coef;
  return c;
}

std::vector<double> QuantileFitGrid::weights() const {
  const auto m1 = levels.size();
  std::vector<double> w(m1, 0.0);
  for (std::size_t m = 0; m + 1 < m1; ++m) {
    const double half = 0.5 * (levels[m + 1] - levels[m]);
    w[m] += half;
    w[m + 1] += half;
  }
  return w;
}

std::uint64_t design_fingerprint(const Eigen::Ref<const Eigen::MatrixXd>& design) {
  std::uint64_t h = 14695981039346656037ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < len; ++k) {
      h ^= p[k];
      h *= 1099511628211ULL;
    }
  };
  const std::int64_t dims[2] = {design.rows(), design.cols()};
  mix(dims, sizeof dims);
  for (Eigen::Index c = 0; c < design.cols(); ++c) {
    for (Eigen::Index r = 0; r < design.rows(); ++r) {
      const double v = design(r, c);
      mix(&v, sizeof v);
    }
  }
  return h;
}

QuantileFitGrid fit_grid(const Eigen::Ref<const Eigen::MatrixXd>& k1, const Eigen::Ref<const Eigen::VectorXd>& x,
                         const GridOptions& opts, std::span<const double> weights, const QuantileFitGrid* warm,
                         const std::vector<Eigen::Index>* drop) {
  QuantileFitGrid grid;
  grid.eps = opts.eps;
  grid.levels = opts.mesh();
  grid.design_hash = design_fingerprint(k1);
  if (warm && warm->levels.size() != grid.levels.size()) warm = nullptr;

  if (drop) {
    grid.dropped = *drop;
  } else if (weights.empty()) {
    grid.dropped = dependent_columns(k1);
  } else {
    Eigen::MatrixXd active(k1.rows(), k1.cols());
    Eigen::Index m = 0;
    for (Eigen::Index i = 0; i < k1.rows(); ++i) {
      if (weights[static_cast<std::size_t>(i)] > 0.0) active.row(m++) = k1.row(i);
    }
    grid.dropped = dependent_columns(active.topRows(m));
  }

  grid.fits.reserve(grid.levels.size());
  for (std::size_t m = 0; m < grid.levels.size(); ++m) {
    // Adjacent levels share most of their vertex, so after the first level the
    // chain beats restarting from the reference fit at the same level.
    const QrFit* seed = nullptr;
    if (m > 0) {
      seed = &grid.fits.back();
    } else if (warm) {
      seed = &warm->fits.front();
    }
    try {
      grid.fits.push_back(fit_quantile(k1, x, grid.levels[m], opts.solver, weights, seed, &grid.dropped));
    } catch (const Error& e) {
      throw Error(e.code(), "quantile level " + csv::format_double(grid.levels[m]) + ": " + e.what());
    }
  }
  return grid;
}

namespace {

// Rows on a level's basis interpolate exactly, so rounding alone must not move them across.
bool at_or_below(double q, double x) { return q <= x + 1e-10 * (1.0 + std::abs(x)); }

}  // namespace

double estimate_cdf(const QuantileFitGrid& grid, const Eigen::Ref<const Eigen::RowVectorXd>& k1_row, double x) {
  const auto w = grid.weights();
  double v = grid.eps;
  for (std::size_t m = 0; m < grid.fits.size(); ++m) {
    if (at_or_below(k1_row.dot(grid.fits[m].coef), x)) v += w[m];
  }
  return std::min(std::max(v, grid.eps), 1.0 - grid.eps);
}

Eigen::VectorXd control_values(const QuantileFitGrid& grid, const Eigen::Ref<const Eigen::MatrixXd>& k1,
                               const Eigen::Ref<const Eigen::VectorXd>& x) {
  const auto w = grid.weights();
  const Eigen::MatrixXd fitted = k1 * grid.coefficients();
  Eigen::VectorXd v(k1.rows());
  for (Eigen::Index i = 0; i < k1.rows(); ++i) {
    double acc = grid.eps;
    for (Eigen::Index m = 0; m < fitted.cols(); ++m) {
      if (at_or_below(fitted(i, m), x(i))) acc += w[static_cast<std::size_t>(m)];
    }
    v(i) = std::min(std::max(acc, grid.eps), 1.0 - grid.eps);
  }
  return v;
}

void write_grid_csv(const QuantileFitGrid& grid, const std::filesystem::path& path,
                    const std::vector<std::string>& column_names) {
  csv::Table t;
  t.header = {"level", "status", "objective"};
  const auto q = grid.fits.empty() ? 0 : grid.fits.front().coef.size();
  for (Eigen::Index c = 0; c < q; ++c) {
    t.header.push_back(static_cast<std::size_t>(c) < column_names.size() ? column_names[static_cast<std::size_t>(c)]
                                                                        : "k" + std::to_string(c));
  }
  for (const auto& f : grid.fits) {
    std::vector<std::string> row = {csv::format_double(f.v), status_name(f.status), csv::format_double(f.objective)};
    for (Eigen::Index c = 0; c < q; ++c) row.push_back(csv::format_double(f.coef(c)));
    t.rows.push_back(std::move(row));
  }
  csv::write(path, t);
}

}  // namespace shiftshare
