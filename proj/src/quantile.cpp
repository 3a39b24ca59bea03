#include "shiftshare/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "shiftshare/basis.hpp"
#include "shiftshare/errors.hpp"
#include "shiftshare/linalg.hpp"

namespace shiftshare {

SolverOptions SolverOptions::from_json(const nlohmann::json& j) {
  SolverOptions o;
  o.delta0 = j.value("delta0", o.delta0);
  o.delta_min = j.value("delta_min", o.delta_min);
  o.max_iter = j.value("max_iter", o.max_iter);
  o.tol = j.value("tol", o.tol);
  o.max_pivots = j.value("max_pivots", o.max_pivots);
  if (!(o.delta0 > 0.0) || !(o.delta_min > 0.0) || o.delta_min > o.delta0 || o.max_iter < 1 || !(o.tol > 0.0)) {
    throw Error(Errc::InvalidConfig, "solver options out of range");
  }
  return o;
}

nlohmann::json SolverOptions::to_json() const {
  return {{"delta0", delta0}, {"delta_min", delta_min}, {"max_iter", max_iter}, {"tol", tol}, {"max_pivots", max_pivots}};
}

const char* status_name(QrStatus s) {
  switch (s) {
    case QrStatus::Converged: return "converged";
    case QrStatus::MaxIter: return "max_iter";
    case QrStatus::Degenerate: return "degenerate";
  }
  return "unknown";
}

double check_loss(double v, std::span<const double> residuals, std::span<const double> weights) {
  double total = 0.0;
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    const double a = residuals[i];
    const double rho = (v - (a < 0.0 ? 1.0 : 0.0)) * a;
    total += weights.empty() ? rho : weights[i] * rho;
  }
  return total;
}

namespace {

// Problem restricted to rows with positive weight and to retained columns.
struct Problem {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd w;
  std::vector<Eigen::Index> rows;  // original row index of each active row
  double v;
  double scale;
};

double loss(const Problem& pb, const Eigen::VectorXd& r) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) total += pb.w(i) * (pb.v - (r(i) < 0.0 ? 1.0 : 0.0)) * r(i);
  return total;
}

double smoothed_loss(const Problem& pb, const Eigen::VectorXd& r, double delta) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double a = std::abs(r(i));
    const double h = a > delta ? a : 0.5 * (a * a / delta + delta);
    total += pb.w(i) * (0.5 * h + (pb.v - 0.5) * r(i));
  }
  return total;
}

// Majorize-minimize on the Huber-smoothed check function, δ shrinking by 10x per stage.
Eigen::VectorXd irls(const Problem& pb, const SolverOptions& opts, int& iterations) {
  const auto q = pb.x.cols();
  const Eigen::VectorXd xtw = pb.x.transpose() * pb.w;
  Eigen::MatrixXd xtax(q, q);
  Eigen::VectorXd rhs(q);

  // weighted least squares start
  Eigen::MatrixXd xw = pb.x.array().colwise() * pb.w.array();
  Eigen::VectorXd beta = (pb.x.transpose() * xw).ldlt().solve(xw.transpose() * pb.y);
  if (!beta.allFinite()) beta.setZero();

  int stages = 0;
  for (double d = opts.delta0; d >= opts.delta_min * (1.0 - 1e-12); d *= 0.1) ++stages;
  const int stage_cap = std::max(5, opts.max_iter / std::max(1, stages));

  iterations = 0;
  Eigen::VectorXd r = pb.y - pb.x * beta;
  for (double d = opts.delta0; d >= opts.delta_min * (1.0 - 1e-12) && iterations < opts.max_iter; d *= 0.1) {
    const double delta = d * pb.scale;
    double prev = smoothed_loss(pb, r, delta);
    for (int it = 0; it < stage_cap && iterations < opts.max_iter; ++it, ++iterations) {
      Eigen::VectorXd a(r.size());
      for (Eigen::Index i = 0; i < r.size(); ++i) a(i) = pb.w(i) / (2.0 * std::max(std::abs(r(i)), delta));
      xw = pb.x.array().colwise() * a.array();
      xtax.noalias() = pb.x.transpose() * xw;
      rhs.noalias() = xw.transpose() * pb.y;
      rhs += (pb.v - 0.5) * xtw;
      Eigen::VectorXd next = xtax.ldlt().solve(rhs);
      if (!next.allFinite()) break;
      beta = next;
      r = pb.y - pb.x * beta;
      const double cur = smoothed_loss(pb, r, delta);
      const bool done = std::abs(prev - cur) <= opts.tol * std::max(std::abs(prev), 1e-300);
      prev = cur;
      if (done) {
        ++iterations;
        break;
      }
    }
  }
  return beta;
}

// Picks q rows with the smallest |residual| whose design rows are linearly independent.
std::vector<Eigen::Index> initial_basis(const Problem& pb, const Eigen::VectorXd& r) {
  const auto m = pb.x.rows(), q = pb.x.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  auto closer = [&](Eigen::Index a, Eigen::Index b) {
    const double ra = std::abs(r(a)), rb = std::abs(r(b));
    return ra < rb || (ra == rb && a < b);
  };
  // usually the first few candidates suffice; sort everything only if they do not
  auto head = std::min<std::size_t>(order.size(), static_cast<std::size_t>(8 * q));
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(head), order.end(), closer);

  Eigen::MatrixXd basis_q(q, q);
  std::vector<Eigen::Index> chosen;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    if (pos == head) {
      std::sort(order.begin() + static_cast<std::ptrdiff_t>(head), order.end(), closer);
      head = order.size();
    }
    const auto i = order[pos];
    Eigen::VectorXd u = pb.x.row(i).transpose();
    const double norm0 = u.norm();
    if (norm0 == 0.0) continue;
    for (std::size_t k = 0; k < chosen.size(); ++k) {
      const auto col = basis_q.col(static_cast<Eigen::Index>(k));
      u -= col.dot(u) * col;
    }
    for (std::size_t k = 0; k < chosen.size(); ++k) {  // second pass for orthogonality
      const auto col = basis_q.col(static_cast<Eigen::Index>(k));
      u -= col.dot(u) * col;
    }
    const double nu = u.norm();
    if (nu > 1e-8 * norm0) {
      basis_q.col(static_cast<Eigen::Index>(chosen.size())) = u / nu;
      chosen.push_back(i);
      if (static_cast<Eigen::Index>(chosen.size()) == q) break;
    }
  }
  if (static_cast<Eigen::Index>(chosen.size()) < q) {
    throw Error(Errc::RankDeficient, "design has fewer independent weighted rows than columns");
  }
  return chosen;
}

// A previous vertex is reusable when its rows are still independent.
bool usable_basis(const Problem& pb, const std::vector<Eigen::Index>& basis) {
  const auto q = pb.x.cols();
  if (static_cast<Eigen::Index>(basis.size()) != q) return false;
  Eigen::MatrixXd b(q, q);
  for (Eigen::Index k = 0; k < q; ++k) b.row(k) = pb.x.row(basis[static_cast<std::size_t>(k)]);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
  lu.setThreshold(1e-10);
  return lu.rank() == q;
}

struct PolishResult {
  Eigen::VectorXd beta;
  std::vector<Eigen::Index> basis;
  int pivots = 0;
  bool optimal = false;
};

// Exact descent along LP edges from a vertex (simplex-style pivots on the
// primal, exact piecewise-linear line search along each edge).
PolishResult polish(const Problem& pb, const Eigen::VectorXd& start, int max_pivots,
                    const std::vector<Eigen::Index>* hint) {
  const auto m = pb.x.rows(), q = pb.x.cols();
  const double v = pb.v;
  PolishResult out;
  Eigen::VectorXd r = pb.y - pb.x * start;
  if (hint && usable_basis(pb, *hint)) {
    out.basis = *hint;
  } else {
    out.basis = initial_basis(pb, r);
  }

  std::vector<char> in_basis(static_cast<std::size_t>(m), 0);
  auto refactor = [&](Eigen::MatrixXd& binv, Eigen::VectorXd& beta) {
    Eigen::MatrixXd b(q, q);
    Eigen::VectorXd yb(q);
    for (Eigen::Index k = 0; k < q; ++k) {
      b.row(k) = pb.x.row(out.basis[static_cast<std::size_t>(k)]);
      yb(k) = pb.y(out.basis[static_cast<std::size_t>(k)]);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    binv = lu.inverse();
    beta = binv * yb;
  };
  for (auto i : out.basis) in_basis[static_cast<std::size_t>(i)] = 1;

  Eigen::MatrixXd binv;
  Eigen::VectorXd beta;
  refactor(binv, beta);

  const double wmax = pb.w.maxCoeff();
  const double dual_tol = 1e-9 * wmax;
  const double zero_tol = 1e-12 * pb.scale;
  bool last_degenerate = false;
  std::vector<std::pair<double, Eigen::Index>> breaks;
  breaks.reserve(static_cast<std::size_t>(m));
  Eigen::VectorXd g(q), a(m), wpsi(m);
  const auto later = [](const std::pair<double, Eigen::Index>& l, const std::pair<double, Eigen::Index>& h) {
    return l > h;
  };

  for (int step = 0;; ++step) {
    r.noalias() = pb.y - pb.x * beta;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (in_basis[static_cast<std::size_t>(i)] || std::abs(r(i)) <= zero_tol) r(i) = 0.0;
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      wpsi(i) = in_basis[static_cast<std::size_t>(i)] ? 0.0 : pb.w(i) * (r(i) >= 0.0 ? v : v - 1.0);
    }
    g.noalias() = pb.x.transpose() * wpsi;
    const Eigen::VectorXd z = binv.transpose() * g;

    // most violated dual bound: -w_k v <= z_k <= w_k (1 - v)
    Eigen::Index leave = -1;
    double sigma = 0.0, worst = dual_tol;
    for (Eigen::Index k = 0; k < q; ++k) {
      const double wk = pb.w(out.basis[static_cast<std::size_t>(k)]);
      const double up = z(k) - wk * (1.0 - v);
      const double dn = -wk * v - z(k);
      const double viol = std::max(up, dn);
      if (viol <= dual_tol) continue;
      if (last_degenerate) {  // Bland: smallest row index among violators
        if (leave < 0 || out.basis[static_cast<std::size_t>(k)] < out.basis[static_cast<std::size_t>(leave)]) {
          leave = k;
          sigma = up > dn ? 1.0 : -1.0;
        }
      } else if (viol > worst) {
        worst = viol;
        leave = k;
        sigma = up > dn ? 1.0 : -1.0;
      }
    }
    if (leave < 0) {
      out.optimal = true;
      break;
    }
    if (step >= max_pivots) break;

    const Eigen::VectorXd dir = sigma * binv.col(leave);
    a.noalias() = pb.x * dir;
    const auto kout = out.basis[static_cast<std::size_t>(leave)];
    double slope = sigma > 0 ? pb.w(kout) * (1.0 - v) : pb.w(kout) * v;
    breaks.clear();
    slope -= a.dot(wpsi);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (in_basis[static_cast<std::size_t>(i)]) continue;
      const double ai = a(i);
      if (ai == 0.0) continue;
      if (r(i) == 0.0) {
        if (ai > 0.0) breaks.emplace_back(0.0, i);
      } else {
        const double t = r(i) / ai;
        if (t > 0.0) breaks.emplace_back(t, i);
      }
    }
    // breakpoints in increasing order, popped from a heap until the slope turns
    std::make_heap(breaks.begin(), breaks.end(), later);
    Eigen::Index enter = -1;
    double tstar = 0.0;
    for (auto end = breaks.end(); end != breaks.begin(); --end) {
      std::pop_heap(breaks.begin(), end, later);
      const auto [t, i] = *(end - 1);
      slope += pb.w(i) * std::abs(a(i));
      if (slope >= -1e-14 * wmax) {
        enter = i;
        tstar = t;
        break;
      }
    }
    if (enter < 0) break;  // unbounded edge: numerically degenerate design

    beta += tstar * dir;
    last_degenerate = tstar == 0.0;
    // Sherman-Morrison row replacement: row `leave` of B becomes x_enter
    const Eigen::RowVectorXd delta_row = pb.x.row(enter) - pb.x.row(kout);
    const double denom = sigma * a(enter);
    const Eigen::VectorXd col = binv.col(leave);
    const Eigen::RowVectorXd proj = delta_row * binv;
    binv.noalias() -= (col * proj) / denom;
    in_basis[static_cast<std::size_t>(kout)] = 0;
    in_basis[static_cast<std::size_t>(enter)] = 1;
    out.basis[static_cast<std::size_t>(leave)] = enter;
    ++out.pivots;
    if (out.pivots % 32 == 0) refactor(binv, beta);
  }
  out.beta = beta;
  return out;
}

}  // namespace

QrFit fit_quantile(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& response,
                   double v, const SolverOptions& opts, std::span<const double> weights, const QrFit* warm,
                   const std::vector<Eigen::Index>* drop) {
  if (!(v > 0.0 && v < 1.0)) throw Error(Errc::InvalidConfig, "quantile level must lie in (0, 1)");
  const auto n = design.rows(), p = design.cols();
  if (response.size() != n) throw Error(Errc::InvalidPanel, "design and response row counts differ");
  if (!weights.empty()) {
    if (static_cast<Eigen::Index>(weights.size()) != n) throw Error(Errc::InvalidPanel, "weight length mismatch");
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw Error(Errc::InvalidConfig, "weights must be nonnegative");
      total += w;
    }
    if (!(total > 0.0)) throw Error(Errc::InvalidConfig, "weights must have a positive sum");
  }

  Problem pb;
  pb.v = v;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (weights.empty() || weights[static_cast<std::size_t>(i)] > 0.0) pb.rows.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(pb.rows.size());

  QrFit fit;
  fit.v = v;
  fit.coef = Eigen::VectorXd::Zero(p);
  if (drop) {
    fit.dropped = *drop;
  } else {
    Eigen::MatrixXd active(m, p);
    for (Eigen::Index k = 0; k < m; ++k) active.row(k) = design.row(pb.rows[static_cast<std::size_t>(k)]);
    fit.dropped = dependent_columns(active);
  }
  const auto keep = kept_columns(p, fit.dropped);
  const auto q = static_cast<Eigen::Index>(keep.size());

  pb.x.resize(m, q);
  pb.y.resize(m);
  pb.w.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto i = pb.rows[static_cast<std::size_t>(k)];
    for (Eigen::Index c = 0; c < q; ++c) pb.x(k, c) = design(i, keep[static_cast<std::size_t>(c)]);
    pb.y(k) = response(i);
    pb.w(k) = weights.empty() ? 1.0 : weights[static_cast<std::size_t>(i)];
  }
  const double wsum = pb.w.sum();
  const double ybar = pb.w.dot(pb.y) / wsum;
  pb.scale = pb.w.dot((pb.y.array() - ybar).abs().matrix()) / wsum;
  if (!(pb.scale > 0.0)) pb.scale = std::max(std::abs(ybar), 1.0);

  if (q == 0) {
    Eigen::VectorXd r = pb.y;
    fit.objective = loss(pb, r);
    fit.status = QrStatus::Converged;
    return fit;
  }
  if (m < q) throw Error(Errc::RankDeficient, "fewer weighted observations than retained columns");

  Eigen::VectorXd start(q);
  if (warm && warm->coef.size() == p) {
    for (Eigen::Index c = 0; c < q; ++c) start(c) = warm->coef(keep[static_cast<std::size_t>(c)]);
  } else {
    start = irls(pb, opts, fit.iterations);
  }
  const int cap = opts.max_pivots > 0 ? opts.max_pivots : static_cast<int>(20 * (m + q));
  // the warm fit's vertex, in active-row numbering
  std::vector<Eigen::Index> hint;
  if (warm && static_cast<Eigen::Index>(warm->basis.size()) == q) {
    for (auto b : warm->basis) {
      auto it = std::lower_bound(pb.rows.begin(), pb.rows.end(), b);
      if (it == pb.rows.end() || *it != b) {
        hint.clear();
        break;
      }
      hint.push_back(it - pb.rows.begin());
    }
  }
  auto pol = polish(pb, start, cap, hint.empty() ? nullptr : &hint);
  if (!pol.beta.allFinite()) throw Error(Errc::NoConvergence, "quantile fit produced non-finite coefficients");

  for (Eigen::Index c = 0; c < q; ++c) fit.coef(keep[static_cast<std::size_t>(c)]) = pol.beta(c);
  fit.pivots = pol.pivots;
  fit.status = pol.optimal ? QrStatus::Converged : QrStatus::MaxIter;
  for (auto b : pol.basis) fit.basis.push_back(pb.rows[static_cast<std::size_t>(b)]);
  std::sort(fit.basis.begin(), fit.basis.end());
  Eigen::VectorXd r = pb.y - pb.x * pol.beta;
  fit.objective = loss(pb, r);
  return fit;
}

double subgradient_violation(const Eigen::Ref<const Eigen::MatrixXd>& design,
                             const Eigen::Ref<const Eigen::VectorXd>& response, double v,
                             const Eigen::Ref<const Eigen::VectorXd>& coef, std::span<const double> weights,
                             double zero_tol) {
  const Eigen::VectorXd r = response - design * coef;
  double worst = 0.0;
  for (Eigen::Index c = 0; c < design.cols(); ++c) {
    double free_part = 0.0, band = 0.0, scale = 0.0;
    for (Eigen::Index i = 0; i < design.rows(); ++i) {
      const double w = weights.empty() ? 1.0 : weights[static_cast<std::size_t>(i)];
      const double xi = design(i, c);
      scale += w * std::abs(xi);
      if (std::abs(r(i)) <= zero_tol) {
        band += w * std::max(v, 1.0 - v) * std::abs(xi);
      } else {
        free_part += w * (r(i) > 0.0 ? v : v - 1.0) * xi;
      }
    }
    if (scale > 0.0) worst = std::max(worst, (std::abs(free_part) - band) / scale);
  }
  return std::max(worst, 0.0);
}

}  // namespace shiftshare
