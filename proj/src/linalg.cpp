#include "shiftshare/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "shiftshare/errors.hpp"

namespace shiftshare {

Eigen::MatrixXd select_columns(const Eigen::Ref<const Eigen::MatrixXd>& m, const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.col(cols[k]);
  return out;
}

std::vector<Eigen::Index> kept_columns(Eigen::Index n, const std::vector<Eigen::Index>& drop) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index c = 0; c < n; ++c) {
    if (std::find(drop.begin(), drop.end(), c) == drop.end()) keep.push_back(c);
  }
  return keep;
}

LsFit least_squares(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& response,
                    std::span<const double> weights, const std::vector<Eigen::Index>& forced_drop, double threshold) {
  const auto n = design.rows();
  if (response.size() != n) throw Error(Errc::InvalidPanel, "least squares: row count mismatch");
  if (!weights.empty() && static_cast<Eigen::Index>(weights.size()) != n) {
    throw Error(Errc::InvalidPanel, "least squares: weight length mismatch");
  }
  const auto keep = kept_columns(design.cols(), forced_drop);
  Eigen::MatrixXd a = select_columns(design, keep);
  Eigen::VectorXd b = response;
  if (!weights.empty()) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = std::sqrt(weights[static_cast<std::size_t>(i)]);
      a.row(i) *= s;
      b(i) *= s;
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(threshold);
  const Eigen::VectorXd sub = qr.solve(b);

  LsFit fit;
  fit.coef = Eigen::VectorXd::Zero(design.cols());
  fit.dropped = forced_drop;
  const auto& perm = qr.colsPermutation().indices();
  std::vector<bool> live(keep.size(), false);
  for (Eigen::Index k = 0; k < qr.rank(); ++k) live[static_cast<std::size_t>(perm(k))] = true;
  for (Eigen::Index k = qr.rank(); k < static_cast<Eigen::Index>(keep.size()); ++k) {
    fit.dropped.push_back(keep[static_cast<std::size_t>(perm(k))]);
  }
  for (std::size_t k = 0; k < keep.size(); ++k) {
    if (live[k]) fit.coef(keep[k]) = sub(static_cast<Eigen::Index>(k));
  }
  fit.rss = (b - a * sub).squaredNorm();
  return fit;
}

}  // namespace shiftshare
