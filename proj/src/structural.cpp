#include "shiftshare/structural.hpp"

#include <algorithm>

#include "shiftshare/csv.hpp"
#include "shiftshare/errors.hpp"
#include "shiftshare/linalg.hpp"

namespace shiftshare {

namespace {

const K2Basis& require_basis(const StructuralFit& fit) {
  if (!fit.basis) throw Error(Errc::InvalidConfig, "structural fit has no basis");
  return *fit.basis;
}

}  // namespace

StructuralFit fit_structural(const PanelDataset& panel, const Eigen::Ref<const Eigen::VectorXd>& v_hat,
                             const K2Spec& spec, std::span<const double> weights, const K2Basis* fixed_basis,
                             const std::vector<Eigen::Index>* drop) {
  if (v_hat.size() != panel.n()) throw Error(Errc::InvalidPanel, "control values do not match the panel");
  StructuralFit fit;
  fit.spec = spec;
  const TensorBasis tb = fixed_basis ? evaluate_k2(*fixed_basis, panel.x, panel.d, v_hat)
                                     : build_k2(panel.x, panel.d, v_hat, spec);
  fit.basis = tb.k2;

  if (drop) {
    LsFit own = least_squares(tb.columns, panel.y, weights);
    auto a = own.dropped, b = *drop;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    fit.pivot_mismatch = a != b;
    if (!fit.pivot_mismatch) {
      fit.pi2 = std::move(own.coef);
      fit.dropped = *drop;
      fit.residual_ss = own.rss;
      return fit;
    }
  }
  // a forced set must hold exactly: no extra pivoting beyond it
  LsFit ls = least_squares(tb.columns, panel.y, weights, drop ? *drop : std::vector<Eigen::Index>{},
                           drop ? 0.0 : 1e-10);
  fit.pi2 = std::move(ls.coef);
  fit.dropped = drop ? *drop : ls.dropped;
  fit.residual_ss = ls.rss;
  if (!fit.pi2.allFinite()) throw Error(Errc::RankDeficient, "structural coefficients are not finite");
  return fit;
}

double m_hat(const StructuralFit& fit, double x, const Eigen::Ref<const Eigen::RowVectorXd>& d, double v) {
  return require_basis(fit).row(x, d, v).dot(fit.pi2);
}

double m_x_hat(const StructuralFit& fit, double x, const Eigen::Ref<const Eigen::RowVectorXd>& d, double v) {
  return require_basis(fit).d_dx_row(x, d, v).dot(fit.pi2);
}

Eigen::VectorXd m_hat(const StructuralFit& fit, const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::MatrixXd>& d, const Eigen::Ref<const Eigen::VectorXd>& v) {
  return require_basis(fit).design(x, d, v) * fit.pi2;
}

Eigen::VectorXd m_x_hat(const StructuralFit& fit, const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::MatrixXd>& d, const Eigen::Ref<const Eigen::VectorXd>& v) {
  return require_basis(fit).d_dx_design(x, d, v) * fit.pi2;
}

void write_coefficients_csv(const StructuralFit& fit, const std::filesystem::path& path) {
  const auto& basis = require_basis(fit);
  const auto info = basis.structure();
  csv::Table t;
  t.header = {"column", "factor", "qx_index", "qv_index", "coefficient", "dropped"};
  for (std::size_t c = 0; c < info.size(); ++c) {
    const bool tensor = info[c].factor == Factor::Tensor;
    const bool dropped =
        std::find(fit.dropped.begin(), fit.dropped.end(), static_cast<Eigen::Index>(c)) != fit.dropped.end();
    t.rows.push_back({std::to_string(c), tensor ? "tensor" : "covariate",
                      std::to_string(info[c].first), tensor ? std::to_string(info[c].second) : "",
                      csv::format_double(fit.pi2(static_cast<Eigen::Index>(c))), dropped ? "1" : "0"});
  }
  csv::write(path, t);
}

}  // namespace shiftshare
