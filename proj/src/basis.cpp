#include "shiftshare/basis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shiftshare/errors.hpp"
#include "shiftshare/stats.hpp"

namespace shiftshare {

void SplineSpec::validate() const {
  if (degree < 1 || degree > 3) throw Error(Errc::InvalidConfig, "spline degree must be 1, 2 or 3");
  if (n_knots < 0) throw Error(Errc::InvalidConfig, "spline knot count must be nonnegative");
}

SplineSpec SplineSpec::from_json(const nlohmann::json& j) {
  SplineSpec s;
  s.degree = j.value("degree", s.degree);
  s.n_knots = j.value("knots", s.n_knots);
  const auto rule = j.value("rule", std::string("quantile"));
  if (rule == "quantile") {
    s.rule = KnotRule::Quantile;
  } else if (rule == "uniform") {
    s.rule = KnotRule::Uniform;
  } else {
    throw Error(Errc::InvalidConfig, "unknown knot rule '" + rule + "'");
  }
  s.include_intercept = j.value("intercept", false);
  s.validate();
  return s;
}

nlohmann::json SplineSpec::to_json() const {
  return {{"degree", degree},
          {"knots", n_knots},
          {"rule", rule == KnotRule::Quantile ? "quantile" : "uniform"},
          {"intercept", include_intercept}};
}

BSpline::BSpline(SplineSpec spec, std::vector<double> interior_knots, double lo, double hi)
    : spec_(spec), interior_(std::move(interior_knots)), lo_(lo), hi_(hi) {
  spec_.validate();
  if (static_cast<int>(interior_.size()) != spec_.n_knots) {
    throw Error(Errc::InvalidConfig, "interior knot count does not match spline spec");
  }
  if (!(lo_ < hi_)) throw Error(Errc::DegenerateKnots, "empty spline boundary interval");
  double prev = lo_;
  for (double k : interior_) {
    if (!(k > prev)) throw Error(Errc::DegenerateKnots, "knots are not strictly increasing");
    prev = k;
  }
  if (!(hi_ > prev)) throw Error(Errc::DegenerateKnots, "last interior knot reaches the upper boundary");
  knots_.assign(static_cast<std::size_t>(spec_.degree + 1), lo_);
  knots_.insert(knots_.end(), interior_.begin(), interior_.end());
  knots_.insert(knots_.end(), static_cast<std::size_t>(spec_.degree + 1), hi_);
}

BSpline BSpline::place(const SplineSpec& spec, std::span<const double> sample) {
  spec.validate();
  if (sample.empty()) throw Error(Errc::DegenerateKnots, "no data to place knots on");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front(), hi = sorted.back();
  std::vector<double> interior;
  for (int k = 1; k <= spec.n_knots; ++k) {
    const double prob = static_cast<double>(k) / (spec.n_knots + 1);
    interior.push_back(spec.rule == KnotRule::Quantile ? stats::quantile_sorted(sorted, prob)
                                                       : lo + prob * (hi - lo));
  }
  return BSpline(spec, std::move(interior), lo, hi);
}

int BSpline::find_span(double t) const {
  const int last = n_splines() - 1;
  if (t >= knots_[static_cast<std::size_t>(last + 1)]) return last;
  // largest s in [degree, last] with knots[s] <= t
  auto it = std::upper_bound(knots_.begin() + spec_.degree, knots_.begin() + last + 1, t);
  return static_cast<int>(it - knots_.begin()) - 1;
}

void BSpline::basis_funs(int span, double t, int degree, double* out) const {
  double left[4], right[4];
  out[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = t - knots_[static_cast<std::size_t>(span + 1 - j)];
    right[j] = knots_[static_cast<std::size_t>(span + j)] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = out[r] / (right[r + 1] + left[j - r]);
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
}

void BSpline::eval_inside(double t, double* value, double* slope) const {
  const int k = spec_.degree;
  const int ns = n_splines();
  const int span = find_span(t);
  if (value) {
    std::fill(value, value + ns, 0.0);
    double n[4];
    basis_funs(span, t, k, n);
    for (int r = 0; r <= k; ++r) value[span - k + r] = n[r];
  }
  if (slope) {
    std::fill(slope, slope + ns, 0.0);
    double lower[4];
    basis_funs(span, t, k - 1, lower);  // N_{span-k+1+r, k-1}, r = 0..k-1
    for (int r = 0; r <= k; ++r) {
      const int i = span - k + r;
      const auto ui = static_cast<std::size_t>(i);
      double dv = 0.0;
      if (r >= 1) {
        const double den = knots_[ui + k] - knots_[ui];
        if (den > 0.0) dv += k / den * lower[r - 1];
      }
      if (r <= k - 1) {
        const double den = knots_[ui + k + 1] - knots_[ui + 1];
        if (den > 0.0) dv -= k / den * lower[r];
      }
      slope[i] = dv;
    }
  }
}

void BSpline::eval(double t, std::span<double> out) const {
  const int off = spec_.include_intercept ? 1 : 0;
  if (off) out[0] = 1.0;
  double* value = out.data() + off;
  if (t >= lo_ && t <= hi_) {
    eval_inside(t, value, nullptr);
    return;
  }
  const double edge = t < lo_ ? lo_ : hi_;
  std::vector<double> slope(static_cast<std::size_t>(n_splines()));
  eval_inside(edge, value, slope.data());
  for (int i = 0; i < n_splines(); ++i) value[i] += (t - edge) * slope[static_cast<std::size_t>(i)];
}

void BSpline::deriv(double t, std::span<double> out) const {
  const int off = spec_.include_intercept ? 1 : 0;
  if (off) out[0] = 0.0;
  eval_inside(std::clamp(t, lo_, hi_), nullptr, out.data() + off);
}

Eigen::RowVectorXd BSpline::row(double t) const {
  Eigen::RowVectorXd r(dim());
  eval(t, {r.data(), static_cast<std::size_t>(r.size())});
  return r;
}

Eigen::RowVectorXd BSpline::drow(double t) const {
  Eigen::RowVectorXd r(dim());
  deriv(t, {r.data(), static_cast<std::size_t>(r.size())});
  return r;
}

Eigen::MatrixXd BSpline::design(const Eigen::Ref<const Eigen::VectorXd>& t) const {
  Eigen::MatrixXd m(t.size(), dim());
  for (Eigen::Index i = 0; i < t.size(); ++i) m.row(i) = row(t(i));
  return m;
}

Eigen::MatrixXd BSpline::ddesign(const Eigen::Ref<const Eigen::VectorXd>& t) const {
  Eigen::MatrixXd m(t.size(), dim());
  for (Eigen::Index i = 0; i < t.size(); ++i) m.row(i) = drow(t(i));
  return m;
}

// ---------------------------------------------------------------------------

K2Basis::K2Basis(BSpline qx, BSpline qv, Eigen::Index n_covariates)
    : qx_(std::move(qx)), qv_(std::move(qv)), p_(n_covariates) {}

Eigen::RowVectorXd K2Basis::row(double x, const Eigen::Ref<const Eigen::RowVectorXd>& d, double v) const {
  const Eigen::RowVectorXd bx = qx_.row(x), bv = qv_.row(v);
  Eigen::RowVectorXd out(dim());
  const auto nv = bv.size();
  for (Eigen::Index a = 0; a < bx.size(); ++a) out.segment(a * nv, nv) = bx(a) * bv;
  out.tail(p_) = d;
  return out;
}

Eigen::RowVectorXd K2Basis::d_dx_row(double x, const Eigen::Ref<const Eigen::RowVectorXd>&, double v) const {
  const Eigen::RowVectorXd dbx = qx_.drow(x), bv = qv_.row(v);
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(dim());
  const auto nv = bv.size();
  for (Eigen::Index a = 0; a < dbx.size(); ++a) out.segment(a * nv, nv) = dbx(a) * bv;
  return out;
}

Eigen::MatrixXd K2Basis::design(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& d,
                                const Eigen::Ref<const Eigen::VectorXd>& v) const {
  Eigen::MatrixXd m(x.size(), dim());
  for (Eigen::Index i = 0; i < x.size(); ++i) m.row(i) = row(x(i), d.row(i), v(i));
  return m;
}

Eigen::MatrixXd K2Basis::d_dx_design(const Eigen::Ref<const Eigen::VectorXd>& x,
                                     const Eigen::Ref<const Eigen::MatrixXd>& d,
                                     const Eigen::Ref<const Eigen::VectorXd>& v) const {
  Eigen::MatrixXd m(x.size(), dim());
  for (Eigen::Index i = 0; i < x.size(); ++i) m.row(i) = d_dx_row(x(i), d.row(i), v(i));
  return m;
}

std::vector<ColumnInfo> K2Basis::structure() const {
  std::vector<ColumnInfo> s;
  for (int a = 0; a < qx_.dim(); ++a) {
    for (int b = 0; b < qv_.dim(); ++b) s.push_back({Factor::Tensor, a, b, true});
  }
  for (Eigen::Index k = 0; k < p_; ++k) s.push_back({Factor::Covariate, static_cast<int>(k), -1, false});
  return s;
}

// ---------------------------------------------------------------------------

K1Spec K1Spec::from_json(const nlohmann::json& j) {
  K1Spec s;
  const auto kind = j.value("kind", std::string("linear"));
  if (kind == "linear") {
    s.kind = K1Kind::Linear;
  } else if (kind == "spline") {
    s.kind = K1Kind::Spline;
    s.spline = SplineSpec::from_json(j.value("spline", nlohmann::json::object()));
  } else {
    throw Error(Errc::InvalidConfig, "unknown K1 kind '" + kind + "'");
  }
  return s;
}

nlohmann::json K1Spec::to_json() const {
  nlohmann::json j = {{"kind", kind == K1Kind::Linear ? "linear" : "spline"}};
  if (kind == K1Kind::Spline) j["spline"] = spline.to_json();
  return j;
}

K2Spec K2Spec::from_json(const nlohmann::json& j) {
  K2Spec s;
  if (j.contains("q_x")) s.qx = SplineSpec::from_json(j.at("q_x"));
  if (j.contains("q_v")) s.qv = SplineSpec::from_json(j.at("q_v"));
  return s;
}

nlohmann::json K2Spec::to_json() const { return {{"q_x", qx.to_json()}, {"q_v", qv.to_json()}}; }

std::vector<Eigen::Index> dependent_columns(const Eigen::Ref<const Eigen::MatrixXd>& design, double threshold) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(threshold);
  std::vector<Eigen::Index> out;
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index k = qr.rank(); k < design.cols(); ++k) out.push_back(perm(k));
  std::sort(out.begin(), out.end());
  return out;
}

TensorBasis build_k1(const PanelDataset& panel, const K1Spec& spec) {
  TensorBasis tb;
  const auto n = panel.n(), J = panel.J(), p = panel.p();
  if (spec.kind == K1Kind::Linear) {
    tb.columns.resize(n, 1 + J + p);
    tb.columns.col(0).setOnes();
    tb.columns.middleCols(1, J) = panel.w;
    tb.columns.rightCols(p) = panel.d;
    tb.structure.push_back({Factor::Intercept});
    for (Eigen::Index j = 0; j < J; ++j) tb.structure.push_back({Factor::Share, static_cast<int>(j)});
    for (Eigen::Index k = 0; k < p; ++k) tb.structure.push_back({Factor::Covariate, static_cast<int>(k)});
  } else {
    // additive splines with one global intercept: drop each block's first basis function
    SplineSpec s = spec.spline;
    s.include_intercept = false;
    std::vector<Eigen::MatrixXd> blocks;
    tb.structure.push_back({Factor::Intercept});
    auto add = [&](const Eigen::VectorXd& col, Factor f, int idx) {
      auto spline = BSpline::place(s, {col.data(), static_cast<std::size_t>(col.size())});
      tb.boundary.emplace_back(spline.lo(), spline.hi());
      Eigen::MatrixXd b = spline.design(col);
      blocks.push_back(b.rightCols(b.cols() - 1));
      for (Eigen::Index c = 1; c < b.cols(); ++c) tb.structure.push_back({f, idx, static_cast<int>(c)});
    };
    for (Eigen::Index j = 0; j < J; ++j) add(panel.w.col(j), Factor::Share, static_cast<int>(j));
    for (Eigen::Index k = 0; k < p; ++k) add(panel.d.col(k), Factor::Covariate, static_cast<int>(k));
    Eigen::Index cols = 1;
    for (const auto& b : blocks) cols += b.cols();
    tb.columns.resize(n, cols);
    tb.columns.col(0).setOnes();
    Eigen::Index at = 1;
    for (const auto& b : blocks) {
      tb.columns.middleCols(at, b.cols()) = b;
      at += b.cols();
    }
  }
  tb.redundant = dependent_columns(tb.columns);
  return tb;
}

TensorBasis build_k1_instrument(const Eigen::Ref<const Eigen::VectorXd>& z, const Eigen::Ref<const Eigen::MatrixXd>& d,
                                const SplineSpec& zspec) {
  SplineSpec s = zspec;
  s.include_intercept = false;
  auto spline = BSpline::place(s, {z.data(), static_cast<std::size_t>(z.size())});
  TensorBasis tb;
  const auto nz = spline.dim();
  tb.columns.resize(z.size(), nz + d.cols());
  tb.columns.leftCols(nz) = spline.design(z);
  tb.columns.rightCols(d.cols()) = d;
  for (int a = 0; a < nz; ++a) tb.structure.push_back({Factor::Spline, 0, a, true});
  for (Eigen::Index k = 0; k < d.cols(); ++k) tb.structure.push_back({Factor::Covariate, static_cast<int>(k)});
  tb.boundary.emplace_back(spline.lo(), spline.hi());
  tb.redundant = dependent_columns(tb.columns);
  return tb;
}

TensorBasis evaluate_k2(const K2Basis& basis, const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::MatrixXd>& d, const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (d.cols() != basis.n_covariates() || d.rows() != x.size() || v.size() != x.size()) {
    throw Error(Errc::InvalidPanel, "K2 input dimensions disagree");
  }
  TensorBasis tb;
  tb.columns = basis.design(x, d, v);
  tb.structure = basis.structure();
  tb.boundary = {{basis.qx().lo(), basis.qx().hi()}, {basis.qv().lo(), basis.qv().hi()}};
  tb.k2 = basis;
  return tb;
}

TensorBasis build_k2(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& d,
                     const Eigen::Ref<const Eigen::VectorXd>& v, const K2Spec& spec) {
  if ((v.array() < 0.0).any() || (v.array() > 1.0).any()) {
    throw Error(Errc::InvalidConfig, "control values must lie in [0, 1]");
  }
  SplineSpec sx = spec.qx, sv = spec.qv;
  sx.include_intercept = false;
  sv.include_intercept = false;
  auto qx = BSpline::place(sx, {x.data(), static_cast<std::size_t>(x.size())});
  auto qv = BSpline::place(sv, {v.data(), static_cast<std::size_t>(v.size())});
  return evaluate_k2(K2Basis(std::move(qx), std::move(qv), d.cols()), x, d, v);
}

Eigen::MatrixXd d_dx_k2(const TensorBasis& basis, const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::MatrixXd>& d, const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (!basis.k2) throw Error(Errc::InvalidConfig, "d_dx_k2 needs a K2 basis");
  return basis.k2->d_dx_design(x, d, v);
}

}  // namespace shiftshare
