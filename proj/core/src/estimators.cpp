#include "fmgls/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "fmgls/error.hpp"

namespace fmgls {

namespace {

// Solves N beta = rhs in scaled coordinates: (G N G)^{-1} G rhs, then un-scales.
// `rhs(beta)` returns G (rhs - N beta), formed from the data-space residual
// so that a couple of refinement steps remove the cancellation error of the
// first solve. Also returns the un-scaled inverse of N.
struct ScaledSolve {
  Vector beta;
  Matrix n_inv;
};

ScaledSolve solve_scaled(const Matrix& n_scaled, const std::function<Vector(const Vector&)>& rhs, const Vector& g,
                         const char* what) {
  Eigen::LLT<Matrix> llt(symmetrize(n_scaled));
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-14)
    throw NumericalError(std::string(what) + ": normal matrix is singular");
  ScaledSolve s;
  s.beta = Vector::Zero(g.size());
  for (int pass = 0; pass < 3; ++pass) s.beta += g.asDiagonal() * llt.solve(rhs(s.beta));
  s.n_inv = g.asDiagonal() * llt.solve(Matrix::Identity(g.size(), g.size())) * g.asDiagonal();
  s.n_inv = symmetrize(s.n_inv);
  return s;
}

Matrix scale_both(const Matrix& n, const Vector& g) { return g.asDiagonal() * n * g.asDiagonal(); }

// y_t stacked by time into an nT vector.
Vector stack_time(const Matrix& y) { return Eigen::Map<const Vector>(y.data(), y.size()); }

EstimationResult sols_formula(const CprSpec& spec, const PanelData& data, const LongRunCov& lr,
                              const FmWeights& w, Method tag) {
  const auto z = build_regressors(spec, data);
  const int n = spec.equations();
  require(lr.n() == n, "long-run covariance dimension does not match the system");
  const Vector g = scaling_matrix(spec, data.T()).diag;
  const Matrix yplus = data.y - w.endogeneity_map * data.differences();
  const auto bhat = bhat_vectors(spec, data);
  const Vector corr = stack_weighted(spec, bhat, w.delta_vu_plus.diagonal());
  const Matrix eye = Matrix::Identity(n, n);
  auto rhs = [&](const Vector& b) -> Vector {
    return g.asDiagonal() * (z.cross(eye, residuals(z, yplus, b)) - corr);
  };
  const auto s = solve_scaled(scale_both(z.gram(eye), g), rhs, g, "FM-SOLS");
  EstimationResult r;
  r.beta = s.beta;
  r.method = tag;
  r.lr = lr;
  r.residuals = residuals(z, data.y, r.beta);
  r.modified_residuals = residuals(z, yplus, r.beta);
  r.sandwich.bread_inv = s.n_inv;
  r.sandwich.meat = z.gram(w.omega_udotv);
  return r;
}

EstimationResult sur_formula(const CprSpec& spec, const PanelData& data, const LongRunCov& lr,
                             const FmWeights& w, Method tag) {
  const auto z = build_regressors(spec, data);
  const int n = spec.equations();
  require(lr.n() == n, "long-run covariance dimension does not match the system");
  const Vector g = scaling_matrix(spec, data.T()).diag;
  const Matrix winv = spd_inverse(w.omega_udotv, "Omega_u.v");
  const Matrix yplus = data.y - w.endogeneity_map * data.differences();
  const auto bhat = bhat_vectors(spec, data);
  Vector scal(n);
  for (int i = 0; i < n; ++i) scal(i) = w.delta_vu_plus.row(i).dot(winv.col(i));
  const Vector corr = stack_weighted(spec, bhat, scal);
  const Matrix nmat = z.gram(winv);
  auto rhs = [&](const Vector& b) -> Vector {
    return g.asDiagonal() * (z.cross(winv, residuals(z, yplus, b)) - corr);
  };
  const auto s = solve_scaled(scale_both(nmat, g), rhs, g, "FM-SUR");
  EstimationResult r;
  r.beta = s.beta;
  r.method = tag;
  r.lr = lr;
  r.residuals = residuals(z, data.y, r.beta);
  r.modified_residuals = residuals(z, yplus, r.beta);
  r.sandwich.bread_inv = s.n_inv;
  r.sandwich.meat = nmat;
  return r;
}

EstimationResult gls_formula(const CprSpec& spec, const PanelData& data, const BiamDecomposition& filter,
                             const LongRunCov& lr, const FmWeights& w, Method tag) {
  const auto z = build_regressors(spec, data);
  const int n = spec.equations();
  require(lr.n() == n, "long-run covariance dimension does not match the system");
  require(filter.n() == n && filter.T() == data.T(), "filter does not match the panel");
  const Vector g = scaling_matrix(spec, data.T()).diag;

  const Matrix omega_uu_inv = spd_inverse(lr.omega_uu(), "Omega_uu");
  const Matrix omega_vv_inv = spd_inverse(lr.omega_vv(), "Omega_vv");
  const Matrix sigma_ee_inv = spd_inverse(lr.sigma_etaeta(), "Sigma_eta eta");
  const Matrix sigma_epseta = lr.sigma_epseta();
  const Matrix delta_vv = lr.delta_vv();
  const Matrix endo = omega_uu_inv * lr.omega_uv() * omega_vv_inv;
  const Matrix back = omega_vv_inv * lr.omega_vu() * omega_uu_inv;

  Vector scal(n);
  for (int i = 0; i < n; ++i)
    scal(i) = sigma_epseta.row(i).dot(sigma_ee_inv.col(i)) - delta_vv.row(i).dot(back.col(i));
  const Vector bplus = stack_weighted(spec, bhat_vectors(spec, data), scal);

  const Matrix zg = z.stacked() * g.asDiagonal();
  const Matrix nmat = quadratic_form(filter, zg, zg);
  const Vector corr = g.asDiagonal() * (z.cross(endo, data.differences()) + bplus);
  auto rhs = [&](const Vector& b) -> Vector {
    return Vector(quadratic_form(filter, zg, stack_time(residuals(z, data.y, b)))) - corr;
  };
  const auto s = solve_scaled(nmat, rhs, g, "FM-GLS");

  EstimationResult r;
  r.beta = s.beta;
  r.method = tag;
  r.lr = lr;
  r.biam = filter;
  r.residuals = residuals(z, data.y, r.beta);
  const Matrix bread = z.gram(omega_uu_inv);
  r.sandwich.bread_inv = g.asDiagonal() * spd_inverse(scale_both(bread, g), "Z'(I x Omega_uu^-1)Z") * g.asDiagonal();
  r.sandwich.meat = z.gram(omega_uu_inv * w.omega_udotv * omega_uu_inv);
  return r;
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::ols: return "OLS";
    case Method::sols_fm: return "FM-SOLS";
    case Method::sur_fm: return "FM-SUR";
    case Method::fgls_fm: return "FM-GLS";
    case Method::gls_inf: return "infGLS";
    case Method::sols_inf: return "infSOLS";
    case Method::sur_inf: return "infSUR";
  }
  return "unknown";
}

Matrix EstimationResult::phi() const {
  if (sandwich.meat.size() == 0) throw ValidationError(method_name(method) + " carries no Wald covariance");
  return symmetrize(sandwich.bread_inv * sandwich.meat * sandwich.bread_inv);
}

EstimationResult ols(const CprSpec& spec, const PanelData& data) {
  const auto z = build_regressors(spec, data);
  const Vector g = scaling_matrix(spec, data.T()).diag;
  EstimationResult r;
  r.method = Method::ols;
  r.beta.resize(spec.params());
  r.sandwich.bread_inv = Matrix::Zero(spec.params(), spec.params());
  for (int i = 0; i < spec.equations(); ++i) {
    const int o = spec.offset(i);
    const int k = spec.width(i);
    const Vector gi = g.segment(o, k);
    const Matrix zs = z.block(i) * gi.asDiagonal();
    const Vector yi = data.y.row(i).transpose();
    auto rhs = [&](const Vector& b) -> Vector { return zs.transpose() * (yi - z.block(i) * b); };
    const auto s = solve_scaled(zs.transpose() * zs, rhs, gi, "OLS");
    r.beta.segment(o, k) = s.beta;
    r.sandwich.bread_inv.block(o, o, k, k) = s.n_inv;
  }
  r.residuals = residuals(z, data.y, r.beta);
  return r;
}

EstimationResult fm_sols(const CprSpec& spec, const PanelData& data, const LongRunCov& lr, const FmWeights& w) {
  return sols_formula(spec, data, lr, w, Method::sols_fm);
}

EstimationResult fm_sur(const CprSpec& spec, const PanelData& data, const LongRunCov& lr, const FmWeights& w) {
  return sur_formula(spec, data, lr, w, Method::sur_fm);
}

EstimationResult fm_gls(const CprSpec& spec, const PanelData& data, const BiamDecomposition& filter,
                        const LongRunCov& lr) {
  return gls_formula(spec, data, filter, lr, fm_weights(lr), Method::fgls_fm);
}

Matrix first_stage_xi(const CprSpec& spec, const PanelData& data) {
  const EstimationResult o = ols(spec, data);
  Matrix xi(2 * data.n(), data.T());
  xi.topRows(data.n()) = o.residuals;
  xi.bottomRows(data.n()) = data.differences();
  return xi;
}

LongRunCov kernel_lr(const Matrix& xi, std::optional<double> bandwidth) {
  const double cap = static_cast<double>(xi.cols() - 1);
  const double bw = bandwidth ? *bandwidth : std::min(andrews_bandwidth(xi), cap);
  return bartlett_lrcov(xi, bw);
}

int banding_for(const Matrix& u, const PipelineOptions& opt) {
  if (opt.q) {
    require(*opt.q >= 1, "banding parameter must be at least 1");
    return *opt.q;
  }
  const BandingOptions b = opt.banding.H == 0 ? BandingOptions::defaults(static_cast<int>(u.cols())) : opt.banding;
  return select_banding(u, b);
}

namespace {

LongRunCov pipeline_lr(const CprSpec& spec, const PanelData& data, const PipelineOptions& opt) {
  const Matrix xi = first_stage_xi(spec, data);
  if (opt.lr == LrPath::kernel) return kernel_lr(xi, opt.bandwidth);
  const int q = banding_for(xi.topRows(data.n()), opt);
  return biam_lrcov(xi, q, opt.r.value_or(q));
}

}  // namespace

EstimationResult fm_sols(const CprSpec& spec, const PanelData& data, const PipelineOptions& opt) {
  const LongRunCov lr = pipeline_lr(spec, data, opt);
  return fm_sols(spec, data, lr, fm_weights(lr));
}

EstimationResult fm_sur(const CprSpec& spec, const PanelData& data, const PipelineOptions& opt) {
  const LongRunCov lr = pipeline_lr(spec, data, opt);
  return fm_sur(spec, data, lr, fm_weights(lr));
}

EstimationResult fm_gls(const CprSpec& spec, const PanelData& data, const PipelineOptions& opt) {
  const Matrix xi = first_stage_xi(spec, data);
  const Matrix u = xi.topRows(data.n());
  const int q = banding_for(u, opt);
  BiamDecomposition filter(fit_var_ladder(u, q), data.T());
  const LongRunCov lr = biam_lrcov(xi, q, opt.r.value_or(q));
  return fm_gls(spec, data, filter, lr);
}

EstimationResult estimate(const CprSpec& spec, const PanelData& data, Method m, const PipelineOptions& opt) {
  switch (m) {
    case Method::ols: return ols(spec, data);
    case Method::sols_fm: return fm_sols(spec, data, opt);
    case Method::sur_fm: return fm_sur(spec, data, opt);
    case Method::fgls_fm: return fm_gls(spec, data, opt);
    default: throw ValidationError("infeasible methods need supplied covariances");
  }
}

EstimationResult estimate_with_given_covariances(const CprSpec& spec, const PanelData& data, Method method,
                                                 const LongRunCov& lr, const FmWeights& w,
                                                 const std::optional<VarLadder>& filter) {
  switch (method) {
    case Method::sols_fm:
    case Method::sols_inf: return sols_formula(spec, data, lr, w, method);
    case Method::sur_fm:
    case Method::sur_inf: return sur_formula(spec, data, lr, w, method);
    case Method::fgls_fm:
    case Method::gls_inf:
      require(filter.has_value(), "GLS estimation needs a filter ladder");
      return gls_formula(spec, data, BiamDecomposition(*filter, data.T()), lr, w, method);
    case Method::ols: return ols(spec, data);
  }
  throw ValidationError("unknown method");
}

double turning_point(double beta3, double beta4) {
  if (beta4 == 0.0) throw ValidationError("turning point undefined for a zero quadratic coefficient");
  return std::exp(-beta3 / (2.0 * beta4));
}

}  // namespace fmgls
