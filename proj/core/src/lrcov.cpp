#include "fmgls/lrcov.hpp"

#include <cmath>
#include <vector>

#include "fmgls/biam.hpp"
#include "fmgls/error.hpp"

namespace fmgls {

Matrix LongRunCov::sigma_etaeta() const {
  if (!sigma) throw ValidationError("long-run covariance carries no innovation covariance");
  return sigma->topLeftCorner(n(), n());
}

Matrix LongRunCov::sigma_epseta() const {
  if (!sigma) throw ValidationError("long-run covariance carries no innovation covariance");
  return sigma->bottomLeftCorner(n(), n());
}

Matrix sample_autocovariance(const Matrix& xi, int h) {
  const auto T = xi.cols();
  require(h >= 0 && h < T, "autocovariance lag out of range");
  return xi.leftCols(T - h) * xi.rightCols(T - h).transpose() / static_cast<double>(T);
}

LongRunCov bartlett_lrcov(const Matrix& xi, double bandwidth) {
  require(xi.rows() % 2 == 0 && xi.rows() > 0, "xi must have 2n rows");
  require(bandwidth >= 0.0 && bandwidth < static_cast<double>(xi.cols()), "bandwidth must lie in [0, T)");
  const int lags = static_cast<int>(std::floor(bandwidth));
  const Matrix g0 = sample_autocovariance(xi, 0);
  Matrix delta = g0;
  for (int h = 1; h <= lags; ++h) delta += (1.0 - h / (bandwidth + 1.0)) * sample_autocovariance(xi, h);
  LongRunCov lr;
  lr.delta = delta;
  lr.omega = symmetrize(delta + delta.transpose() - g0);
  lr.source = LrSource::kernel;
  lr.bandwidth = bandwidth;
  return lr;
}

double andrews_bandwidth(const Matrix& xi) {
  const auto T = xi.cols();
  require(T >= 10, "Andrews bandwidth needs T >= 10");
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index a = 0; a < xi.rows(); ++a) {
    const auto lag = xi.row(a).head(T - 1);
    const auto cur = xi.row(a).tail(T - 1);
    const double sxx = lag.squaredNorm();
    if (sxx == 0.0) continue;
    const double rho = lag.dot(cur) / sxx;
    const double s2 = (cur - rho * lag).squaredNorm() / static_cast<double>(T - 1);
    if (s2 == 0.0) continue;
    if (std::abs(rho) >= 1.0) throw NumericalError("Andrews bandwidth: AR(1) coefficient on or outside the unit circle");
    const double s4 = s2 * s2;
    num += 4.0 * rho * rho * s4 / (std::pow(1.0 - rho, 6) * std::pow(1.0 + rho, 2));
    den += s4 / std::pow(1.0 - rho, 4);
  }
  if (den == 0.0) return 0.0;
  return 1.1447 * std::cbrt(num / den * static_cast<double>(T));
}

LongRunCov biam_lrcov(const Matrix& xi, int q, int r) {
  require(xi.rows() % 2 == 0 && xi.rows() > 0, "xi must have 2n rows");
  require(q >= 1, "BIAM long-run covariance needs q >= 1");
  require(r >= 1, "BIAM long-run covariance needs r >= 1");
  const int m = static_cast<int>(xi.rows());
  const int T = static_cast<int>(xi.cols());
  require(r <= T, "r must not exceed T");
  const VarLadder lad = fit_var_ladder(xi, q);

  Matrix poly = Matrix::Identity(m, m);
  for (int j = 1; j <= q; ++j) poly -= lad.coef(j, q);
  const Matrix pinv = general_inverse(poly, "I - sum F_j");

  LongRunCov lr;
  lr.sigma = lad.innovation(q);
  lr.omega = symmetrize(pinv * lad.innovation(q) * pinv.transpose());
  lr.source = LrSource::biam;
  lr.q = q;
  lr.r = r;

  // Last block column of M^{-1} S M^{-T}: solve M' w = e_T backwards, scale by
  // S, then solve M v = S w forwards; sum the last r blocks of v.
  auto order = [q](int tau) { return tau < q ? tau : q; };
  std::vector<Matrix> w(T, Matrix::Zero(m, m));
  w[T - 1] = Matrix::Identity(m, m);
  for (int i = T - 1; i >= 1; --i) {
    const int l = order(i);
    for (int j = 1; j <= l; ++j) w[i - j].noalias() += lad.coef(j, l).transpose() * w[i];
  }
  std::vector<Matrix> v(T);
  for (int i = 0; i < T; ++i) {
    const int l = order(i);
    v[i] = lad.innovation(l) * w[i];
    for (int j = 1; j <= l; ++j) v[i].noalias() += lad.coef(j, l) * v[i - j];
  }
  Matrix delta = Matrix::Zero(m, m);
  for (int i = T - r; i < T; ++i) delta += v[i];
  lr.delta = delta;
  return lr;
}

FmWeights fm_weights(const LongRunCov& lr) {
  require(lr.omega.rows() == lr.omega.cols() && lr.omega.rows() % 2 == 0, "omega must be 2n x 2n");
  require(lr.delta.rows() == lr.omega.rows() && lr.delta.cols() == lr.omega.cols(), "delta must be 2n x 2n");
  const Matrix vv_inv = spd_inverse(lr.omega_vv(), "Omega_vv");
  FmWeights f;
  f.endogeneity_map = lr.omega_uv() * vv_inv;
  f.omega_udotv = symmetrize(lr.omega_uu() - f.endogeneity_map * lr.omega_vu());
  f.delta_vu_plus = lr.delta_vu() - lr.delta_vv() * vv_inv * lr.omega_vu();
  return f;
}

}  // namespace fmgls
