#pragma once

#include <optional>

#include "fmgls/linalg.hpp"

namespace fmgls {

enum class LrSource { kernel, biam, supplied };

// Long-run quantities of xi_t = [u_t', v_t']'. delta is one-sided,
// delta = sum_{h>=0} E(xi_t xi_{t+h}').
struct LongRunCov {
  Matrix omega;
  Matrix delta;
  std::optional<Matrix> sigma;  // innovation covariance, BIAM path only
  LrSource source = LrSource::supplied;
  double bandwidth = 0.0;  // kernel path
  int q = 0;               // BIAM path
  int r = 0;

  int n() const { return static_cast<int>(omega.rows()) / 2; }
  Matrix omega_uu() const { return omega.topLeftCorner(n(), n()); }
  Matrix omega_uv() const { return omega.topRightCorner(n(), n()); }
  Matrix omega_vu() const { return omega.bottomLeftCorner(n(), n()); }
  Matrix omega_vv() const { return omega.bottomRightCorner(n(), n()); }
  Matrix delta_vu() const { return delta.bottomLeftCorner(n(), n()); }
  Matrix delta_vv() const { return delta.bottomRightCorner(n(), n()); }
  Matrix sigma_etaeta() const;
  Matrix sigma_epseta() const;
};

struct FmWeights {
  Matrix omega_udotv;
  Matrix delta_vu_plus;
  Matrix endogeneity_map;
};

// Gamma(h) = T^{-1} sum_t xi_t xi_{t+h}'
Matrix sample_autocovariance(const Matrix& xi, int h);
LongRunCov bartlett_lrcov(const Matrix& xi, double bandwidth);
double andrews_bandwidth(const Matrix& xi);
LongRunCov biam_lrcov(const Matrix& xi, int q, int r);
inline LongRunCov biam_lrcov(const Matrix& xi, int q) { return biam_lrcov(xi, q, q); }
FmWeights fm_weights(const LongRunCov& lr);

}  // namespace fmgls
