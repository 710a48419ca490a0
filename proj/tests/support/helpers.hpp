#pragma once

#include <cstdint>
#include <random>

#include "fmgls/model.hpp"

namespace testing_support {

inline double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(1.0, b.norm());
  return (a - b).norm() / scale;
}

inline Eigen::MatrixXd gaussian(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = z(rng);
  return m;
}

// Random walk regressors and a quadratic system with AR(1) noise.
inline fmgls::PanelData random_panel(int n, int T, double rho, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd v = gaussian(n, T, rng);
  const Eigen::MatrixXd e = gaussian(n, T, rng);
  Eigen::MatrixXd x(n, T), y(n, T), u(n, T);
  for (int t = 0; t < T; ++t) {
    x.col(t) = v.col(t);
    u.col(t) = e.col(t) + 0.3 * v.col(t);
    if (t > 0) {
      x.col(t) += x.col(t - 1);
      u.col(t) += rho * u.col(t - 1);
    }
    for (int i = 0; i < n; ++i) y(i, t) = 1.0 + 0.5 * (t + 1) + 2.0 * x(i, t) - 0.3 * x(i, t) * x(i, t) + u(i, t);
  }
  return fmgls::PanelData(y, x, Eigen::VectorXd::Zero(n));
}

}  // namespace testing_support
