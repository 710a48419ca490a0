#include "fmgls/model.hpp"

#include <cmath>
#include <string>

#include "fmgls/error.hpp"

namespace fmgls {

CprSpec::CprSpec(std::vector<EquationOrder> equations) : eqs_(std::move(equations)) {
  require(!eqs_.empty(), "spec needs at least one equation");
  offsets_.reserve(eqs_.size() + 1);
  offsets_.push_back(0);
  for (const auto& e : eqs_) {
    require(e.trend_order >= 0, "trend order must be nonnegative");
    require(e.power_order >= 1, "power order must be at least 1");
    offsets_.push_back(offsets_.back() + e.trend_order + e.power_order + 1);
  }
}

CprSpec CprSpec::uniform(int n, int trend_order, int power_order) {
  require(n >= 1, "spec needs at least one equation");
  return CprSpec(std::vector<EquationOrder>(n, EquationOrder{trend_order, power_order}));
}

PanelData::PanelData(Matrix y_, Matrix x_) : PanelData(std::move(y_), std::move(x_), Vector()) {}

PanelData::PanelData(Matrix y_, Matrix x_, Vector x0_)
    : y(std::move(y_)), x(std::move(x_)), x0(std::move(x0_)) {
  require(y.rows() == x.rows() && y.cols() == x.cols(), "y and x must have equal shapes");
  require(y.cols() >= 1 && y.rows() >= 1, "panel must be nonempty");
  if (x0.size() == 0) x0 = Vector::Zero(x.rows());
  require(x0.size() == x.rows(), "x0 length must equal the number of equations");
  require(y.allFinite() && x.allFinite() && x0.allFinite(), "panel contains non-finite values");
}

Matrix PanelData::differences() const {
  Matrix v(x.rows(), x.cols());
  v.col(0) = x.col(0) - x0;
  for (Eigen::Index t = 1; t < x.cols(); ++t) v.col(t) = x.col(t) - x.col(t - 1);
  return v;
}

void validate(const CprSpec& spec, const PanelData& data) {
  require(spec.equations() == data.n(),
          "spec has " + std::to_string(spec.equations()) + " equations but data has " +
              std::to_string(data.n()));
  require(data.x.rows() == data.y.rows() && data.x.cols() == data.y.cols(), "y and x must have the same shape");
  require(data.x0.size() == data.y.rows(), "x0 must have one entry per equation");
  require(data.y.allFinite() && data.x.allFinite() && data.x0.allFinite(), "data contain missing or non-finite values");
  for (int i = 0; i < spec.equations(); ++i)
    require(data.T() > spec.width(i), "T must exceed d_i + s_i + 1 for every equation");
}

RegressorSystem::RegressorSystem(CprSpec spec, std::vector<Matrix> blocks)
    : spec_(std::move(spec)), blocks_(std::move(blocks)) {
  require(static_cast<int>(blocks_.size()) == spec_.equations(), "block count mismatch");
  for (int i = 0; i < spec_.equations(); ++i)
    require(blocks_[i].cols() == spec_.width(i) && blocks_[i].rows() == blocks_[0].rows(),
            "regressor block shape mismatch");
}

Matrix RegressorSystem::fitted(const Vector& beta) const {
  require(beta.size() == spec_.params(), "beta has wrong length");
  Matrix out(n(), T());
  for (int i = 0; i < n(); ++i)
    out.row(i) = (blocks_[i] * beta.segment(spec_.offset(i), spec_.width(i))).transpose();
  return out;
}

Matrix RegressorSystem::stacked() const {
  const int nn = n();
  Matrix z = Matrix::Zero(static_cast<Eigen::Index>(nn) * T(), spec_.params());
  for (int t = 0; t < T(); ++t)
    for (int i = 0; i < nn; ++i)
      z.block(nn * t + i, spec_.offset(i), 1, spec_.width(i)) = blocks_[i].row(t);
  return z;
}

Vector RegressorSystem::cross(const Matrix& w, const Matrix& e) const {
  require(w.rows() == n() && w.cols() == e.rows() && e.cols() == T(), "cross: shape mismatch");
  const Matrix we = w * e;  // n x T
  Vector out(spec_.params());
  for (int i = 0; i < n(); ++i)
    out.segment(spec_.offset(i), spec_.width(i)) = blocks_[i].transpose() * we.row(i).transpose();
  return out;
}

Matrix RegressorSystem::gram(const Matrix& w) const {
  require(w.rows() == n() && w.cols() == n(), "gram: weight must be n x n");
  Matrix out = Matrix::Zero(spec_.params(), spec_.params());
  for (int i = 0; i < n(); ++i)
    for (int j = 0; j < n(); ++j) {
      if (w(i, j) == 0.0) continue;
      out.block(spec_.offset(i), spec_.offset(j), spec_.width(i), spec_.width(j)) =
          w(i, j) * (blocks_[i].transpose() * blocks_[j]);
    }
  return out;
}

RegressorSystem build_regressors(const CprSpec& spec, const PanelData& data) {
  validate(spec, data);
  const int T = data.T();
  std::vector<Matrix> blocks;
  blocks.reserve(spec.equations());
  for (int i = 0; i < spec.equations(); ++i) {
    const auto& o = spec[i];
    Matrix b(T, spec.width(i));
    for (int t = 0; t < T; ++t) {
      const double tt = t + 1.0;
      double p = 1.0;
      for (int k = 0; k <= o.trend_order; ++k, p *= tt) b(t, k) = p;
      const double xv = data.x(i, t);
      p = xv;
      for (int k = 1; k <= o.power_order; ++k, p *= xv) b(t, o.trend_order + k) = p;
    }
    blocks.push_back(std::move(b));
  }
  return RegressorSystem(spec, std::move(blocks));
}

ScalingMatrix scaling_matrix(const CprSpec& spec, int T) {
  require(T >= 1, "T must be positive");
  ScalingMatrix g{Vector(spec.params())};
  const double rt = std::sqrt(static_cast<double>(T));
  for (int i = 0; i < spec.equations(); ++i) {
    int k = spec.offset(i);
    for (int j = 0; j <= spec[i].trend_order; ++j) g.diag(k++) = std::pow(static_cast<double>(T), -j) / rt;
    for (int j = 1; j <= spec[i].power_order; ++j) g.diag(k++) = std::pow(rt, -j) / rt;
  }
  return g;
}

std::vector<Vector> bhat_vectors(const CprSpec& spec, const PanelData& data) {
  require(spec.equations() == data.n(), "spec and data disagree on the number of equations");
  std::vector<Vector> out;
  for (int i = 0; i < spec.equations(); ++i) {
    const auto& o = spec[i];
    Vector b = Vector::Zero(spec.width(i));
    for (int k = 1; k <= o.power_order; ++k)
      b(o.trend_order + k) = k * data.x.row(i).array().pow(k - 1).sum();
    out.push_back(std::move(b));
  }
  return out;
}

Vector stack_weighted(const CprSpec& spec, const std::vector<Vector>& bhat, const Vector& weights) {
  Vector out(spec.params());
  for (int i = 0; i < spec.equations(); ++i)
    out.segment(spec.offset(i), spec.width(i)) = weights(i) * bhat[i];
  return out;
}

Matrix residuals(const RegressorSystem& z, const Matrix& y, const Vector& beta) {
  require(y.rows() == z.n() && y.cols() == z.T(), "residuals: y has wrong shape");
  return y - z.fitted(beta);
}

Matrix residuals(const CprSpec& spec, const PanelData& data, const Vector& beta) {
  return residuals(build_regressors(spec, data), data.y, beta);
}

}  // namespace fmgls
