#pragma once

#include <vector>

#include "fmgls/linalg.hpp"

namespace fmgls {

// Deterministic trend order d_i and stochastic power order s_i of one equation.
struct EquationOrder {
  int trend_order = 0;
  int power_order = 1;
};

class CprSpec {
 public:
  explicit CprSpec(std::vector<EquationOrder> equations);
  static CprSpec uniform(int n, int trend_order, int power_order);

  int equations() const { return static_cast<int>(eqs_.size()); }
  int params() const { return offsets_.back(); }
  int width(int i) const { return offsets_[i + 1] - offsets_[i]; }
  int offset(int i) const { return offsets_[i]; }
  const EquationOrder& operator[](int i) const { return eqs_[i]; }
  const std::vector<EquationOrder>& orders() const { return eqs_; }

 private:
  std::vector<EquationOrder> eqs_;
  std::vector<int> offsets_;
};

// n dependent series and n I(1) regressors in levels, columns are t = 1..T.
// x0 is the level at t = 0, used for the first difference; simulated
// designs start at x0 = 0.
struct PanelData {
  Matrix y;
  Matrix x;
  Vector x0;

  PanelData() = default;
  PanelData(Matrix y_, Matrix x_);
  PanelData(Matrix y_, Matrix x_, Vector x0_);

  int n() const { return static_cast<int>(y.rows()); }
  int T() const { return static_cast<int>(y.cols()); }
  // v_t = x_t - x_{t-1}, n x T
  Matrix differences() const;
};

void validate(const CprSpec& spec, const PanelData& data);

// Per-equation regressors. block(i) is T x (d_i + s_i + 1), row t-1 holds
// z_it' = [1, t, ..., t^{d_i}, x_it, ..., x_it^{s_i}]. Cross-equation blocks
// are never stored.
class RegressorSystem {
 public:
  RegressorSystem(CprSpec spec, std::vector<Matrix> blocks);

  const CprSpec& spec() const { return spec_; }
  int T() const { return static_cast<int>(blocks_.front().rows()); }
  int n() const { return spec_.equations(); }
  const Matrix& block(int i) const { return blocks_[i]; }

  // Z_t' beta for every t, n x T.
  Matrix fitted(const Vector& beta) const;
  // Stacked (nT x d) design with row n(t-1)+i equal to Z_t' restricted to
  // equation i. Only used where a dense left operand is unavoidable
  // (filtered GLS products), never for storage.
  Matrix stacked() const;
  // sum_t Z_t W e_t for an n x T matrix e; W applied per t. Result length d.
  Vector cross(const Matrix& w, const Matrix& e) const;
  // sum_t Z_t W Z_t', d x d.
  Matrix gram(const Matrix& w) const;

 private:
  CprSpec spec_;
  std::vector<Matrix> blocks_;
};

RegressorSystem build_regressors(const CprSpec& spec, const PanelData& data);

// Diagonal of G_T, length d.
struct ScalingMatrix {
  Vector diag;
};
ScalingMatrix scaling_matrix(const CprSpec& spec, int T);

std::vector<Vector> bhat_vectors(const CprSpec& spec, const PanelData& data);
// The b-hat vectors stacked into a single length-d vector with scalar weights
// per equation: out_i = weights(i) * bhat_i.
Vector stack_weighted(const CprSpec& spec, const std::vector<Vector>& bhat, const Vector& weights);

Matrix residuals(const CprSpec& spec, const PanelData& data, const Vector& beta);
Matrix residuals(const RegressorSystem& z, const Matrix& y, const Vector& beta);

}  // namespace fmgls
