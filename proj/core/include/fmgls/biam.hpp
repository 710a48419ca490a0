#pragma once

#include <vector>

#include "fmgls/linalg.hpp"

namespace fmgls {

// Least-squares VAR fits of orders 1..q and their prediction-error
// covariances S(0..q).
class VarLadder {
 public:
  VarLadder(std::vector<Matrix> coefficients, std::vector<Matrix> innovations);

  int order() const { return static_cast<int>(coefs_.size()); }
  int dim() const { return static_cast<int>(innov_.front().rows()); }
  // A_j(l), 1 <= j <= l <= order()
  auto coef(int j, int l) const { return coefs_[l - 1].middleCols((j - 1) * dim(), dim()); }
  // [A_1(l) ... A_l(l)], n x nl
  const Matrix& coefs(int l) const { return coefs_[l - 1]; }
  const Matrix& innovation(int l) const { return innov_[l]; }
  // Ladder restricted to orders 0..q.
  VarLadder truncated(int q) const;

 private:
  std::vector<Matrix> coefs_;
  std::vector<Matrix> innov_;
};

// u is n x T. Fits orders 1..q by least squares over t = l+1..T.
VarLadder fit_var_ladder(const Matrix& u, int q);

// Implicit Sigma^{-1}(q) = M'(q) S^{-1}(q) M(q) for a series of length T.
class BiamDecomposition {
 public:
  BiamDecomposition(VarLadder ladder, int T);

  const VarLadder& ladder() const { return ladder_; }
  int q() const { return ladder_.order(); }
  int T() const { return T_; }
  int n() const { return ladder_.dim(); }
  // order of the predictor used for (1-based) time t
  int row_order(int t) const { return t - 1 < q() ? t - 1 : q(); }
  const Matrix& innovation_inverse(int l) const { return sinv_[l]; }
  // R_l with R_l' R_l = S(l)^{-1}
  const Matrix& whitening(int l) const { return whiten_[l]; }

 private:
  VarLadder ladder_;
  int T_;
  std::vector<Matrix> sinv_;
  std::vector<Matrix> whiten_;
};

// Sequences of T blocks are stored stacked by time: an (n*T) x w matrix whose
// rows n(t-1)..n t-1 are the block for time t.
Matrix apply_filter(const BiamDecomposition& biam, const Matrix& x);
Matrix quadratic_form(const BiamDecomposition& biam, const Matrix& x, const Matrix& y);
// Dense M'S^{-1}M, for tests. Refuses nT > 2000.
Matrix materialize_small(const BiamDecomposition& biam);
// Dense M itself (unit lower block triangular), same guard.
Matrix materialize_filter(const BiamDecomposition& biam);
// V' Sigma^{-1}(q, b) V with V an (n*b) x w block sequence placed at time
// indices T-b+1..T.
Matrix biam_submatrix_form(const BiamDecomposition& biam, int b, const Matrix& v);

struct BandingOptions {
  int H = 0;
  int l0 = 0;
  int norm = 1;
  static BandingOptions defaults(int T);
};

struct BandingChoice {
  int q = 1;
  std::vector<int> candidates;
  std::vector<double> risk;  // average deviation per candidate
};

BandingChoice select_banding_detail(const Matrix& u, const BandingOptions& opt);
int select_banding(const Matrix& u, const BandingOptions& opt);
int select_banding(const Matrix& u);

}  // namespace fmgls
