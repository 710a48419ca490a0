#include "fmgls/biam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fmgls/error.hpp"

namespace fmgls {

namespace {

constexpr double kPdTolerance = 1e-10;

// Stacked lags [u_{t-1}; ...; u_{t-l}] for t = l+1..T as columns.
Matrix lag_matrix(const Matrix& u, int l) {
  const int n = static_cast<int>(u.rows());
  const int T = static_cast<int>(u.cols());
  Matrix x(n * l, T - l);
  for (int j = 1; j <= l; ++j) x.middleRows((j - 1) * n, n) = u.middleCols(l - j, T - l);
  return x;
}

struct OrderFit {
  Matrix coefs;
  Matrix innovation;
};

OrderFit fit_order(const Matrix& u, int l) {
  const int T = static_cast<int>(u.cols());
  const Matrix x = lag_matrix(u, l);
  const Matrix y = u.rightCols(T - l);
  const Matrix gram = x * x.transpose();
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-13)
    throw NumericalError("VAR(" + std::to_string(l) + ") fit: rank-deficient lag Gram matrix");
  OrderFit f;
  f.coefs = llt.solve(x * y.transpose()).transpose();
  const Matrix e = y - f.coefs * x;
  f.innovation = symmetrize(e * e.transpose() / static_cast<double>(T - l));
  check_positive_definite(f.innovation, kPdTolerance, "S(" + std::to_string(l) + ")");
  return f;
}

Matrix sample_second_moment(const Matrix& u) {
  Matrix s0 = symmetrize(u * u.transpose() / static_cast<double>(u.cols()));
  check_positive_definite(s0, kPdTolerance, "S(0)");
  return s0;
}

// Fits orders 1..q, stopping quietly at the first order that fails. Returns
// an empty coefficient list if even S(0) or order 1 cannot be fitted.
bool fit_prefix(const Matrix& u, int q, std::vector<Matrix>& coefs, std::vector<Matrix>& innov) {
  try {
    innov.push_back(sample_second_moment(u));
  } catch (const NumericalError&) {
    return false;
  }
  for (int l = 1; l <= q; ++l) {
    if (static_cast<int>(u.cols()) - l <= static_cast<int>(u.rows()) * l) break;
    try {
      OrderFit f = fit_order(u, l);
      coefs.push_back(std::move(f.coefs));
      innov.push_back(std::move(f.innovation));
    } catch (const NumericalError&) {
      break;
    }
  }
  return !coefs.empty();
}

// Filters a block sequence occupying global (0-based) times offset..offset+len-1,
// with blocks before `offset` treated as zero, then whitens each row.
Matrix whitened_filter(const BiamDecomposition& biam, const Matrix& x, int offset) {
  const int n = biam.n();
  const int len = static_cast<int>(x.rows()) / n;
  const auto& lad = biam.ladder();
  Matrix out(x.rows(), x.cols());
  for (int s = 0; s < len; ++s) {
    const int tau = offset + s;
    const int l = std::min(tau, biam.q());
    Matrix row = x.middleRows(s * n, n);
    const int reach = std::min(l, s);
    for (int j = 1; j <= reach; ++j) row.noalias() -= lad.coef(j, l) * x.middleRows((s - j) * n, n);
    out.middleRows(s * n, n).noalias() = biam.whitening(l) * row;
  }
  return out;
}

}  // namespace

VarLadder::VarLadder(std::vector<Matrix> coefficients, std::vector<Matrix> innovations)
    : coefs_(std::move(coefficients)), innov_(std::move(innovations)) {
  require(!innov_.empty() && innov_.size() == coefs_.size() + 1, "ladder: need S(0..q) and A(1..q)");
  const auto n = innov_.front().rows();
  for (std::size_t l = 1; l <= coefs_.size(); ++l)
    require(coefs_[l - 1].rows() == n && coefs_[l - 1].cols() == n * static_cast<Eigen::Index>(l),
            "ladder: coefficient block has wrong shape");
  for (const auto& s : innov_) require(s.rows() == n && s.cols() == n, "ladder: S has wrong shape");
}

VarLadder VarLadder::truncated(int q) const {
  require(q >= 0 && q <= order(), "ladder truncation out of range");
  return VarLadder(std::vector<Matrix>(coefs_.begin(), coefs_.begin() + q),
                   std::vector<Matrix>(innov_.begin(), innov_.begin() + q + 1));
}

VarLadder fit_var_ladder(const Matrix& u, int q) {
  const int n = static_cast<int>(u.rows());
  const int T = static_cast<int>(u.cols());
  require(q >= 1, "VAR ladder order must be at least 1");
  require(T > n * q + 1, "VAR ladder: T must exceed n*q + 1");
  std::vector<Matrix> coefs;
  std::vector<Matrix> innov;
  innov.push_back(sample_second_moment(u));
  for (int l = 1; l <= q; ++l) {
    OrderFit f = fit_order(u, l);
    coefs.push_back(std::move(f.coefs));
    innov.push_back(std::move(f.innovation));
  }
  return VarLadder(std::move(coefs), std::move(innov));
}

BiamDecomposition::BiamDecomposition(VarLadder ladder, int T) : ladder_(std::move(ladder)), T_(T) {
  require(T_ >= 1, "BIAM: T must be positive");
  require(ladder_.order() < T_, "BIAM: banding parameter must be below T");
  for (int l = 0; l <= ladder_.order(); ++l) {
    check_positive_definite(ladder_.innovation(l), kPdTolerance, "S(" + std::to_string(l) + ")");
    sinv_.push_back(spd_inverse(ladder_.innovation(l), "S(" + std::to_string(l) + ")"));
    // S = L L', so S^{-1} = L^{-T} L^{-1}
    Eigen::LLT<Matrix> llt(ladder_.innovation(l));
    Matrix low = llt.matrixL();
    whiten_.push_back(low.triangularView<Eigen::Lower>().solve(Matrix::Identity(n(), n())));
  }
}

Matrix apply_filter(const BiamDecomposition& biam, const Matrix& x) {
  const int n = biam.n();
  require(x.rows() == static_cast<Eigen::Index>(n) * biam.T(), "apply_filter: need n*T rows");
  const auto& lad = biam.ladder();
  Matrix out = x;
  for (int tau = 1; tau < biam.T(); ++tau) {
    const int l = std::min(tau, biam.q());
    for (int j = 1; j <= l; ++j)
      out.middleRows(tau * n, n).noalias() -= lad.coef(j, l) * x.middleRows((tau - j) * n, n);
  }
  return out;
}

Matrix quadratic_form(const BiamDecomposition& biam, const Matrix& x, const Matrix& y) {
  const auto rows = static_cast<Eigen::Index>(biam.n()) * biam.T();
  require(x.rows() == rows && y.rows() == rows, "quadratic_form: need n*T rows");
  const Matrix wx = whitened_filter(biam, x, 0);
  if (&x == &y) return wx.transpose() * wx;
  const Matrix wy = whitened_filter(biam, y, 0);
  return wx.transpose() * wy;
}

Matrix materialize_filter(const BiamDecomposition& biam) {
  const int n = biam.n();
  const int T = biam.T();
  require(n * T <= 2000, "materialize: nT exceeds 2000");
  Matrix m = Matrix::Identity(n * T, n * T);
  for (int i = 2; i <= T; ++i) {
    const int l = biam.row_order(i);
    for (int j = i - l; j <= i - 1; ++j) m.block((i - 1) * n, (j - 1) * n, n, n) = -biam.ladder().coef(i - j, l);
  }
  return m;
}

Matrix materialize_small(const BiamDecomposition& biam) {
  const int n = biam.n();
  const int T = biam.T();
  const Matrix m = materialize_filter(biam);
  Matrix sinv = Matrix::Zero(n * T, n * T);
  for (int t = 1; t <= T; ++t) sinv.block((t - 1) * n, (t - 1) * n, n, n) = biam.innovation_inverse(biam.row_order(t));
  return m.transpose() * sinv * m;
}

Matrix biam_submatrix_form(const BiamDecomposition& biam, int b, const Matrix& v) {
  require(b >= 1, "submatrix form: block length must be positive");
  require(b <= biam.T(), "submatrix form: block longer than the sample");
  require(v.rows() == static_cast<Eigen::Index>(biam.n()) * b, "submatrix form: need n*b rows");
  const Matrix wv = whitened_filter(biam, v, biam.T() - b);
  return wv.transpose() * wv;
}

BandingOptions BandingOptions::defaults(int T) {
  BandingOptions o;
  o.H = static_cast<int>(std::floor(2.0 * std::pow(static_cast<double>(T), 0.25)));
  o.l0 = T / 5;
  o.norm = 1;
  return o;
}

BandingChoice select_banding_detail(const Matrix& u, const BandingOptions& opt) {
  const int n = static_cast<int>(u.rows());
  const int T = static_cast<int>(u.cols());
  const int H = opt.H;
  require(H >= 2, "select_banding: H must be at least 2");
  require(H < opt.l0 && opt.l0 <= T, "select_banding: need H < l0 <= T");
  require(opt.norm == 1 || opt.norm == 2, "select_banding: norm must be 1 or 2");

  // Sample autocovariance of H consecutive residual vectors, stacked oldest
  // first to match the time ordering of the BIAM.
  Matrix pi = Matrix::Zero(n * H, n * H);
  Vector stack(n * H);
  for (int tau = H - 1; tau <= T - 2; ++tau) {
    for (int k = 0; k < H; ++k) stack.segment(k * n, n) = u.col(tau - H + 1 + k);
    pi.noalias() += stack * stack.transpose();
  }
  pi /= static_cast<double>(T - H);
  const Matrix pi_inv = spd_inverse(pi, "select_banding: sample autocovariance");

  const int J0 = T / opt.l0;
  std::vector<std::vector<Matrix>> coefs(J0), innov(J0);
  int feasible = H - 1;
  for (int j = 0; j < J0; ++j) {
    if (!fit_prefix(u.middleCols(j * opt.l0, opt.l0), H - 1, coefs[j], innov[j]))
      throw NumericalError("select_banding: subsequence too short for any VAR fit");
    feasible = std::min(feasible, static_cast<int>(coefs[j].size()));
  }

  BandingChoice out;
  double best = std::numeric_limits<double>::infinity();
  for (int qb = 1; qb <= feasible; ++qb) {
    double risk = 0.0;
    for (int j = 0; j < J0; ++j) {
      VarLadder lad(std::vector<Matrix>(coefs[j].begin(), coefs[j].begin() + qb),
                    std::vector<Matrix>(innov[j].begin(), innov[j].begin() + qb + 1));
      const Matrix diff = materialize_small(BiamDecomposition(std::move(lad), H)) - pi_inv;
      risk += opt.norm == 1 ? norm1(diff) : norm2(diff);
    }
    risk /= J0;
    out.candidates.push_back(qb);
    out.risk.push_back(risk);
    if (risk < best) {
      best = risk;
      out.q = qb;
    }
  }
  return out;
}

int select_banding(const Matrix& u, const BandingOptions& opt) { return select_banding_detail(u, opt).q; }

int select_banding(const Matrix& u) { return select_banding(u, BandingOptions::defaults(static_cast<int>(u.cols()))); }

}  // namespace fmgls
