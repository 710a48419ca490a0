#include "fmgls/linalg.hpp"

#include "fmgls/error.hpp"

namespace fmgls {

Matrix spd_inverse(const Matrix& a, const std::string& what) {
  Eigen::LLT<Matrix> llt(symmetrize(a));
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-14)
    throw NumericalError(what + ": matrix is singular or not positive definite");
  Matrix inv = llt.solve(Matrix::Identity(a.rows(), a.cols()));
  return symmetrize(inv);
}

Matrix general_inverse(const Matrix& a, const std::string& what) {
  Eigen::PartialPivLU<Matrix> lu(a);
  if (lu.rcond() < 1e-14) throw NumericalError(what + ": matrix is singular");
  return lu.inverse();
}

void check_positive_definite(const Matrix& a, double tol, const std::string& what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError(what + ": eigen decomposition failed");
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(hi > 0.0) || lo < tol * hi)
    throw NumericalError(what + ": not positive definite within tolerance");
}

double norm1(const Matrix& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

double norm2(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

}  // namespace fmgls
