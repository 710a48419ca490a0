#pragma once

#include <Eigen/Dense>
#include <string>

namespace fmgls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

// Inverse of a symmetric positive definite matrix. Throws NumericalError
// naming `what` when the Cholesky factorization fails or the matrix is
// numerically singular (reciprocal condition below 1e-14).
Matrix spd_inverse(const Matrix& a, const std::string& what);

// Inverse of a general square matrix via partial-pivot LU; throws when
// the matrix is numerically singular.
Matrix general_inverse(const Matrix& a, const std::string& what);

// Throws NumericalError if min eigenvalue < tol * max eigenvalue.
void check_positive_definite(const Matrix& a, double tol, const std::string& what);

// 1-norm (max abs column sum) and spectral norm.
double norm1(const Matrix& a);
double norm2(const Matrix& a);

}  // namespace fmgls
