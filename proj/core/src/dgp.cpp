#include "fmgls/dgp.hpp"

#include <cmath>

#include "fmgls/error.hpp"

namespace fmgls {

std::string setting_name(Setting s) {
  switch (s) {
    case Setting::A: return "A";
    case Setting::B: return "B";
    case Setting::C_size: return "C_size";
    case Setting::C_power1: return "C_power1";
    case Setting::C_power2: return "C_power2";
    case Setting::C_power3: return "C_power3";
  }
  return "unknown";
}

Setting parse_setting(const std::string& s) {
  for (Setting k : {Setting::A, Setting::B, Setting::C_size, Setting::C_power1, Setting::C_power2, Setting::C_power3})
    if (setting_name(k) == s) return k;
  throw ValidationError("unknown setting '" + s + "'");
}

void DgpConfig::validate() const {
  require(n >= 1, "n must be positive");
  require(T >= 10, "T must be at least 10");
  require(presample >= 0, "presample must be nonnegative");
  for (double r : {rho1, rho2, rho3, rho4}) require(r >= 0.0 && r < 1.0, "rho must lie in [0, 1)");
  if (setting != Setting::A) {
    require(lambda_low >= 0.0 && lambda_low <= lambda_high && lambda_high < 1.0,
            "need 0 <= lambda_low <= lambda_high < 1");
    require(theta > -1.0 / (2 * n - 1) && theta < 1.0, "theta gives a non-PD innovation covariance");
  }
  require(J >= 0 && J <= n, "J must lie in [0, n]");
}

Matrix toeplitz_sigma(int m, double rho) {
  require(m >= 1, "toeplitz_sigma: m must be positive");
  require(std::abs(rho) < 1.0, "toeplitz_sigma: |rho| must be below 1");
  require(m == 1 || rho > -1.0 / (m - 1), "toeplitz_sigma: matrix is not positive definite");
  Matrix s = Matrix::Constant(m, m, rho);
  s.diagonal().setOnes();
  return s;
}

namespace {

Matrix sym_sqrt(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  return es.operatorSqrt();
}

constexpr double kBeta[4] = {1.0, 1.0, 5.0, -0.3};

Vector null_beta(int n) {
  Vector b(4 * n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 4; ++k) b(4 * i + k) = kBeta[k];
  return b;
}

Matrix cumulate(const Matrix& v) {
  Matrix x(v.rows(), v.cols());
  x.col(0) = v.col(0);
  for (Eigen::Index t = 1; t < v.cols(); ++t) x.col(t) = x.col(t - 1) + v.col(t);
  return x;
}

Matrix quadratic_y(const Matrix& x, const Matrix& u) {
  Matrix y(u.rows(), u.cols());
  for (Eigen::Index t = 0; t < u.cols(); ++t)
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      const double xv = x(i, t);
      y(i, t) = kBeta[0] + kBeta[1] * (t + 1.0) + kBeta[2] * xv + kBeta[3] * xv * xv + u(i, t);
    }
  return y;
}

// u, v after the VARMA recursion of Settings B/C, n x T each.
void varma_errors(const DgpConfig& c, const Matrix& l1, const Matrix& l2, const Matrix& l3, Rng& rng, Matrix& u,
                  Matrix& v) {
  const int n = c.n;
  const Matrix f = sym_sqrt(toeplitz_sigma(2 * n, c.theta));
  u.resize(n, c.T);
  v.resize(n, c.T);
  Vector uc = Vector::Zero(n), vc = Vector::Zero(n), eta_prev = Vector::Zero(n);
  for (int s = 0; s < c.presample + c.T; ++s) {
    const Vector z = f * rng.normal_vector(2 * n);
    const Vector eta = z.head(n);
    uc = l1 * uc + eta + l2 * eta_prev;
    vc = l3 * vc + z.tail(n);
    eta_prev = eta;
    if (s >= c.presample) {
      u.col(s - c.presample) = uc;
      v.col(s - c.presample) = vc;
    }
  }
}

}  // namespace

Matrix random_lambda(int n, double lo, double hi, int unit_roots, Rng& rng) {
  Matrix u, g;
  for (int attempt = 0;; ++attempt) {
    if (attempt > 1000) throw NumericalError("random_lambda: could not draw a well-conditioned U");
    u = rng.uniform_matrix(n, n);
    g = u.transpose() * u;
    Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
    const double mn = es.eigenvalues().minCoeff();
    if (mn > 0.0 && es.eigenvalues().maxCoeff() / mn < 1e8) break;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  const Matrix h = u * es.operatorInverseSqrt();
  Vector l(n);
  for (int j = 0; j < n; ++j) l(j) = j < unit_roots ? 1.0 : rng.uniform(lo, hi);
  return h * l.asDiagonal() * h.transpose();
}

CprSpec simulation_spec(int n) { return CprSpec::uniform(n, 1, 2); }

SimulatedPanel generate_setting_a(const DgpConfig& c, Rng& rng) {
  c.validate();
  const int n = c.n;
  const Matrix f3 = sym_sqrt(toeplitz_sigma(n, c.rho3));
  const Matrix f4 = sym_sqrt(toeplitz_sigma(n, c.rho4));
  Matrix u(n, c.T), v(n, c.T);
  Vector uc = Vector::Zero(n), e_prev = Vector::Zero(n);
  for (int s = 0; s < c.presample + c.T; ++s) {
    const Vector eps = f3 * rng.normal_vector(n);
    const Vector e = f4 * rng.normal_vector(n);
    uc = c.rho1 * uc + eps + c.rho2 * e;
    if (s >= c.presample) {
      u.col(s - c.presample) = uc;
      v.col(s - c.presample) = e + 0.5 * e_prev;
    }
    e_prev = e;
  }
  const Matrix x = cumulate(v);
  return {PanelData(quadratic_y(x, u), x), null_beta(n)};
}

SimulatedPanel generate_setting_b(const DgpConfig& c, Rng& rng) {
  c.validate();
  const Matrix l1 = random_lambda(c.n, c.lambda_low, c.lambda_high, 0, rng);
  const Matrix l2 = random_lambda(c.n, c.lambda_low, c.lambda_high, 0, rng);
  const Matrix l3 = random_lambda(c.n, c.lambda_low, c.lambda_high, 0, rng);
  Matrix u, v;
  varma_errors(c, l1, l2, l3, rng, u, v);
  const Matrix x = cumulate(v);
  return {PanelData(quadratic_y(x, u), x), null_beta(c.n)};
}

SimulatedPanel generate_setting_c(const DgpConfig& c, Rng& rng) {
  c.validate();
  const bool size = c.setting == Setting::C_size;
  const double lo1 = size ? c.lambda_low : 0.1;
  const double hi1 = size ? c.lambda_high : 0.5;
  const int units = c.setting == Setting::C_power1 ? c.J : 0;
  const Matrix l1 = random_lambda(c.n, lo1, hi1, units, rng);
  const Matrix l2 = random_lambda(c.n, 0.1, 0.5, 0, rng);
  const Matrix l3 = random_lambda(c.n, 0.1, 0.5, 0, rng);
  Matrix u, v;
  varma_errors(c, l1, l2, l3, rng, u, v);
  const Matrix x = cumulate(v);
  Matrix y = quadratic_y(x, u);
  if (c.setting == Setting::C_power2) {
    for (int i = 0; i < c.J; ++i) y.row(i) += 0.01 * x.row(i).array().cube().matrix();
  } else if (c.setting == Setting::C_power3) {
    for (int i = 0; i < c.J; ++i) y.row(i) = cumulate(u.row(i));
  }
  return {PanelData(std::move(y), x), null_beta(c.n)};
}

SimulatedPanel generate(const DgpConfig& c, Rng& rng) {
  switch (c.setting) {
    case Setting::A: return generate_setting_a(c, rng);
    case Setting::B: return generate_setting_b(c, rng);
    default: return generate_setting_c(c, rng);
  }
}

SimulatedPanel generate(const DgpConfig& c) {
  Rng rng(c.seed);
  return generate(c, rng);
}

PopulationQuantities setting_a_population(const DgpConfig& c) {
  require(c.setting == Setting::A, "population quantities are available for Setting A only");
  c.validate();
  const int n = c.n;
  const double r = c.rho1;
  const Matrix s4 = toeplitz_sigma(n, c.rho4);
  const Matrix see = toeplitz_sigma(n, c.rho3) + c.rho2 * c.rho2 * s4;  // Var(eta), eta = eps + rho2 e
  const Matrix cc = c.rho2 * s4;                                        // Cov(eta, e)
  Matrix omega(2 * n, 2 * n), delta(2 * n, 2 * n), sigma(2 * n, 2 * n);
  omega << see / ((1 - r) * (1 - r)), 1.5 * cc / (1 - r), 1.5 * cc / (1 - r), 2.25 * s4;
  delta << see / ((1 - r * r) * (1 - r)), (1.5 + 0.5 * r) * cc, (1 + 0.5 * r) / (1 - r) * cc, 1.75 * s4;
  sigma << see, cc, cc, s4;
  LongRunCov lr;
  lr.omega = omega;
  lr.delta = delta;
  lr.sigma = sigma;
  lr.source = LrSource::supplied;
  std::vector<Matrix> coefs{r * Matrix::Identity(n, n)};
  std::vector<Matrix> innov{see / (1 - r * r), see};
  return {lr, VarLadder(std::move(coefs), std::move(innov))};
}

}  // namespace fmgls
