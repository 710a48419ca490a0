#include <cmath>
#include <random>
#include <unsupported/Eigen/KroneckerProduct>

#include "doctest.h"
#include "fmgls/error.hpp"
#include "fmgls/estimators.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace fmgls;
using testing_support::gaussian;
using testing_support::random_panel;
using testing_support::rel_err;

namespace {

std::vector<oracle::Order> orders(const CprSpec& spec) {
  std::vector<oracle::Order> o;
  for (int i = 0; i < spec.equations(); ++i) o.push_back({spec[i].trend_order, spec[i].power_order});
  return o;
}

Matrix diffs(const PanelData& d) {
  Matrix v(d.n(), d.T());
  for (int t = 0; t < d.T(); ++t) v.col(t) = d.x.col(t) - (t == 0 ? Vector(d.x0) : Vector(d.x.col(t - 1)));
  return v;
}

Vector stack_b(const std::vector<Vector>& b, const Vector& w) {
  int len = 0;
  for (const auto& bi : b) len += static_cast<int>(bi.size());
  Vector out(len);
  int k = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    out.segment(k, b[i].size()) = w(i) * b[i];
    k += static_cast<int>(b[i].size());
  }
  return out;
}

Matrix kron_eye(int T, const Matrix& w) {
  return Eigen::kroneckerProduct(Matrix::Identity(T, T), w).eval();
}

struct Parts {
  Matrix uu, uv, vu, vv, dvu, dvv;
};

Parts parts(const LongRunCov& lr) {
  const int n = lr.n();
  return {lr.omega.topLeftCorner(n, n),    lr.omega.topRightCorner(n, n), lr.omega.bottomLeftCorner(n, n),
          lr.omega.bottomRightCorner(n, n), lr.delta.bottomLeftCorner(n, n), lr.delta.bottomRightCorner(n, n)};
}

Vector dense_sols(const CprSpec& spec, const PanelData& d, const LongRunCov& lr) {
  const Parts p = parts(lr);
  const Matrix Z = oracle::stacked_regressors(orders(spec), d.x);
  const Matrix yplus = d.y - p.uv * p.vv.inverse() * diffs(d);
  const Matrix dplus = p.dvu - p.dvv * p.vv.inverse() * p.vu;
  const Vector a = stack_b(oracle::bhat(orders(spec), d.x), dplus.diagonal());
  return (Z.transpose() * Z).inverse() * (Z.transpose() * oracle::stacked(yplus) - a);
}

Vector dense_sur(const CprSpec& spec, const PanelData& d, const LongRunCov& lr) {
  const Parts p = parts(lr);
  const Matrix Z = oracle::stacked_regressors(orders(spec), d.x);
  const Matrix yplus = d.y - p.uv * p.vv.inverse() * diffs(d);
  const Matrix dplus = p.dvu - p.dvv * p.vv.inverse() * p.vu;
  const Matrix winv = (p.uu - p.uv * p.vv.inverse() * p.vu).inverse();
  Vector s(d.n());
  for (int i = 0; i < d.n(); ++i) s(i) = dplus.row(i).dot(winv.col(i));
  const Vector a = stack_b(oracle::bhat(orders(spec), d.x), s);
  const Matrix W = kron_eye(d.T(), winv);
  return (Z.transpose() * W * Z).inverse() * (Z.transpose() * W * oracle::stacked(yplus) - a);
}

Matrix dense_precision(const VarLadder& lad, int T) {
  std::vector<Matrix> A, S;
  for (int l = 1; l <= lad.order(); ++l) A.push_back(lad.coefs(l));
  for (int l = 0; l <= lad.order(); ++l) S.push_back(lad.innovation(l));
  return oracle::dense_precision(A, S, T);
}

Vector dense_gls(const CprSpec& spec, const PanelData& d, const LongRunCov& lr, const VarLadder& lad) {
  const Parts p = parts(lr);
  const int n = d.n();
  const Matrix Z = oracle::stacked_regressors(orders(spec), d.x);
  const Matrix P = dense_precision(lad, d.T());
  const Matrix see = lr.sigma->topLeftCorner(n, n);
  const Matrix sep = lr.sigma->bottomLeftCorner(n, n);
  const Matrix back = p.vv.inverse() * p.vu * p.uu.inverse();
  Vector s(n);
  for (int i = 0; i < n; ++i) s(i) = sep.row(i).dot(see.inverse().col(i)) - p.dvv.row(i).dot(back.col(i));
  const Vector b = stack_b(oracle::bhat(orders(spec), d.x), s);
  const Matrix E = kron_eye(d.T(), p.uu.inverse() * p.uv * p.vv.inverse());
  return (Z.transpose() * P * Z).inverse() *
         (Z.transpose() * P * oracle::stacked(d.y) - Z.transpose() * E * oracle::stacked(diffs(d)) - b);
}

LongRunCov random_lr(int n, std::mt19937_64& rng) {
  LongRunCov lr;
  lr.omega = oracle::random_spd(2 * n, rng);
  lr.delta = 0.5 * gaussian(2 * n, 2 * n, rng);
  lr.sigma = oracle::random_spd(2 * n, rng);
  return lr;
}

LongRunCov exogenous_lr(int n, std::mt19937_64& rng) {
  LongRunCov lr = random_lr(n, rng);
  lr.omega.topRightCorner(n, n).setZero();
  lr.omega.bottomLeftCorner(n, n).setZero();
  lr.delta.bottomLeftCorner(n, n).setZero();
  lr.sigma->topRightCorner(n, n).setZero();
  lr.sigma->bottomLeftCorner(n, n).setZero();
  return lr;
}

VarLadder identity_ladder(int n, int q) {
  std::vector<Matrix> a, s;
  for (int l = 1; l <= q; ++l) a.push_back(Matrix::Zero(n, n * l));
  for (int l = 0; l <= q; ++l) s.push_back(Matrix::Identity(n, n));
  return VarLadder(a, s);
}

const CprSpec kMixed({{1, 2}, {0, 1}, {1, 3}});

}  // namespace

TEST_SUITE("estimators") {
  TEST_CASE("ols recovers noiseless coefficients and separates by equation") {
    PanelData d = random_panel(3, 40, 0.3, 1);
    const Vector beta = Vector::LinSpaced(kMixed.params(), -1.5, 2.0);
    d.y = build_regressors(kMixed, d).fitted(beta);
    CHECK(rel_err(ols(kMixed, d).beta, beta) < 1e-8);

    const PanelData r = random_panel(3, 40, 0.3, 2);
    const Vector b = ols(kMixed, r).beta;
    const Matrix Z = oracle::stacked_regressors(orders(kMixed), r.x);
    for (int i = 0; i < 3; ++i) {
      Matrix zi(40, kMixed.width(i));
      for (int t = 0; t < 40; ++t) zi.row(t) = Z.block(3 * t + i, kMixed.offset(i), 1, kMixed.width(i));
      CHECK(rel_err(b.segment(kMixed.offset(i), kMixed.width(i)), oracle::least_squares(zi, r.y.row(i).transpose())) <
            1e-10);
    }
    const EstimationResult o = ols(kMixed, r);
    CHECK(rel_err(o.residuals, r.y - build_regressors(kMixed, r).fitted(o.beta)) < 1e-14);
    CHECK_THROWS_AS(o.phi(), ValidationError);
  }

  TEST_CASE("fm estimators match dense formulas") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 20; ++rep) {
      const int n = rep % 2 ? 3 : 2;
      const int T = n == 3 ? 20 : 30;
      const CprSpec spec = n == 3 ? kMixed : CprSpec::uniform(2, 1, 2);
      PanelData d = random_panel(n, T, 0.4, 100 + rep);
      d.x0 = gaussian(n, 1, rng);
      const LongRunCov lr = random_lr(n, rng);
      const FmWeights w = fm_weights(lr);
      CHECK(rel_err(fm_sols(spec, d, lr, w).beta, dense_sols(spec, d, lr)) < 1e-9);
      CHECK(rel_err(fm_sur(spec, d, lr, w).beta, dense_sur(spec, d, lr)) < 1e-9);
      const VarLadder lad = fit_var_ladder(gaussian(n, T, rng), 1 + rep % 3);
      CHECK(rel_err(fm_gls(spec, d, BiamDecomposition(lad, T), lr).beta, dense_gls(spec, d, lr, lad)) < 1e-9);
    }
  }

  TEST_CASE("small hand-sized systems") {
    Matrix x(1, 3), y(1, 3);
    x << 0.5, -1.0, 2.0;
    y << 1.0, 0.3, 4.0;
    const PanelData d(y, x, Vector::Constant(1, 0.2));
    const CprSpec spec = CprSpec::uniform(1, 0, 1);
    LongRunCov lr;
    lr.omega.resize(2, 2);
    lr.omega << 2.0, 0.4, 0.4, 1.0;
    lr.delta.resize(2, 2);
    lr.delta << 1.0, 0.1, 0.3, 0.6;
    // y+ = y - 0.4 v, correction 0.3 - 0.6 * 0.4 = 0.06 times b = (0, T)
    const Vector yp = (Vector(3) << 1.0 - 0.4 * 0.3, 0.3 + 0.4 * 1.5, 4.0 - 0.4 * 3.0).finished();
    Matrix Z(3, 2);
    Z << 1, 0.5, 1, -1, 1, 2;
    const Vector expect = (Z.transpose() * Z).inverse() * (Z.transpose() * yp - Eigen::Vector2d(0, 0.06 * 3));
    CHECK(rel_err(fm_sols(spec, d, lr, fm_weights(lr)).beta, expect) < 1e-12);

    Matrix x4(2, 4), y4(2, 4);
    x4 << 0.1, 0.7, -0.2, 1.1, 1.0, 0.4, 0.9, 1.6;
    y4 << 1.0, 2.0, 0.5, 3.0, -1.0, 0.0, 2.2, 1.4;
    std::mt19937_64 rng(4);
    const PanelData d4(y4, x4);
    const CprSpec s4 = CprSpec::uniform(2, 0, 1);
    const LongRunCov l4 = random_lr(2, rng);
    const VarLadder lad = fit_var_ladder(gaussian(2, 12, rng), 2);
    const BiamDecomposition bd(lad, 4);
    const Matrix Zd = oracle::stacked_regressors(orders(s4), x4);
    const Matrix P = materialize_small(bd);
    CHECK(rel_err(P, dense_precision(lad, 4)) < 1e-12);
    CHECK(rel_err(fm_gls(s4, d4, bd, l4).beta, dense_gls(s4, d4, l4, lad)) < 1e-9);
  }

  TEST_CASE("zero cross covariances reduce every estimator to ols") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 10; ++rep) {
      const PanelData d = random_panel(3, 60, 0.5, 200 + rep);
      const LongRunCov lr = exogenous_lr(3, rng);
      const FmWeights w = fm_weights(lr);
      const Vector b = ols(kMixed, d).beta;
      CHECK(rel_err(fm_sols(kMixed, d, lr, w).beta, b) < 1e-12);
      CHECK(rel_err(estimate_with_given_covariances(kMixed, d, Method::gls_inf, lr, w, identity_ladder(3, 2)).beta, b) <
            1e-12);
      const PanelData one(d.y.topRows(1), d.x.topRows(1), d.x0.head(1));
      const CprSpec s1 = CprSpec::uniform(1, 1, 2);
      const LongRunCov l1 = exogenous_lr(1, rng);
      CHECK(rel_err(fm_sur(s1, one, l1, fm_weights(l1)).beta, ols(s1, one).beta) < 1e-12);
    }
  }

  TEST_CASE("single equation SUR equals SOLS") {
    std::mt19937_64 rng(6);
    for (int rep = 0; rep < 10; ++rep) {
      const PanelData d = random_panel(1, 50, 0.2, 300 + rep);
      const CprSpec s = CprSpec::uniform(1, 1, 2);
      const LongRunCov lr = random_lr(1, rng);
      const FmWeights w = fm_weights(lr);
      CHECK(rel_err(fm_sur(s, d, lr, w).beta, fm_sols(s, d, lr, w).beta) < 1e-10);
    }
  }

  TEST_CASE("intercept equivariance") {
    std::mt19937_64 rng(7);
    const PanelData d = random_panel(3, 50, 0.3, 8);
    PanelData shifted = d;
    shifted.y.row(1).array() += 2.5;
    Vector e = Vector::Zero(kMixed.params());
    e(kMixed.offset(1)) = 2.5;
    CHECK(rel_err(ols(kMixed, shifted).beta - ols(kMixed, d).beta, e) < 1e-10);
    const LongRunCov lr = random_lr(3, rng);
    const FmWeights w = fm_weights(lr);
    CHECK(rel_err(fm_sols(kMixed, shifted, lr, w).beta - fm_sols(kMixed, d, lr, w).beta, e) < 1e-9);
    CHECK(rel_err(fm_sur(kMixed, shifted, lr, w).beta - fm_sur(kMixed, d, lr, w).beta, e) < 1e-9);
  }

  TEST_CASE("infeasible GLS with an AR(1) filter is Prais-Winsten") {
    const double rho = 0.6;
    const PanelData d = random_panel(1, 80, rho, 9);
    const CprSpec s = CprSpec::uniform(1, 1, 2);
    LongRunCov lr;
    lr.omega = Matrix::Identity(2, 2);
    lr.delta = Matrix::Zero(2, 2);
    lr.sigma = Matrix::Identity(2, 2);
    const VarLadder ar({Matrix::Constant(1, 1, rho)},
                       {Matrix::Constant(1, 1, 1.0 / (1 - rho * rho)), Matrix::Constant(1, 1, 1.0)});
    const Vector b = estimate_with_given_covariances(s, d, Method::gls_inf, lr, fm_weights(lr), ar).beta;
    const Matrix Z = oracle::stacked_regressors(orders(s), d.x);
    CHECK(rel_err(b, oracle::prais_winsten(Z, d.y.row(0).transpose(), rho)) < 1e-10);
  }

  TEST_CASE("supplying feasible quantities reproduces the feasible result") {
    const PanelData d = random_panel(3, 120, 0.5, 10);
    const CprSpec s = CprSpec::uniform(3, 1, 2);
    for (Method m : {Method::sols_fm, Method::sur_fm}) {
      const EstimationResult f = estimate(s, d, m);
      const EstimationResult g = estimate_with_given_covariances(s, d, m, *f.lr, fm_weights(*f.lr));
      CHECK(f.beta == g.beta);
    }
    const EstimationResult f = estimate(s, d, Method::fgls_fm);
    const EstimationResult g =
        estimate_with_given_covariances(s, d, Method::fgls_fm, *f.lr, fm_weights(*f.lr), f.biam->ladder());
    CHECK(f.beta == g.beta);
    CHECK(method_name(g.method) == "FM-GLS");
    CHECK(method_name(Method::gls_inf) == "infGLS");
    CHECK_THROWS_AS(estimate_with_given_covariances(s, d, Method::gls_inf, *f.lr, fm_weights(*f.lr)), ValidationError);
    CHECK_THROWS_AS(estimate(s, d, Method::gls_inf), ValidationError);
  }

  TEST_CASE("wald sandwiches match dense products") {
    std::mt19937_64 rng(11);
    const PanelData d = random_panel(3, 20, 0.3, 12);
    const LongRunCov lr = random_lr(3, rng);
    const FmWeights w = fm_weights(lr);
    const Parts p = parts(lr);
    const Matrix ouv = p.uu - p.uv * p.vv.inverse() * p.vu;
    const Matrix Z = oracle::stacked_regressors(orders(kMixed), d.x);
    const Matrix zz = (Z.transpose() * Z).inverse();
    const Matrix sols = zz * Z.transpose() * kron_eye(20, ouv) * Z * zz;
    CHECK(rel_err(fm_sols(kMixed, d, lr, w).phi(), sols) < 1e-9);
    const Matrix sur = (Z.transpose() * kron_eye(20, ouv.inverse()) * Z).inverse();
    CHECK(rel_err(fm_sur(kMixed, d, lr, w).phi(), sur) < 1e-9);
    const Matrix uinv = p.uu.inverse();
    const Matrix bi = (Z.transpose() * kron_eye(20, uinv) * Z).inverse();
    const Matrix gls = bi * Z.transpose() * kron_eye(20, uinv * ouv * uinv) * Z * bi;
    const VarLadder lad = fit_var_ladder(gaussian(3, 20, rng), 1);
    CHECK(rel_err(fm_gls(kMixed, d, BiamDecomposition(lad, 20), lr).phi(), gls) < 1e-9);
  }

  TEST_CASE("pipelines are consistent on a simulated system") {
    const PanelData d = random_panel(3, 1000, 0.5, 13);
    const CprSpec s = CprSpec::uniform(3, 1, 2);
    for (Method m : {Method::ols, Method::sols_fm, Method::sur_fm, Method::fgls_fm}) {
      const Vector b = estimate(s, d, m).beta;
      for (int i = 0; i < 3; ++i) {
        CHECK(b(4 * i + 2) == doctest::Approx(2.0).epsilon(0.02));
        CHECK(b(4 * i + 3) == doctest::Approx(-0.3).epsilon(0.01));
      }
    }
    PipelineOptions o;
    o.lr = LrPath::biam;
    o.q = 2;
    const EstimationResult r = fm_sols(s, d, o);
    CHECK(r.lr->source == LrSource::biam);
    CHECK(r.lr->q == 2);
    PipelineOptions k;
    k.bandwidth = 4.0;
    CHECK(fm_sur(s, d, k).lr->bandwidth == 4.0);
    o.q = 3;
    o.r = 1;
    const EstimationResult g = fm_gls(s, d, o);
    CHECK(g.biam->q() == 3);
    CHECK(g.lr->r == 1);
  }

  TEST_CASE("degenerate inputs") {
    const PanelData d = random_panel(2, 30, 0.3, 14);
    const CprSpec s = CprSpec::uniform(2, 1, 2);
    LongRunCov lr;
    lr.omega = Matrix::Identity(4, 4);
    lr.omega.bottomRightCorner(2, 2).setZero();
    lr.delta = Matrix::Zero(4, 4);
    CHECK_THROWS_AS(fm_weights(lr), NumericalError);
    PanelData flat = d;
    flat.x.setConstant(1.0);
    flat.x0.setConstant(1.0);
    CHECK_THROWS_AS(ols(s, flat), NumericalError);
  }

  TEST_CASE("turning points") {
    CHECK(turning_point(0.0, -1.0) == 1.0);
    // coefficients rounded to three decimals move the exponent by up to 0.5%
    CHECK(turning_point(8.762, -0.443) == doctest::Approx(19795).epsilon(0.01));
    CHECK(turning_point(12.927, -0.645) == doctest::Approx(22420).epsilon(0.01));
    CHECK_THROWS_AS(turning_point(1.0, 0.0), ValidationError);
  }
}
