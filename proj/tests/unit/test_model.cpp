#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>

#include "doctest.h"
#include "fmgls/error.hpp"
#include "fmgls/model.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace fmgls;
using testing_support::random_panel;

TEST_SUITE("model") {
  TEST_CASE("spec parameter count and offsets") {
    CprSpec spec({{1, 2}, {0, 1}, {2, 3}});
    CHECK(spec.params() == 4 + 2 + 6);
    CHECK(spec.offset(1) == 4);
    CHECK(spec.width(2) == 6);
    CHECK_THROWS_AS(CprSpec({{1, 0}}), ValidationError);
    CHECK_THROWS_AS(CprSpec({{-1, 1}}), ValidationError);
    CHECK_THROWS_AS(CprSpec(std::vector<EquationOrder>{}), ValidationError);
  }

  TEST_CASE("validate rejects short or mismatched panels") {
    const CprSpec spec = CprSpec::uniform(2, 1, 2);
    CHECK_THROWS_AS(validate(spec, PanelData(Matrix::Ones(2, 4), Matrix::Ones(2, 4))), ValidationError);
    CHECK_THROWS_AS(validate(spec, PanelData(Matrix::Ones(3, 10), Matrix::Ones(3, 10))), ValidationError);
    Matrix y = Matrix::Ones(2, 10);
    y(0, 3) = std::nan("");
    CHECK_THROWS_AS(validate(spec, PanelData(y, Matrix::Ones(2, 10))), ValidationError);
    CHECK_NOTHROW(validate(spec, PanelData(Matrix::Ones(2, 5), Matrix::Ones(2, 5))));
  }

  TEST_CASE("regressor rows") {
    const CprSpec quad = CprSpec::uniform(1, 1, 2);
    PanelData zero(Matrix::Ones(1, 6), Matrix::Zero(1, 6));
    const auto z = build_regressors(quad, zero);
    for (int t = 1; t <= 6; ++t) CHECK(z.block(0).row(t - 1) == (Eigen::RowVector4d() << 1, t, 0, 0).finished());

    Matrix g(1, 6);
    g << 1.5, 2, 2.5, 3, 3.5, 4;
    const auto z2 = build_regressors(quad, PanelData(Matrix::Ones(1, 6), g));
    CHECK(z2.block(0)(2, 2) == 2.5);
    CHECK(z2.block(0)(2, 3) == 6.25);

    Matrix x(1, 3);
    x << 2, 1, 1;
    const auto lin = build_regressors(CprSpec::uniform(1, 0, 1), PanelData(Matrix::Ones(1, 3), x));
    CHECK(lin.block(0).row(0) == Eigen::RowVector2d(1, 2));
  }

  TEST_CASE("stacked regressors match dense construction") {
    const PanelData d = random_panel(3, 9, 0.2, 11);
    const CprSpec spec({{1, 2}, {0, 1}, {2, 3}});
    const auto z = build_regressors(spec, d);
    const Matrix dense = oracle::stacked_regressors({{1, 2}, {0, 1}, {2, 3}}, d.x);
    CHECK((z.stacked() - dense).norm() == doctest::Approx(0.0));
    const Vector beta = Vector::LinSpaced(spec.params(), -1, 1);
    const Vector fit = oracle::stacked(z.fitted(beta));
    CHECK((fit - dense * beta).norm() < 1e-9);
    std::mt19937_64 rng(3);
    const Matrix w = oracle::random_spd(3, rng);
    const Matrix wfull = Eigen::kroneckerProduct(Matrix::Identity(9, 9), w);
    CHECK((z.gram(w) - dense.transpose() * wfull * dense).norm() < 1e-8 * (1 + z.gram(w).norm()));
    CHECK((z.cross(w, d.y) - dense.transpose() * wfull * oracle::stacked(d.y)).norm() < 1e-8 * (1 + d.y.norm()));
  }

  TEST_CASE("scaling matrix") {
    const auto g = scaling_matrix(CprSpec::uniform(1, 1, 2), 100).diag;
    CHECK(g(0) == doctest::Approx(std::pow(100.0, -0.5)));
    CHECK(g(1) == doctest::Approx(std::pow(100.0, -1.5)));
    CHECK(g(2) == doctest::Approx(std::pow(100.0, -1.0)));
    CHECK(g(3) == doctest::Approx(std::pow(100.0, -1.5)));
    const auto g4 = scaling_matrix(CprSpec::uniform(1, 0, 1), 4).diag;
    CHECK(g4(0) == 0.5);
    CHECK(g4(1) == 0.25);
    const auto g1 = scaling_matrix(CprSpec({{2, 3}, {0, 1}}), 1).diag;
    CHECK((g1.array() == 1.0).all());
    const CprSpec big({{3, 2}});
    const auto gb = scaling_matrix(big, 50).diag;
    CHECK((gb.array() > 0).all());
    for (int t = 1; t <= 50; ++t)
      for (int k = 0; k <= 3; ++k) {
        const double e = gb(k) * std::pow(t, k);
        CHECK(e >= 0);
        CHECK(e <= std::pow(50.0, -0.5) * (1 + 1e-12));
      }
  }

  TEST_CASE("bhat vectors") {
    Matrix x = Matrix::Ones(1, 5);
    auto b = bhat_vectors(CprSpec::uniform(1, 1, 2), PanelData(Matrix::Ones(1, 5), x));
    CHECK(b[0] == (Vector(4) << 0, 0, 5, 10).finished());
    Matrix x2(1, 2);
    x2 << 1, 2;
    b = bhat_vectors(CprSpec::uniform(1, 0, 3), PanelData(Matrix::Ones(1, 2), x2));
    CHECK(b[0] == (Vector(4) << 0, 2, 6, 15).finished());
    const PanelData d = random_panel(2, 30, 0.0, 5);
    b = bhat_vectors(CprSpec({{1, 1}, {0, 4}}), d);
    const auto ref = oracle::bhat({{1, 1}, {0, 4}}, d.x);
    CHECK(b[0](2) == 30.0);
    CHECK((b[1] - ref[1]).norm() < 1e-9 * ref[1].norm());
  }

  TEST_CASE("residuals") {
    const CprSpec spec = CprSpec::uniform(2, 1, 2);
    PanelData d = random_panel(2, 20, 0.0, 2);
    const Vector beta = (Vector(8) << 1, 0.5, 2, -0.3, 1, 0.5, 2, -0.3).finished();
    d.y = build_regressors(spec, d).fitted(beta);
    CHECK(residuals(spec, d, beta).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(residuals(spec, d, Vector::Zero(8)) == d.y);
    // changing equation 2's coefficients leaves equation 1's residuals alone
    Vector beta2 = beta;
    beta2.tail(4).setConstant(7.0);
    CHECK(residuals(spec, d, beta2).row(0) == residuals(spec, d, beta).row(0));
  }

  TEST_CASE("differences use x0") {
    Matrix x(2, 3);
    x << 1, 3, 6, 2, 2, 2;
    PanelData d(Matrix::Zero(2, 3), x, Vector::Constant(2, 1.0));
    const Matrix v = d.differences();
    CHECK(v(0, 0) == 0);
    CHECK(v(0, 2) == 3);
    CHECK(v(1, 0) == 1);
  }
}
