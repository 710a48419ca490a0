#include <cmath>

#include "doctest.h"
#include "fmgls/error.hpp"
#include "fmgls/experiment.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace fmgls;
using testing_support::rel_err;

namespace {

Matrix true_errors(const SimulatedPanel& p) {
  return p.data.y - build_regressors(simulation_spec(p.data.n()), p.data).fitted(p.beta);
}

double lag1_corr(const Eigen::RowVectorXd& u) {
  const Eigen::Index T = u.size();
  const double m = u.mean();
  const Eigen::RowVectorXd c = u.array() - m;
  return c.head(T - 1).dot(c.tail(T - 1)) / c.squaredNorm();
}

}  // namespace

TEST_SUITE("montecarlo") {
  TEST_CASE("toeplitz sigma") {
    CHECK(toeplitz_sigma(4, 0.0) == Matrix::Identity(4, 4));
    CHECK(toeplitz_sigma(2, 0.5) == (Matrix(2, 2) << 1, 0.5, 0.5, 1).finished());
    Eigen::SelfAdjointEigenSolver<Matrix> es(toeplitz_sigma(3, 0.8));
    CHECK(es.eigenvalues()(0) == doctest::Approx(0.2));
    CHECK(es.eigenvalues()(1) == doctest::Approx(0.2));
    CHECK(es.eigenvalues()(2) == doctest::Approx(2.6));
    CHECK_THROWS_AS(toeplitz_sigma(3, -0.5), ValidationError);
    CHECK_THROWS_AS(toeplitz_sigma(3, 1.0), ValidationError);
  }

  TEST_CASE("random lambda") {
    Rng rng(1);
    for (int rep = 0; rep < 200; ++rep) {
      const int n = 1 + rep % 5;
      const Matrix l = random_lambda(n, 0.1, 0.5, rep % 2, rng);
      CHECK((l - l.transpose()).norm() < 1e-12);
      Eigen::SelfAdjointEigenSolver<Matrix> es(l);
      const Vector ev = es.eigenvalues();
      if (rep % 2) {
        CHECK(ev.maxCoeff() == doctest::Approx(1.0));
        CHECK(ev.minCoeff() >= (n == 1 ? 1.0 - 1e-10 : 0.1 - 1e-10));
      } else {
        CHECK(ev.minCoeff() >= 0.1 - 1e-10);
        CHECK(ev.maxCoeff() <= 0.5 + 1e-10);
      }
    }
    CHECK(random_lambda(3, 0.0, 0.0, 0, rng).norm() < 1e-14);
  }

  TEST_CASE("setting A structure") {
    DgpConfig c;
    c.T = 100000;
    c.n = 2;
    c.set_rho(0.0);
    c.seed = 2;
    SimulatedPanel p = generate(c);
    CHECK(p.beta.head(4) == Eigen::Vector4d(1, 1, 5, -0.3));
    Matrix u = true_errors(p);
    const double bound = 3.0 / std::sqrt(c.T);
    CHECK(std::abs(lag1_corr(u.row(0))) < bound);

    // x is the running sum of v with x_0 = 0
    const Matrix v = p.data.differences();
    CHECK(p.data.x0 == Vector::Zero(2));
    Matrix x = v;
    for (int t = 1; t < c.T; ++t) x.col(t) += x.col(t - 1);
    CHECK(rel_err(x, p.data.x) < 1e-12);

    c.rho1 = 0.5;
    c.rho2 = 0.0;
    p = generate(c);
    u = true_errors(p);
    CHECK(std::abs(lag1_corr(u.row(1)) - 0.5) < 3.0 * std::sqrt(0.75 / c.T));
    const Matrix dv = p.data.differences();
    const double corr = (u.row(0).array() * dv.row(0).array()).mean() /
                        std::sqrt(u.row(0).squaredNorm() / c.T * dv.row(0).squaredNorm() / c.T);
    CHECK(std::abs(corr) < bound);
  }

  TEST_CASE("setting A population long-run quantities") {
    DgpConfig c;
    c.n = 2;
    c.T = 200000;
    c.rho1 = 0.4;
    c.rho2 = 0.5;
    c.rho3 = 0.3;
    c.rho4 = 0.6;
    c.seed = 3;
    const SimulatedPanel p = generate(c);
    Matrix xi(4, c.T);
    xi.topRows(2) = true_errors(p);
    xi.bottomRows(2) = p.data.differences();
    Matrix omega, delta;
    oracle::bartlett(xi, 150.0, omega, delta);
    const PopulationQuantities pop = setting_a_population(c);
    CHECK(rel_err(pop.lr.omega, omega) < 0.05);
    CHECK(rel_err(pop.lr.delta, delta) < 0.05);
    CHECK(pop.lr.sigma->bottomRightCorner(2, 2) == toeplitz_sigma(2, 0.6));
    CHECK(pop.ladder.order() == 1);
    CHECK(pop.ladder.coef(1, 1) == 0.4 * Matrix::Identity(2, 2));
    c.setting = Setting::B;
    CHECK_THROWS_AS(setting_a_population(c), ValidationError);
  }

  TEST_CASE("setting B and C designs") {
    DgpConfig c;
    c.setting = Setting::B;
    c.T = 50;
    c.lambda_low = c.lambda_high = 0.0;
    c.theta = 0.0;
    c.seed = 4;
    const SimulatedPanel b = generate(c);
    CHECK(b.data.T() == 50);

    // the power designs with J = 0 consume the same draws as the size design
    c.setting = Setting::C_size;
    c.lambda_low = 0.1;
    c.lambda_high = 0.5;
    c.J = 0;
    const SimulatedPanel s = generate(c);
    for (Setting k : {Setting::C_power1, Setting::C_power2, Setting::C_power3}) {
      c.setting = k;
      const SimulatedPanel q = generate(c);
      CHECK(q.data.y == s.data.y);
      CHECK(q.data.x == s.data.x);
    }

    c.setting = Setting::C_power3;
    c.J = 1;
    const SimulatedPanel d3 = generate(c);
    c.setting = Setting::C_size;
    c.J = 0;
    const Matrix u = true_errors(generate(c));
    Eigen::RowVectorXd rw = u.row(0);
    for (int t = 1; t < c.T; ++t) rw(t) += rw(t - 1);
    CHECK(rel_err(d3.data.y.row(0), rw) < 1e-12);
    CHECK(d3.data.y.row(1) == s.data.y.row(1));

    c.setting = Setting::C_power2;
    c.J = 3;
    const SimulatedPanel d2 = generate(c);
    const Matrix diff = d2.data.y - s.data.y;
    CHECK(rel_err(diff, 0.01 * s.data.x.array().cube().matrix()) < 1e-12);

    c.J = 4;
    CHECK_THROWS_AS(generate(c), ValidationError);
    CHECK(parse_setting("C_power2") == Setting::C_power2);
    CHECK_THROWS_AS(parse_setting("D"), ValidationError);
  }

  TEST_CASE("experiments are deterministic across thread counts") {
    ExperimentCell cell;
    cell.dgp.T = 60;
    cell.dgp.set_rho(0.3);
    cell.reps = 24;
    cell.task = Task::mse;
    cell.infeasible = true;
    const CellReport a = run_experiment(cell, 1, 99, 2);
    const CellReport b = run_experiment(cell, 4, 99, 2);
    REQUIRE(a.metrics.size() == metric_names(Task::mse, true).size());
    for (std::size_t k = 0; k < a.metrics.size(); ++k) {
      CHECK(a.metrics[k].name == b.metrics[k].name);
      CHECK(a.metrics[k].value == b.metrics[k].value);
      CHECK(a.metrics[k].failures == b.metrics[k].failures);
    }
    const CellReport other = run_experiment(cell, 2, 99, 3);
    CHECK(other.metrics[0].value != a.metrics[0].value);

    cell.task = Task::coint_size;
    cell.infeasible = false;
    cell.dgp.setting = Setting::C_size;
    cell.reps = 8;
    const CellReport c = run_experiment(cell, 3, 5);
    for (const Metric& m : c.metrics) {
      CHECK(m.value >= 0.0);
      CHECK(m.value <= 1.0);
      CHECK(m.se == doctest::Approx(std::sqrt(m.value * (1 - m.value) / 8)));
    }
  }

  TEST_CASE("experiment validation") {
    ExperimentCell cell;
    cell.reps = 0;
    CHECK_THROWS_AS(run_experiment(cell, 1, 1), ValidationError);
    cell.reps = 10;
    cell.alpha = 0.0;
    CHECK_THROWS_AS(run_experiment(cell, 1, 1), ValidationError);
    cell.alpha = 0.05;
    cell.infeasible = true;
    cell.task = Task::wald_size;
    CHECK_THROWS_AS(run_experiment(cell, 1, 1), ValidationError);
    CHECK(parse_task("coint_power") == Task::coint_power);
    CHECK_THROWS_AS(parse_task("nope"), ValidationError);
    CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  }
}
