#include <cmath>

#include "doctest.h"
#include "fmgls/error.hpp"
#include "fmgls/limit_distribution.hpp"

using namespace fmgls;

TEST_SUITE("limit") {
  TEST_CASE("cdf axioms") {
    for (int n : {1, 2, 3, 6}) {
      CHECK(limit_cdf(n, 1e-4) < 1e-12);
      CHECK(limit_cdf(n, 50.0 * n) > 1.0 - 1e-12);
      double prev = 0.0;
      for (int k = 1; k <= 200; ++k) {
        const double f = limit_cdf(n, 0.02 * k * n);
        CHECK(f >= prev - 1e-14);
        prev = f;
      }
    }
    CHECK_THROWS_AS(limit_cdf(0, 1.0), ValidationError);
    CHECK_THROWS_AS(limit_cdf(1, 0.0), ValidationError);
  }

  TEST_CASE("moments of the limit") {
    // E X = n/2 and E X^2 = n/3 + n^2/4, from the survival function
    for (int n : {1, 2, 3}) {
      double m1 = 0.0, m2 = 0.0;
      const double h = 1e-3;
      for (double x = h / 2; x < 40.0 * n; x += h) {
        const double s = 1.0 - limit_cdf(n, x);
        m1 += s * h;
        m2 += 2 * x * s * h;
      }
      CHECK(m1 == doctest::Approx(n / 2.0).epsilon(1e-5));
      CHECK(m2 == doctest::Approx(n / 3.0 + n * n / 4.0).epsilon(1e-5));
    }
  }

  TEST_CASE("critical values") {
    CHECK(critical_value(1, 0.05) == doctest::Approx(1.656).epsilon(0.005));
    CHECK(critical_value(1, 0.10) == doctest::Approx(1.196).epsilon(0.005));
    for (int n : {1, 2, 3, 5}) {
      double prev = INFINITY;
      for (double p : {0.001, 0.005, 0.0083333, 0.01, 0.05, 0.1, 0.5, 0.9}) {
        const double c = critical_value(n, p);
        CHECK(limit_cdf(n, c) == doctest::Approx(1.0 - p).epsilon(1e-9));
        CHECK(c < prev);
        prev = c;
      }
    }
    CHECK_THROWS_AS(critical_value(1, 0.0), ValidationError);
    CHECK_THROWS_AS(critical_value(1, 1.0), ValidationError);
  }

  TEST_CASE("chi-square helpers") {
    CHECK(chi_square_upper(1, 3.841458820694124) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(chi_square_upper(2, 3.0) == doctest::Approx(std::exp(-1.5)).epsilon(1e-13));
    CHECK(chi_square_upper(3, 0.0) == 1.0);
    CHECK(chi_square_quantile(1, 0.95) == doctest::Approx(3.841458820694124).epsilon(1e-12));
    CHECK_THROWS_AS(chi_square_upper(0, 1.0), ValidationError);
  }
}
