#include "fmgls/limit_distribution.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <algorithm>
#include <cmath>

#include "fmgls/error.hpp"

namespace fmgls {

CdfValue limit_cdf_detail(int n, double x) {
  require(n >= 1, "limit_cdf: n must be positive");
  require(x > 0.0, "limit_cdf: x must be positive");
  const double h = 0.5 * n;
  const double lg_h = std::lgamma(h);
  const double scale = std::pow(2.0, h);
  const double denom = 2.0 * std::sqrt(x);
  CdfValue out;
  double sum = 0.0;
  double prev = INFINITY;
  constexpr int kMaxTerms = 500;
  double term = 0.0;
  for (int j = 0; j < kMaxTerms; ++j) {
    const double log_k = std::lgamma(j + h) - std::lgamma(j + 1.0) - lg_h;
    const double l = 2.0 * std::sqrt(2.0) * j + n / std::sqrt(2.0);
    const double e = std::erfc(l / denom);
    term = (e == 0.0 ? 0.0 : std::exp(log_k) * e) * (j % 2 == 0 ? 1.0 : -1.0);
    sum += term;
    out.terms = j + 1;
    const double mag = std::abs(term);
    // magnitudes rise polynomially before the erfc decay takes over
    if (mag < 1e-13 && mag <= prev) break;
    prev = mag;
  }
  if (out.terms == kMaxTerms && std::abs(term) > 1e-8) out.converged = false;
  out.value = std::clamp(scale * sum, 0.0, 1.0);
  return out;
}

double limit_cdf(int n, double x) {
  const CdfValue v = limit_cdf_detail(n, x);
  if (!v.converged) throw NumericalError("limit_cdf: series did not converge");
  return v.value;
}

double critical_value(int n, double tail_prob) {
  require(tail_prob > 0.0 && tail_prob < 1.0, "critical_value: tail probability must lie in (0,1)");
  const double target = 1.0 - tail_prob;
  double lo = 1e-6;
  double hi = 1.0;
  if (limit_cdf(n, lo) > target) throw NumericalError("critical_value: lower bracket failed");
  int grow = 0;
  while (limit_cdf(n, hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 60) throw NumericalError("critical_value: upper bracket failed");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = limit_cdf(n, mid);
    if (std::abs(f - target) < 1e-10) return mid;
    (f < target ? lo : hi) = mid;
    if (hi - lo < 1e-15 * hi) return mid;
  }
  throw NumericalError("critical_value: bisection did not reach tolerance");
}

double chi_square_upper(int k, double w) {
  require(k >= 1, "chi-square needs positive degrees of freedom");
  if (w <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * k, 0.5 * w);
}

double chi_square_quantile(int k, double p) {
  require(k >= 1 && p > 0.0 && p < 1.0, "chi-square quantile arguments out of range");
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(k), p);
}

}  // namespace fmgls
