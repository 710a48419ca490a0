#pragma once

namespace fmgls {

struct CdfValue {
  double value = 0.0;
  int terms = 0;
  bool converged = true;
};

// CDF of the integral of ||W(r)||^2 over [0,1] for an n-dimensional standard
// Brownian motion.
CdfValue limit_cdf_detail(int n, double x);
double limit_cdf(int n, double x);
// c with 1 - F_n(c) = tail_prob.
double critical_value(int n, double tail_prob);

// Upper tail of chi-square(k) at w.
double chi_square_upper(int k, double w);
double chi_square_quantile(int k, double p);

}  // namespace fmgls
