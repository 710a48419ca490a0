#pragma once

#include <cstdint>
#include <string>

#include "fmgls/biam.hpp"
#include "fmgls/lrcov.hpp"
#include "fmgls/model.hpp"
#include "fmgls/rng.hpp"

namespace fmgls {

enum class Setting { A, B, C_size, C_power1, C_power2, C_power3 };
std::string setting_name(Setting s);
Setting parse_setting(const std::string& s);

struct DgpConfig {
  Setting setting = Setting::A;
  int n = 3;
  int T = 100;
  // Setting A
  double rho1 = 0.0, rho2 = 0.0, rho3 = 0.0, rho4 = 0.0;
  // Settings B and C
  double lambda_low = 0.1, lambda_high = 0.5;
  double theta = 0.3;
  int J = 0;
  int presample = 200;
  std::uint64_t seed = 0;

  void set_rho(double rho) { rho1 = rho2 = rho3 = rho4 = rho; }
  void validate() const;
};

struct SimulatedPanel {
  PanelData data;
  Vector beta;  // coefficients of the fitted quadratic model under the null
};

// 1 on the diagonal, rho elsewhere.
Matrix toeplitz_sigma(int m, double rho);
// H L H' with H = U (U'U)^{-1/2}, U ~ U[0,1]; the first `unit_roots`
// eigenvalues are 1, the rest U[lo, hi].
Matrix random_lambda(int n, double lo, double hi, int unit_roots, Rng& rng);

SimulatedPanel generate_setting_a(const DgpConfig& c, Rng& rng);
SimulatedPanel generate_setting_b(const DgpConfig& c, Rng& rng);
SimulatedPanel generate_setting_c(const DgpConfig& c, Rng& rng);
SimulatedPanel generate(const DgpConfig& c, Rng& rng);
// One draw using the config's own seed.
SimulatedPanel generate(const DgpConfig& c);

// The quadratic model [1, t, x, x^2] used for every simulated design.
CprSpec simulation_spec(int n);

// Population long-run covariances and the exact VAR(1) ladder of u for
// Setting A, used by the infeasible estimators.
struct PopulationQuantities {
  LongRunCov lr;
  VarLadder ladder;
};
PopulationQuantities setting_a_population(const DgpConfig& c);

}  // namespace fmgls
