#pragma once

#include <optional>
#include <string>

#include "fmgls/biam.hpp"
#include "fmgls/lrcov.hpp"
#include "fmgls/model.hpp"

namespace fmgls {

enum class Method { ols, sols_fm, sur_fm, fgls_fm, gls_inf, sols_inf, sur_inf };
std::string method_name(Method m);

// Phi for all coefficients is bread_inv * meat * bread_inv.
struct SandwichFactors {
  Matrix bread_inv;
  Matrix meat;
};

struct EstimationResult {
  Vector beta;
  Method method = Method::ols;
  std::optional<LongRunCov> lr;
  std::optional<BiamDecomposition> biam;
  Matrix residuals;                         // y - Z'beta
  std::optional<Matrix> modified_residuals;  // y+ - Z'beta (SOLS/SUR)
  SandwichFactors sandwich;

  Matrix phi() const;
};

EstimationResult ols(const CprSpec& spec, const PanelData& data);
EstimationResult fm_sols(const CprSpec& spec, const PanelData& data, const LongRunCov& lr, const FmWeights& w);
EstimationResult fm_sur(const CprSpec& spec, const PanelData& data, const LongRunCov& lr, const FmWeights& w);
EstimationResult fm_gls(const CprSpec& spec, const PanelData& data, const BiamDecomposition& filter,
                        const LongRunCov& lr);

// Stacked xi_t = [u_t', (x_t - x_{t-1})']' from OLS residuals, 2n x T.
Matrix first_stage_xi(const CprSpec& spec, const PanelData& data);
// Bartlett estimate with the Andrews bandwidth (capped at T - 1) unless a
// bandwidth is given.
LongRunCov kernel_lr(const Matrix& xi, std::optional<double> bandwidth = std::nullopt);

enum class LrPath { kernel, biam };

struct PipelineOptions {
  LrPath lr = LrPath::kernel;             // FM-SOLS / FM-SUR
  std::optional<double> bandwidth;        // kernel path
  std::optional<int> q;                   // banding, selected when empty
  BandingOptions banding;                 // H == 0 means defaults for T
  std::optional<int> r;                   // BIAM Delta truncation, defaults to q
};

// OLS -> residuals -> long-run covariance -> estimator.
EstimationResult fm_sols(const CprSpec& spec, const PanelData& data, const PipelineOptions& opt = {});
EstimationResult fm_sur(const CprSpec& spec, const PanelData& data, const PipelineOptions& opt = {});
// OLS -> residuals -> select_banding -> ladder -> biam_lrcov -> estimator.
EstimationResult fm_gls(const CprSpec& spec, const PanelData& data, const PipelineOptions& opt = {});
EstimationResult estimate(const CprSpec& spec, const PanelData& data, Method m, const PipelineOptions& opt = {});

// Banding parameter chosen on first-stage residuals, honoring an override.
int banding_for(const Matrix& u, const PipelineOptions& opt);

// Infeasible estimators: every estimated covariance or filter replaced by
// the supplied one. `filter` is required for the GLS methods.
EstimationResult estimate_with_given_covariances(const CprSpec& spec, const PanelData& data, Method method,
                                                 const LongRunCov& lr, const FmWeights& w,
                                                 const std::optional<VarLadder>& filter = std::nullopt);

double turning_point(double beta3, double beta4);

}  // namespace fmgls
