#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fmgls/estimators.hpp"
#include "fmgls/limit_distribution.hpp"

namespace fmgls {

struct WaldResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// k x d matrix picking the given coefficient indices.
Matrix selection_matrix(int d, const std::vector<int>& indices);
WaldResult wald(const EstimationResult& est, const Matrix& R, const Vector& r);

// K = b^{-2} phi' (I_b x W) phi with phi the stacked partial sums of the
// n x b block.
double kpss_stat(const Matrix& block, const Matrix& weight);
// Same with the BIAM sub-matrix weight.
double kpss_stat(const Matrix& block, const BiamDecomposition& biam);

struct BlockRange {
  int start = 0;  // 0-based
  int length = 0;
};
std::vector<BlockRange> subsample_blocks(int T, int b);

struct VolatilityChoice {
  int b = 0;
  std::vector<int> candidates;
  std::vector<double> stat;
  std::vector<double> volatility;  // NaN at the edges
};
VolatilityChoice min_volatility_block(const std::function<double(int)>& stat_fn, const std::vector<int>& candidates);
std::vector<int> default_block_candidates(int T);

enum class KpssVariant { sols, sur, biam };
std::string variant_name(KpssVariant v);

struct KpssResult {
  KpssVariant variant = KpssVariant::sols;
  int block_size = 0;
  int num_blocks = 0;
  std::vector<double> statistics;
  double k_max = 0.0;
  double critical_value = 0.0;
  double rejection_rule = 0.0;  // 100 * M * (1 - F_n(K_max)), clipped at 100
  bool reject = false;
  bool q_warning = false;       // banding above half the block length
  VolatilityChoice selection;
};

// Test given residuals and a weight. `residuals` is n x T. `biam` is used
// for the BIAM variant, `omega_udotv` otherwise.
KpssResult kpss_from_residuals(KpssVariant variant, const Matrix& residuals, const Matrix* omega_udotv,
                               const BiamDecomposition* biam, double alpha,
                               std::optional<int> block_size = std::nullopt);

// Full test: estimation by the variant's estimator (kernel FM-SOLS / FM-SUR or
// FM-GLS), residuals, block selection, Bonferroni decision.
KpssResult cointegration_test(const CprSpec& spec, const PanelData& data, KpssVariant variant, double alpha,
                              const PipelineOptions& opt = {});
// Test on an existing estimate.
KpssResult cointegration_test(const EstimationResult& est, KpssVariant variant, double alpha,
                              std::optional<int> block_size = std::nullopt);

}  // namespace fmgls
