#include "fmgls/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "fmgls/error.hpp"

namespace fmgls {

Matrix selection_matrix(int d, const std::vector<int>& indices) {
  Matrix R = Matrix::Zero(static_cast<Eigen::Index>(indices.size()), d);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    require(indices[k] >= 0 && indices[k] < d, "restricted coefficient index out of range");
    R(static_cast<Eigen::Index>(k), indices[k]) = 1.0;
  }
  return R;
}

WaldResult wald(const EstimationResult& est, const Matrix& R, const Vector& r) {
  const auto d = est.beta.size();
  require(R.cols() == d, "restriction matrix has wrong column count");
  require(R.rows() >= 1 && R.rows() == r.size(), "restriction matrix and vector disagree");
  std::set<Eigen::Index> picked;
  for (Eigen::Index i = 0; i < R.rows(); ++i) {
    Eigen::Index pos = -1;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (R(i, j) == 0.0) continue;
      require(R(i, j) == 1.0 && pos < 0, "R must be a selection matrix");
      pos = j;
    }
    require(pos >= 0, "R must be a selection matrix");
    require(picked.insert(pos).second, "R selects the same coefficient twice");
  }
  const Matrix phi = R * est.phi() * R.transpose();
  const Vector diff = R * est.beta - r;
  const Matrix phi_inv = spd_inverse(phi, "Wald covariance");
  WaldResult w;
  w.dof = static_cast<int>(R.rows());
  w.statistic = std::max(0.0, diff.dot(phi_inv * diff));
  w.p_value = chi_square_upper(w.dof, w.statistic);
  return w;
}

namespace {

Matrix partial_sums(const Matrix& block) {
  Matrix s(block.rows(), block.cols());
  Vector acc = Vector::Zero(block.rows());
  for (Eigen::Index t = 0; t < block.cols(); ++t) {
    acc += block.col(t);
    s.col(t) = acc;
  }
  return s;
}

}  // namespace

double kpss_stat(const Matrix& block, const Matrix& weight) {
  require(block.cols() >= 2, "KPSS block needs at least 2 observations");
  require(weight.rows() == block.rows() && weight.cols() == block.rows(), "KPSS weight has wrong shape");
  const Matrix s = partial_sums(block);
  const double b = static_cast<double>(block.cols());
  return (s.cwiseProduct(weight * s)).sum() / (b * b);
}

double kpss_stat(const Matrix& block, const BiamDecomposition& biam) {
  require(block.cols() >= 2, "KPSS block needs at least 2 observations");
  require(block.rows() == biam.n(), "KPSS block dimension does not match the filter");
  const Matrix s = partial_sums(block);
  const Eigen::Map<const Vector> phi(s.data(), s.size());
  const double b = static_cast<double>(block.cols());
  return biam_submatrix_form(biam, static_cast<int>(block.cols()), phi)(0, 0) / (b * b);
}

std::vector<BlockRange> subsample_blocks(int T, int b) {
  require(b >= 1 && b <= T, "block size must lie in [1, T]");
  const int M = T / b;
  std::vector<BlockRange> out;
  out.reserve(M);
  for (int k = 0; k < M; ++k) {
    if (k % 2 == 0) out.push_back({(k / 2) * b, b});
    else out.push_back({T - ((k + 1) / 2) * b, b});
  }
  return out;
}

std::vector<int> default_block_candidates(int T) {
  const double r = std::sqrt(static_cast<double>(T));
  const int lo = std::max(2, static_cast<int>(std::floor(r)));
  const int hi = std::min(T, static_cast<int>(std::floor(2.5 * r)));
  std::vector<int> c;
  for (int b = lo; b <= hi; ++b) c.push_back(b);
  return c;
}

VolatilityChoice min_volatility_block(const std::function<double(int)>& stat_fn, const std::vector<int>& candidates) {
  require(candidates.size() >= 5, "minimum volatility rule needs at least 5 candidates");
  VolatilityChoice out;
  out.candidates = candidates;
  for (int b : candidates) out.stat.push_back(stat_fn(b));
  const std::size_t m = candidates.size();
  out.volatility.assign(m, std::numeric_limits<double>::quiet_NaN());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 2; k + 2 < m; ++k) {
    double mean = 0.0;
    for (std::size_t j = k - 2; j <= k + 2; ++j) mean += out.stat[j];
    mean /= 5.0;
    double ss = 0.0;
    for (std::size_t j = k - 2; j <= k + 2; ++j) ss += (out.stat[j] - mean) * (out.stat[j] - mean);
    out.volatility[k] = std::sqrt(ss / 4.0);
    if (out.volatility[k] < best) {
      best = out.volatility[k];
      out.b = candidates[k];
    }
  }
  return out;
}

std::string variant_name(KpssVariant v) {
  switch (v) {
    case KpssVariant::sols: return "SOLS";
    case KpssVariant::sur: return "SUR";
    case KpssVariant::biam: return "BIAM";
  }
  return "unknown";
}

namespace {

struct BlockStats {
  std::vector<double> k;
  double k_max = 0.0;
};

BlockStats block_stats(const Matrix& u, int b, const Matrix* winv, const BiamDecomposition* biam) {
  BlockStats s;
  for (const auto& r : subsample_blocks(static_cast<int>(u.cols()), b)) {
    const Matrix block = u.middleCols(r.start, r.length);
    s.k.push_back(biam ? kpss_stat(block, *biam) : kpss_stat(block, *winv));
  }
  s.k_max = *std::max_element(s.k.begin(), s.k.end());
  return s;
}

}  // namespace

KpssResult kpss_from_residuals(KpssVariant variant, const Matrix& residuals, const Matrix* omega_udotv,
                               const BiamDecomposition* biam, double alpha, std::optional<int> block_size) {
  require(alpha > 0.0 && alpha < 1.0, "test level must lie in (0,1)");
  const int n = static_cast<int>(residuals.rows());
  const int T = static_cast<int>(residuals.cols());
  Matrix winv;
  const BiamDecomposition* filter = nullptr;
  if (variant == KpssVariant::biam) {
    require(biam != nullptr, "BIAM test needs a filter");
    require(biam->T() == T && biam->n() == n, "filter does not match the residuals");
    filter = biam;
  } else {
    require(omega_udotv != nullptr, "KPSS test needs Omega_u.v");
    winv = spd_inverse(*omega_udotv, "Omega_u.v");
  }
  KpssResult out;
  out.variant = variant;
  auto stat_fn = [&](int b) { return block_stats(residuals, b, &winv, filter).k_max; };
  if (block_size) {
    out.block_size = *block_size;
  } else {
    out.selection = min_volatility_block(stat_fn, default_block_candidates(T));
    out.block_size = out.selection.b;
  }
  const BlockStats s = block_stats(residuals, out.block_size, &winv, filter);
  out.statistics = s.k;
  out.k_max = s.k_max;
  out.num_blocks = static_cast<int>(s.k.size());
  out.critical_value = critical_value(n, alpha / out.num_blocks);
  out.reject = out.k_max > out.critical_value;
  const double tail = 1.0 - limit_cdf(n, std::max(out.k_max, 1e-12));
  out.rejection_rule = std::min(100.0, 100.0 * out.num_blocks * tail);
  out.q_warning = filter && filter->q() > out.block_size / 2.0;
  return out;
}

KpssResult cointegration_test(const EstimationResult& est, KpssVariant variant, double alpha,
                              std::optional<int> block_size) {
  if (variant == KpssVariant::biam) {
    require(est.biam.has_value(), "BIAM test needs an FM-GLS estimate");
    return kpss_from_residuals(variant, est.residuals, nullptr, &*est.biam, alpha, block_size);
  }
  require(est.lr.has_value() && est.modified_residuals.has_value(), "KPSS test needs an FM-SOLS or FM-SUR estimate");
  const Matrix w = fm_weights(*est.lr).omega_udotv;
  return kpss_from_residuals(variant, *est.modified_residuals, &w, nullptr, alpha, block_size);
}

KpssResult cointegration_test(const CprSpec& spec, const PanelData& data, KpssVariant variant, double alpha,
                              const PipelineOptions& opt) {
  switch (variant) {
    case KpssVariant::sols: return cointegration_test(fm_sols(spec, data, opt), variant, alpha);
    case KpssVariant::sur: return cointegration_test(fm_sur(spec, data, opt), variant, alpha);
    case KpssVariant::biam: return cointegration_test(fm_gls(spec, data, opt), variant, alpha);
  }
  throw ValidationError("unknown KPSS variant");
}

}  // namespace fmgls
