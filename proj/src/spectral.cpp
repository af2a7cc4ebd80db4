#include "affinity/spectral.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "affinity/errors.hpp"
#include "affinity/rng.hpp"
#include "affinity/stats.hpp"

namespace affinity {

SaliencyDecomposition saliency(const MatrixRef& A, LoadingSign sign) {
  if (A.rows() != A.cols()) throw DimensionMismatch("affinity matrix must be square");
  if (!A.allFinite()) throw ValidationError("affinity matrix holds non-finite entries");
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);

  SaliencyDecomposition out;
  out.U_load = svd.matrixU().transpose();
  out.V_load = svd.matrixV().transpose();
  out.lambdas = svd.singularValues();

  for (Index k = 0; k < out.lambdas.size(); ++k) {
    Index dominant = 0;
    out.U_load.row(k).cwiseAbs().maxCoeff(&dominant);
    const double coef = out.U_load(k, dominant);
    const bool flip = sign == LoadingSign::PositiveDominant ? coef < 0.0 : coef > 0.0;
    if (flip) {
      out.U_load.row(k) = -out.U_load.row(k);
      out.V_load.row(k) = -out.V_load.row(k);
    }
  }

  const double total = out.lambdas.sum();
  out.shares = total > 0.0 ? Vector(out.lambdas / total)
                           : Vector(Vector::Zero(out.lambdas.size()));
  return out;
}

RankTestResult rank_test(const CoupleSample& sample, long k, long reps, double level,
                         std::uint64_t seed, double zero_threshold,
                         const EstimationOptions& options) {
  sample.validate();
  const long o = sample.attribute_count();
  if (k < 0 || k >= o)
    throw ValidationError("hypothesized rank must satisfy 0 <= k < attribute count");
  if (reps < 2) throw ValidationError("rank test needs at least 2 replications");
  if (level <= 0.0 || level >= 1.0) throw ValidationError("level must be in (0, 1)");

  const AffinityEstimate full = estimate_affinity(sample, Matrix(), options);

  RankTestResult result;
  result.threshold = zero_threshold;
  std::vector<double> draws;
  draws.reserve(static_cast<std::size_t>(reps));
  const Index n = sample.size();
  for (long r = 0; r < reps; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    std::vector<Index> idx(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
      idx[static_cast<std::size_t>(i)] =
          static_cast<Index>(rng.integer(static_cast<std::uint64_t>(n)));
    try {
      const CoupleSample resampled = sample.subset(idx);
      const AffinityEstimate est = estimate_affinity(resampled, full.B, options);
      if (!est.converged) {
        ++result.failures;
        continue;
      }
      const auto dec = saliency(est.B);
      draws.push_back(dec.lambdas(k));  // lambda_{k+1} in 1-based terms
    } catch (const NumericalError&) {
      ++result.failures;
    }
  }
  if (draws.size() < 2) throw InnerSolverFailure("fewer than 2 rank-test replicates converged");

  result.lambda_draws = Eigen::Map<const Vector>(draws.data(), static_cast<Index>(draws.size()));
  result.quantile = quantile(draws, level);
  result.reject = result.quantile > zero_threshold;
  return result;
}

NormalizedSeries normalize_series(const std::vector<Matrix>& B_list) {
  if (B_list.empty()) throw ValidationError("normalize_series needs at least one matrix");
  NormalizedSeries out;
  out.A.reserve(B_list.size());
  out.sigma.reserve(B_list.size());
  for (std::size_t t = 0; t < B_list.size(); ++t) {
    const double norm = B_list[t].norm();
    if (!(norm > 0.0)) throw ZeroMatrix(static_cast<long>(t));
    out.A.push_back(B_list[t] / norm);
    out.sigma.push_back(1.0 / norm);
  }
  return out;
}

}  // namespace affinity
