#pragma once

#include <cstdint>
#include <vector>

#include "affinity/estimation.hpp"
#include "affinity/sample.hpp"
#include "affinity/types.hpp"

namespace affinity {

// Saliency decomposition A = U_load' diag(lambda) V_load. Rows of the
// loading matrices are orthonormal index directions: the k-th sorting index
// pairs (U_load x)_k with (V_load y)_k at weight lambda_k.
struct SaliencyDecomposition {
  Matrix U_load;
  Matrix V_load;
  Vector lambdas;  // descending, nonnegative
  Vector shares;   // lambda_k / sum(lambda)
};

// Singular-vector signs are arbitrary; pin the dominant male loading of each
// index to the requested sign so reports are reproducible.
enum class LoadingSign { PositiveDominant, NegativeDominant };

SaliencyDecomposition saliency(const MatrixRef& A,
                               LoadingSign sign = LoadingSign::PositiveDominant);

struct RankTestResult {
  bool reject = false;        // rank(A) = k rejected in favor of rank > k
  double quantile = 0.0;      // lower level-quantile of the bootstrap draws
  double threshold = 0.0;
  Vector lambda_draws;        // bootstrapped lambda_{k+1}, replicate order
  long failures = 0;
};

// Bootstrap percentile test on lambda_{k+1}: estimation is repeated on
// couple-level resamples and rank k is rejected at `level` when even the
// lower level-quantile of lambda_{k+1} clears the zero threshold.
RankTestResult rank_test(const CoupleSample& sample, long k, long reps, double level,
                         std::uint64_t seed, double zero_threshold = 1e-3,
                         const EstimationOptions& options = {});

struct NormalizedSeries {
  std::vector<Matrix> A;      // unit Frobenius norm per period
  std::vector<double> sigma;  // 1 / ||B_t||_F
};

NormalizedSeries normalize_series(const std::vector<Matrix>& B_list);

}  // namespace affinity
