#pragma once

#include <cstdint>
#include <vector>

#include "affinity/entropic.hpp"
#include "affinity/sample.hpp"
#include "affinity/types.hpp"

namespace affinity {

struct AffinityEstimate {
  Matrix B;                 // estimated A / sigma
  Matrix standard_errors;   // zero until filled by a bootstrap
  double objective = 0.0;
  Matrix moment_residuals;  // E_pi[x y'] - E_pihat[x y'] at B
  bool converged = false;
  long outer_iterations = 0;
};

struct ObjectiveValue {
  double value = 0.0;
  Matrix gradient;
};

struct EstimationOptions {
  double outer_tol = 1e-6;   // sup-norm bound on the moment residuals
  long max_outer = 500;
  double inner_tol = 1e-10;
  double final_inner_tol = 1e-12;  // used when verifying convergence
  long inner_max_iter = 20000;
};

// Value and gradient of W(B, 1) - E_pihat[x' B y] at B, for a sample whose
// marginals are the uniform empirical measures over its men and women.
ObjectiveValue objective_and_gradient(const MatrixRef& B, const CoupleSample& sample);

// Minimizes the convex objective above. Descent directions are L-BFGS
// accelerated with a backtracking line search; inner equilibrium potentials
// are warm-started across outer iterations. Returns the best iterate with
// converged = false instead of throwing when max_outer is exhausted.
AffinityEstimate estimate_affinity(const CoupleSample& sample, const Matrix& init = Matrix(),
                                   const EstimationOptions& options = {});

struct BootstrapResult {
  Matrix standard_errors;      // entrywise sd of the replicate estimates
  std::vector<Matrix> draws;   // successful replicate estimates, replicate order
  long failures = 0;
};

// Couple-level resampling with replacement; replicate r uses the seed
// derived from (seed, r), so results do not depend on evaluation order.
// Replicates that fail to converge are counted and excluded.
BootstrapResult bootstrap_errors(const CoupleSample& sample, long reps = 2000,
                                 std::uint64_t seed = 0, const EstimationOptions& options = {},
                                 const Matrix& center = Matrix());

}  // namespace affinity
