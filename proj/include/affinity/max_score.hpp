#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "affinity/sample.hpp"
#include "affinity/types.hpp"

namespace affinity {

// One swap deviation between two observed trades (m1,w1), (m2,w2): the
// counterfactual exchanges partners to (m1,w2), (m2,w1) and preserves the
// multiset of types on both sides. Trades sharing an individual (identical
// attribute vectors on a side) are never paired.
struct SwapInequality {
  Vector x_m1, y_w1;
  Vector x_m2, y_w2;
  std::string stage;
};

enum class ScoreKind { Diagonal, FullInteraction };

// Search specification: pinned coefficients are excluded from the box. The
// default pins the first diagonal entry to 1, the education normalization
// under the standard attribute ordering.
struct ScoreSpec {
  ScoreKind kind = ScoreKind::Diagonal;
  long O = 0;
  std::map<std::pair<long, long>, double> fixed = {{{0, 0}, 1.0}};
  std::pair<double, double> domain = {-10.0, 10.0};

  long free_count() const;
  void validate() const;
};

struct CoefficientSummary {
  long i = 0, j = 0;
  bool pinned = false;
  double mean = 0.0;
  double lower = 0.0;  // 2.5% across run maximizers
  double upper = 0.0;  // 97.5% across run maximizers
};

struct ScoreFit {
  std::vector<CoefficientSummary> coefficients;
  long best_score = 0;
  Matrix best_theta;
  long runs = 0;
  long population = 0;
  std::uint64_t seed = 0;
};

// Uniform sample without replacement of `count` valid trade pairs; throws
// InsufficientTrades carrying the number available when count exceeds it.
std::vector<SwapInequality> generate_inequalities(const CoupleSample& stage_sample, long count,
                                                  std::uint64_t seed);

// Number of swap inequalities Z_g >= 0 at theta, with
// Z_g = (x_m1 - x_m2)' theta (y_w1 - y_w2). Ties count as satisfied.
long score(const MatrixRef& theta, const std::vector<SwapInequality>& inequalities);

// Independent differential-evolution searches (rand/1/bin, weight 0.8,
// crossover 0.9) inside the box; reports per-coefficient mean and 2.5/97.5
// percentiles across the run maximizers.
ScoreFit fit_max_score(const std::vector<SwapInequality>& inequalities, const ScoreSpec& spec,
                       long runs = 100, long population = 1000, long iterations = 300,
                       std::uint64_t seed = 0);

}  // namespace affinity
