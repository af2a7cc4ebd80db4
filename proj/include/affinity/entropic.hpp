#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "affinity/sample.hpp"
#include "affinity/types.hpp"

namespace affinity {

// Matching equilibrium over discrete type sets. The density satisfies
// sigma * log pi_ij = Phi_ij - a_i - b_j with row sums p and column sums q.
// Potentials are pinned by sum_i p_i a_i = 0; re-pinning shifts U and V.
struct EquilibriumMatching {
  Matrix pi;   // Nm x Nw, strictly positive
  Vector a;    // male potentials
  Vector b;    // female potentials
  double sigma = 1.0;
  long iterations = 0;
  double marginal_error = 0.0;
};

struct SurplusShares {
  Matrix U;
  Matrix V;  // U + V == Phi entrywise by construction
};

// Phi_ij = x_i' A y_j for every (male, female) type pair.
Matrix surplus_matrix(const MatrixRef& A, const MatrixRef& X, const MatrixRef& Y);

// Iterative proportional fitting on the exponential kernel, run with the
// kernel in log-stabilized form so |Phi/sigma| in the hundreds cannot
// overflow. Throws NonConvergence when max_iter is hit and NumericalOverflow
// when the density cannot be represented even in log space.
EquilibriumMatching solve_equilibrium(const MatrixRef& A, double sigma, const MatrixRef& X,
                                      const MatrixRef& Y, const VectorRef& p, const VectorRef& q,
                                      double tol = 1e-10, long max_iter = 10000);

// W = sum_ij pi_ij Phi_ij - sigma * sum_ij pi_ij log pi_ij.
double social_gain(const EquilibriumMatching& matching, const MatrixRef& Phi);

SurplusShares surplus_shares(const EquilibriumMatching& matching, const MatrixRef& Phi);

// n i.i.d. draws of type-index pairs with probability pi_ij; returns the
// corresponding attribute rows with uniform couple weights.
CoupleSample sample_couples(const EquilibriumMatching& matching, const MatrixRef& X,
                            const MatrixRef& Y, long n, std::uint64_t seed,
                            const AttributeSchema& schema);

// Synthetic market from known ground truth: standard-normal type clouds of
// the given size on each side, uniform marginals, equilibrium at (A, sigma),
// n couple draws from the resulting density. The density is sampled from
// the potentials directly, so large markets never materialize it.
CoupleSample simulate_market(const MatrixRef& A, double sigma, Index types_per_side, long n,
                             std::uint64_t seed, const AttributeSchema& schema,
                             double tol = 1e-10, long max_iter = 20000);

// Reusable solver core for estimation loops: potentials are warm-started
// across calls and the density is never materialized. Marginals, type sets
// and sigma are fixed at construction; the affinity matrix varies per solve.
class EntropicSolver {
 public:
  EntropicSolver(Matrix X, Matrix Y, Vector p, Vector q, double sigma);

  struct Stats {
    long iterations = 0;
    double marginal_error = 0.0;
    bool converged = false;
  };

  Stats solve(const MatrixRef& A, double tol, long max_iter);

  // Final potentials of the last solve, pinned by p . a = 0.
  const Vector& potential_a() const { return a_final_; }
  const Vector& potential_b() const { return b_final_; }

  double social_gain() const;  // p . a + q . b
  Matrix cross_moments() const;

  Matrix dense_pi(const MatrixRef& A) const;

  std::vector<std::pair<Index, Index>> sample_pairs(const MatrixRef& A, long n,
                                                    std::uint64_t seed) const;

  void reset_potentials();

  Index rows() const { return X_.rows(); }
  Index cols() const { return Y_.rows(); }

 private:
  void rebuild_kernel(const MatrixRef& A);
  void absorb_scalings();

  Matrix X_, Y_;
  Vector p_, q_;
  double sigma_;

  Matrix W_;       // X * A for the current affinity matrix
  Matrix K_;       // stabilized kernel exp((Phi - a - b)/sigma)
  Vector a_, b_;   // absorbed log-potentials, surplus units
  Vector u_, v_;   // linear scalings since the last absorption
  Vector a_final_, b_final_;
  Matrix cross_moments_;
  Vector row_buf_, col_buf_;
};

}  // namespace affinity
