#include "affinity/estimation.hpp"

#include <cmath>
#include <cstdio>
#include <deque>

#include "affinity/errors.hpp"
#include "affinity/rng.hpp"

namespace affinity {

namespace {

void check_estimable(const CoupleSample& sample) {
  sample.validate();
  if (sample.size() <= sample.attribute_count())
    throw ValidationError("sample size must exceed the attribute count");
}

Vector uniform_marginal(Index n) {
  return Vector::Constant(n, 1.0 / static_cast<double>(n));
}

// Shared estimator state: one solver, the empirical cross moments, and the
// linear part of the objective.
struct Objective {
  EntropicSolver solver;
  Matrix empirical;  // E_pihat[x y'] = X'Y / N
  double n = 0.0;
  const Matrix* X = nullptr;
  const Matrix* Y = nullptr;

  explicit Objective(const CoupleSample& sample)
      : solver(sample.X, sample.Y, uniform_marginal(sample.size()),
               uniform_marginal(sample.size()), 1.0),
        empirical(sample.X.transpose() * sample.Y / static_cast<double>(sample.size())),
        n(static_cast<double>(sample.size())),
        X(&sample.X),
        Y(&sample.Y) {}

  ObjectiveValue eval(const MatrixRef& B, double tol, long max_iter) {
    const auto stats = solver.solve(B, tol, max_iter);
    if (!stats.converged) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.3e", stats.marginal_error);
      throw InnerSolverFailure(std::string("inner equilibrium stalled at marginal error ") + buf);
    }
    ObjectiveValue out;
    out.value = solver.social_gain() - (empirical.array() * B.array()).sum();
    out.gradient = solver.cross_moments() - empirical;
    return out;
  }
};

// Two-loop recursion over a short history of (step, gradient-change) pairs.
class LbfgsMemory {
 public:
  explicit LbfgsMemory(std::size_t capacity) : capacity_(capacity) {}

  void push(const Vector& s, const Vector& y) {
    const double sy = s.dot(y);
    if (sy <= 1e-12 * s.norm() * y.norm()) return;  // curvature unusable
    if (pairs_.size() == capacity_) pairs_.pop_front();
    pairs_.push_back({s, y, sy});
  }

  Vector direction(const Vector& grad) const {
    Vector q = -grad;
    if (pairs_.empty()) return q;
    std::vector<double> alpha(pairs_.size());
    for (std::size_t i = pairs_.size(); i-- > 0;) {
      alpha[i] = pairs_[i].s.dot(q) / pairs_[i].sy;
      q -= alpha[i] * pairs_[i].y;
    }
    const auto& last = pairs_.back();
    q *= last.sy / last.y.squaredNorm();
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      const double beta = pairs_[i].y.dot(q) / pairs_[i].sy;
      q += (alpha[i] - beta) * pairs_[i].s;
    }
    return q;
  }

  void clear() { pairs_.clear(); }

 private:
  struct Pair {
    Vector s, y;
    double sy;
  };
  std::size_t capacity_;
  std::deque<Pair> pairs_;
};

}  // namespace

ObjectiveValue objective_and_gradient(const MatrixRef& B, const CoupleSample& sample) {
  check_estimable(sample);
  if (B.rows() != sample.attribute_count() || B.cols() != sample.attribute_count())
    throw DimensionMismatch("affinity matrix must be O x O");
  Objective obj(sample);
  return obj.eval(B, EstimationOptions{}.inner_tol, EstimationOptions{}.inner_max_iter);
}

AffinityEstimate estimate_affinity(const CoupleSample& sample, const Matrix& init,
                                   const EstimationOptions& options) {
  check_estimable(sample);
  const Index o = sample.attribute_count();
  Matrix B = init.size() == 0 ? Matrix::Zero(o, o) : Matrix(init);
  if (B.rows() != o || B.cols() != o)
    throw DimensionMismatch("initial affinity matrix must be O x O");

  Objective obj(sample);
  auto flat = [](const Matrix& m) { return Vector(Eigen::Map<const Vector>(m.data(), m.size())); };
  auto unflat = [o](const Vector& v) {
    return Matrix(Eigen::Map<const Matrix>(v.data(), o, o));
  };

  ObjectiveValue cur = obj.eval(B, options.inner_tol, options.inner_max_iter);
  LbfgsMemory memory(8);
  Vector x = flat(B);
  Vector g = flat(cur.gradient);

  AffinityEstimate est;
  est.converged = false;
  long iter = 0;
  // Inner value noise makes sufficient-decrease tests meaningless near the
  // optimum, so a step that shrinks the gradient is also accepted.
  const double noise_floor = 1e-11;
  while (iter < options.max_outer) {
    if (g.cwiseAbs().maxCoeff() <= options.outer_tol) {
      // Verify against a tighter inner solve before declaring convergence.
      cur = obj.eval(unflat(x), options.final_inner_tol, options.inner_max_iter);
      g = flat(cur.gradient);
      if (g.cwiseAbs().maxCoeff() <= options.outer_tol) {
        est.converged = true;
        break;
      }
    }
    ++iter;

    Vector d = memory.direction(g);
    if (d.dot(g) >= 0.0) {
      memory.clear();
      d = -g;
    }
    const double slope = d.dot(g);
    double t = 1.0;
    bool accepted = false;
    Vector x_try, g_try;
    ObjectiveValue trial;
    for (int ls = 0; ls < 30; ++ls) {
      x_try = x + t * d;
      trial = obj.eval(unflat(x_try), options.inner_tol, options.inner_max_iter);
      g_try = flat(trial.gradient);
      const bool decrease = trial.value <= cur.value + 1e-4 * t * slope + noise_floor;
      const bool grad_progress = g_try.cwiseAbs().maxCoeff() < g.cwiseAbs().maxCoeff();
      if (decrease || grad_progress) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // line search exhausted; report the best iterate

    memory.push(x_try - x, g_try - g);
    x = x_try;
    g = g_try;
    cur = trial;
  }

  est.B = unflat(x);
  est.objective = cur.value;
  est.moment_residuals = unflat(g);
  est.outer_iterations = iter;
  est.standard_errors = Matrix::Zero(o, o);
  return est;
}

BootstrapResult bootstrap_errors(const CoupleSample& sample, long reps, std::uint64_t seed,
                                 const EstimationOptions& options, const Matrix& center) {
  check_estimable(sample);
  if (reps < 2) throw ValidationError("bootstrap needs at least 2 replications");

  // Replicates start from the full-sample estimate; this cuts outer
  // iterations without changing the estimator.
  Matrix start = center;
  if (start.size() == 0) {
    const AffinityEstimate full = estimate_affinity(sample, Matrix(), options);
    start = full.B;
  }

  const Index n = sample.size();
  BootstrapResult result;
  result.draws.reserve(static_cast<std::size_t>(reps));
  for (long r = 0; r < reps; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    std::vector<Index> idx(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
      idx[static_cast<std::size_t>(i)] =
          static_cast<Index>(rng.integer(static_cast<std::uint64_t>(n)));
    try {
      const CoupleSample resampled = sample.subset(idx);
      const AffinityEstimate est = estimate_affinity(resampled, start, options);
      if (!est.converged) {
        ++result.failures;
        continue;
      }
      result.draws.push_back(est.B);
    } catch (const NumericalError&) {
      ++result.failures;
    }
  }
  if (result.draws.size() < 2)
    throw InnerSolverFailure("fewer than 2 bootstrap replicates converged");

  const Index o = sample.attribute_count();
  Matrix mean = Matrix::Zero(o, o);
  for (const auto& d : result.draws) mean += d;
  mean /= static_cast<double>(result.draws.size());
  Matrix ss = Matrix::Zero(o, o);
  for (const auto& d : result.draws) ss += (d - mean).cwiseProduct(d - mean);
  result.standard_errors =
      (ss / static_cast<double>(result.draws.size() - 1)).cwiseSqrt();
  return result;
}

}  // namespace affinity
