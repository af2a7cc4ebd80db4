#include "affinity/entropic.hpp"

#include <cmath>
#include <limits>

#include "affinity/errors.hpp"
#include "affinity/rng.hpp"

namespace affinity {

namespace {

constexpr double kLogFloor = -740.0;  // below this exp() underflows to zero
constexpr double kAbsorbThreshold = 80.0;

void validate_marginal(const VectorRef& m, const char* name) {
  if (m.size() < 1) throw ValidationError(std::string(name) + " is empty");
  if ((m.array() <= 0.0).any())
    throw ValidationError(std::string(name) + " must be strictly positive");
  if (std::abs(m.sum() - 1.0) > 1e-9)
    throw ValidationError(std::string(name) + " must sum to 1");
}

}  // namespace

Matrix surplus_matrix(const MatrixRef& A, const MatrixRef& X, const MatrixRef& Y) {
  if (A.rows() != X.cols() || A.cols() != Y.cols())
    throw DimensionMismatch("affinity matrix shape does not conform with type dimensions");
  if (!A.allFinite()) throw ValidationError("affinity matrix holds non-finite entries");
  return X * A * Y.transpose();
}

EntropicSolver::EntropicSolver(Matrix X, Matrix Y, Vector p, Vector q, double sigma)
    : X_(std::move(X)), Y_(std::move(Y)), p_(std::move(p)), q_(std::move(q)), sigma_(sigma) {
  if (sigma_ <= 0.0) throw ValidationError("sigma must be positive");
  if (X_.cols() != Y_.cols()) throw DimensionMismatch("type matrices must share attribute count");
  if (p_.size() != X_.rows()) throw DimensionMismatch("male marginal length must match types");
  if (q_.size() != Y_.rows()) throw DimensionMismatch("female marginal length must match types");
  validate_marginal(p_, "male marginal");
  validate_marginal(q_, "female marginal");
  a_ = Vector::Zero(X_.rows());
  b_ = Vector::Zero(Y_.rows());
  u_ = Vector::Ones(X_.rows());
  v_ = Vector::Ones(Y_.rows());
  K_.resize(X_.rows(), Y_.rows());
  row_buf_.resize(X_.rows());
  col_buf_.resize(Y_.rows());
}

void EntropicSolver::reset_potentials() {
  a_.setZero();
  b_.setZero();
  u_.setOnes();
  v_.setOnes();
}

// Builds K_ij = exp((Phi_ij - a_i - b_j)/sigma) with a_i re-seated at the
// row maximum of Phi_ij - b_j, so every row has kernel maximum 1. The row
// potential is refit exactly by the first scaling sweep, so only b carries
// warm-start information across rebuilds.
void EntropicSolver::rebuild_kernel(const MatrixRef& A) {
  W_.noalias() = X_ * A;
  if (!W_.allFinite()) throw NumericalOverflow("surplus exceeds representable range");
  K_.noalias() = W_ * Y_.transpose();
  Vector rowmax = Vector::Constant(X_.rows(), -std::numeric_limits<double>::infinity());
  for (Index j = 0; j < K_.cols(); ++j)
    rowmax = rowmax.cwiseMax(K_.col(j) - Vector::Constant(K_.rows(), b_(j)));
  a_ = rowmax;
  const double inv_sigma = 1.0 / sigma_;
  for (Index j = 0; j < K_.cols(); ++j)
    K_.col(j) = (((K_.col(j) - a_).array() - b_(j)) * inv_sigma).exp();
  u_.setOnes();
  v_.setOnes();
}

void EntropicSolver::absorb_scalings() {
  a_ -= sigma_ * u_.array().log().matrix();
  b_ -= sigma_ * v_.array().log().matrix();
}

EntropicSolver::Stats EntropicSolver::solve(const MatrixRef& A, double tol, long max_iter) {
  if (tol <= 0.0) throw ValidationError("tolerance must be positive");
  if (max_iter < 1) throw ValidationError("max_iter must be positive");
  rebuild_kernel(A);

  Stats stats;
  double err = std::numeric_limits<double>::infinity();
  long iter = 0;
  while (iter < max_iter) {
    ++iter;
    // Row fit is exact after the u update; the column residual of the
    // current scaling pair is then the full marginal error.
    row_buf_.noalias() = K_ * v_;
    u_ = p_.cwiseQuotient(row_buf_);
    col_buf_.noalias() = K_.transpose() * u_;
    err = (v_.cwiseProduct(col_buf_) - q_).cwiseAbs().maxCoeff();
    if (err <= tol) break;
    v_ = q_.cwiseQuotient(col_buf_);

    const double drift = std::max(std::abs(std::log(u_.maxCoeff())),
                                  std::abs(std::log(u_.minCoeff())));
    if (drift > kAbsorbThreshold) {
      absorb_scalings();
      rebuild_kernel(A);
    }
  }

  a_final_ = a_ - sigma_ * u_.array().log().matrix();
  b_final_ = b_ - sigma_ * v_.array().log().matrix();
  const double shift = p_.dot(a_final_);
  a_final_.array() -= shift;
  b_final_.array() += shift;

  // Cross moments are captured while K and the scalings are still coherent;
  // the kernel goes stale once the scalings are absorbed for warm starting.
  Matrix Yv = Y_.array().colwise() * v_.array();
  Matrix T(X_.rows(), Y_.cols());
  T.noalias() = K_ * Yv;
  Matrix Xu = X_.array().colwise() * u_.array();
  cross_moments_.noalias() = Xu.transpose() * T;

  absorb_scalings();
  u_.setOnes();
  v_.setOnes();

  stats.iterations = iter;
  stats.marginal_error = err;
  stats.converged = err <= tol;
  return stats;
}

double EntropicSolver::social_gain() const {
  return p_.dot(a_final_) + q_.dot(b_final_);
}

Matrix EntropicSolver::cross_moments() const { return cross_moments_; }

Matrix EntropicSolver::dense_pi(const MatrixRef& A) const {
  Matrix pi = surplus_matrix(A, X_, Y_);
  const double inv_sigma = 1.0 / sigma_;
  double min_log = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < pi.cols(); ++j) {
    pi.col(j) = ((pi.col(j) - a_final_).array() - b_final_(j)) * inv_sigma;
    min_log = std::min(min_log, pi.col(j).minCoeff());
    pi.col(j) = pi.col(j).array().exp();
  }
  if (min_log < kLogFloor)
    throw NumericalOverflow("matching density underflows even in log space");
  return pi;
}

std::vector<std::pair<Index, Index>> EntropicSolver::sample_pairs(const MatrixRef& A, long n,
                                                                  std::uint64_t seed) const {
  Rng rng(seed);
  Matrix W = X_ * A;
  Vector p_cdf(p_.size());
  double acc = 0.0;
  for (Index i = 0; i < p_.size(); ++i) {
    acc += p_(i);
    p_cdf(i) = acc;
  }
  const double inv_sigma = 1.0 / sigma_;
  std::vector<std::pair<Index, Index>> pairs;
  pairs.reserve(static_cast<std::size_t>(n));
  Vector row(Y_.rows());
  for (long k = 0; k < n; ++k) {
    const double ui = rng.uniform() * acc;
    Index i = 0;
    while (i + 1 < p_cdf.size() && p_cdf(i) <= ui) ++i;
    row.noalias() = Y_ * W.row(i).transpose();
    row = (((row.array() - a_final_(i)) - b_final_.array()) * inv_sigma).exp();
    const double total = row.sum();
    const double uj = rng.uniform() * total;
    double run = 0.0;
    Index j = 0;
    for (; j < row.size(); ++j) {
      run += row(j);
      if (run > uj) break;
    }
    if (j == row.size()) j = row.size() - 1;
    pairs.emplace_back(i, j);
  }
  return pairs;
}

EquilibriumMatching solve_equilibrium(const MatrixRef& A, double sigma, const MatrixRef& X,
                                      const MatrixRef& Y, const VectorRef& p, const VectorRef& q,
                                      double tol, long max_iter) {
  EntropicSolver solver(X, Y, p, q, sigma);
  const auto stats = solver.solve(A, tol * 0.5, max_iter);
  if (!stats.converged) throw NonConvergence(stats.iterations, stats.marginal_error);

  EquilibriumMatching m;
  m.pi = solver.dense_pi(A);
  m.a = solver.potential_a();
  m.b = solver.potential_b();
  m.sigma = sigma;
  m.iterations = stats.iterations;
  const double row_err = (m.pi.rowwise().sum() - p).cwiseAbs().maxCoeff();
  const double col_err = (m.pi.colwise().sum().transpose() - q).cwiseAbs().maxCoeff();
  m.marginal_error = std::max(row_err, col_err);
  return m;
}

double social_gain(const EquilibriumMatching& matching, const MatrixRef& Phi) {
  if (Phi.rows() != matching.pi.rows() || Phi.cols() != matching.pi.cols())
    throw DimensionMismatch("surplus matrix shape does not match the matching density");
  const double surplus = (matching.pi.array() * Phi.array()).sum();
  const double entropy = (matching.pi.array() * matching.pi.array().log()).sum();
  return surplus - matching.sigma * entropy;
}

SurplusShares surplus_shares(const EquilibriumMatching& matching, const MatrixRef& Phi) {
  if (Phi.rows() != matching.a.size() || Phi.cols() != matching.b.size())
    throw DimensionMismatch("surplus matrix shape does not match the potentials");
  SurplusShares s;
  s.U.resize(Phi.rows(), Phi.cols());
  for (Index j = 0; j < Phi.cols(); ++j)
    s.U.col(j) = ((Phi.col(j) + matching.a).array() - matching.b(j)) * 0.5;
  s.V = Phi - s.U;  // keeps U + V = Phi exact entrywise
  return s;
}

CoupleSample simulate_market(const MatrixRef& A, double sigma, Index types_per_side, long n,
                             std::uint64_t seed, const AttributeSchema& schema, double tol,
                             long max_iter) {
  if (types_per_side < 2) throw ValidationError("need at least 2 types per side");
  if (n < 2) throw ValidationError("need at least 2 couple draws");
  const Index o = static_cast<Index>(schema.size());
  if (A.rows() != o || A.cols() != o)
    throw DimensionMismatch("truth matrix shape must match the schema");
  Rng rng(derive_seed(seed, 1));
  Matrix X(types_per_side, o), Y(types_per_side, o);
  for (Index i = 0; i < types_per_side; ++i)
    for (Index j = 0; j < o; ++j) X(i, j) = rng.normal();
  for (Index i = 0; i < types_per_side; ++i)
    for (Index j = 0; j < o; ++j) Y(i, j) = rng.normal();
  const Vector uniform = Vector::Constant(types_per_side, 1.0 / static_cast<double>(types_per_side));

  EntropicSolver solver(X, Y, uniform, uniform, sigma);
  const auto stats = solver.solve(A, tol, max_iter);
  if (!stats.converged) throw NonConvergence(stats.iterations, stats.marginal_error);

  const auto pairs = solver.sample_pairs(A, n, derive_seed(seed, 2));
  Matrix Xs(n, o), Ys(n, o);
  for (long k = 0; k < n; ++k) {
    Xs.row(k) = X.row(pairs[static_cast<std::size_t>(k)].first);
    Ys.row(k) = Y.row(pairs[static_cast<std::size_t>(k)].second);
  }
  return CoupleSample::make(schema, std::move(Xs), std::move(Ys));
}

CoupleSample sample_couples(const EquilibriumMatching& matching, const MatrixRef& X,
                            const MatrixRef& Y, long n, std::uint64_t seed,
                            const AttributeSchema& schema) {
  if (n < 1) throw ValidationError("sample size must be at least 1");
  if (X.rows() != matching.pi.rows() || Y.rows() != matching.pi.cols())
    throw DimensionMismatch("type matrices do not match the matching density");
  Rng rng(seed);
  Vector row_mass = matching.pi.rowwise().sum();
  Vector row_cdf(row_mass.size());
  double acc = 0.0;
  for (Index i = 0; i < row_mass.size(); ++i) {
    acc += row_mass(i);
    row_cdf(i) = acc;
  }
  Matrix Xs(n, X.cols()), Ys(n, Y.cols());
  for (long k = 0; k < n; ++k) {
    const double ui = rng.uniform() * acc;
    Index i = 0;
    while (i + 1 < row_cdf.size() && row_cdf(i) <= ui) ++i;
    const double uj = rng.uniform() * row_mass(i);
    double run = 0.0;
    Index j = 0;
    for (; j < matching.pi.cols(); ++j) {
      run += matching.pi(i, j);
      if (run > uj) break;
    }
    if (j == matching.pi.cols()) j = matching.pi.cols() - 1;
    Xs.row(k) = X.row(i);
    Ys.row(k) = Y.row(j);
  }
  return CoupleSample::make(schema, std::move(Xs), std::move(Ys));
}

}  // namespace affinity
