#pragma once

#include <string>
#include <vector>

#include "affinity/entropic.hpp"
#include "affinity/rng.hpp"
#include "affinity/sample.hpp"
#include "affinity/schema.hpp"
#include "affinity/types.hpp"

namespace testsup {

using namespace affinity;

inline AttributeSchema schema_of(long o) {
  std::vector<std::string> names;
  for (long j = 0; j < o; ++j) names.push_back("a" + std::to_string(j + 1));
  return AttributeSchema::continuous(names);
}

inline Matrix normal_matrix(Rng& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

inline Matrix uniform_matrix(Rng& rng, Index rows, Index cols, double lo, double hi) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

inline Vector random_simplex(Rng& rng, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = 0.1 + rng.uniform();
  return v / v.sum();
}

inline CoupleSample sample_from(const Matrix& X, const Matrix& Y) {
  return CoupleSample::make(schema_of(X.cols()), X, Y);
}

// Plain dense IPFP in linear space, written independently of the library
// solver so it can serve as its oracle on small instances.
inline Matrix naive_ipfp(const Matrix& Phi, double sigma, const Vector& p, const Vector& q,
                         long sweeps) {
  Matrix pi = (Phi / sigma).array().exp();
  for (long it = 0; it < sweeps; ++it) {
    for (Index i = 0; i < pi.rows(); ++i) pi.row(i) *= p(i) / pi.row(i).sum();
    for (Index j = 0; j < pi.cols(); ++j) pi.col(j) *= q(j) / pi.col(j).sum();
  }
  return pi;
}

}  // namespace testsup
