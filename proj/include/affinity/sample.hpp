#pragma once

#include <optional>
#include <string>
#include <vector>

#include "affinity/schema.hpp"
#include "affinity/types.hpp"

namespace affinity {

enum class Gender { Male, Female };

// Paired couple-level attribute data. Row n of X and row n of Y are the
// matched partners of couple n. Weights are per-couple mass and sum to one.
struct CoupleSample {
  AttributeSchema schema;
  Matrix X;  // N x O male attributes
  Matrix Y;  // N x O female attributes
  Vector weights;
  std::vector<std::string> year;   // empty or length N
  std::vector<std::string> stage;  // empty or length N

  Index size() const { return X.rows(); }
  Index attribute_count() const { return X.cols(); }

  // Throws ValidationError when shapes disagree, entries are non-finite,
  // N < 2, or weights are negative / do not sum to one.
  void validate() const;

  static CoupleSample make(AttributeSchema schema, Matrix X, Matrix Y);
  CoupleSample subset(const std::vector<Index>& rows) const;
};

struct Standardization {
  Vector male_mean, male_sd;
  Vector female_mean, female_sd;
};

struct StandardizedSample {
  CoupleSample sample;
  Standardization transform;
};

// Centers every male and female column and scales it to unit sample variance
// (Bessel-corrected). Throws DegenerateColumn when a column is constant.
StandardizedSample standardize(const CoupleSample& sample);

Matrix correlation_matrix(const CoupleSample& sample, Gender gender);

// P(i, j) = mass of couples whose male value falls in bin i and female value
// in bin j, using the couple weights. Bins are half-open [e_k, e_{k+1}) with
// the last bin closed. Every observed value must be covered.
Matrix joint_proportion(const CoupleSample& sample, const std::string& attr,
                        const std::vector<double>& bins);

struct LikelihoodRatio {
  Matrix lr;          // NaN where undefined
  BoolMatrix defined; // false where a marginal is zero
};

LikelihoodRatio likelihood_ratio(const MatrixRef& P);

long bin_of(double value, const std::vector<double>& bins);
void validate_bins(const std::vector<double>& bins);

}  // namespace affinity
