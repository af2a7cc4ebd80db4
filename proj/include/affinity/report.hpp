#pragma once

#include <string>
#include <utility>
#include <vector>

#include "affinity/discrete.hpp"
#include "affinity/max_score.hpp"
#include "affinity/policy.hpp"
#include "affinity/spectral.hpp"
#include "affinity/types.hpp"

namespace affinity::report {

// Human-readable tables use two decimals; machine-readable sidecars carry
// full precision. All output is deterministic for identical inputs.

// Estimates over female attributes by male attributes, bootstrap standard
// errors in parentheses, |estimate| >= 1.96 SE set in ** bold ** marks.
std::string affinity_table(const MatrixRef& B, const MatrixRef& SE,
                           const std::vector<std::string>& attributes);

// Loading matrices side by side (men | women), one singular value row last.
std::string saliency_table(const SaliencyDecomposition& dec,
                           const std::vector<std::string>& attributes);

struct TrendInput {
  std::vector<std::string> periods;
  // Per period, the (attribute, diagonal value) pairs present that period.
  std::vector<std::vector<std::pair<std::string, double>>> diagonals;
  std::vector<double> sigma;
};

// Attributes x periods grid of normalized diagonal elements plus a sigma
// row; attributes missing in a period are left blank.
std::string trend_table(const TrendInput& input);

// Mean and 95% run-interval per coefficient.
std::string score_table(const ScoreFit& fit, const std::vector<std::string>& attributes);

std::string heatmap_table(const SurplusTable& surplus, const std::vector<std::string>& male_labels,
                          const std::vector<std::string>& female_labels);

struct PolicyRow {
  std::string label;
  double n, lf, dn_ds, dlf_ds, dn_dwf, dlf_dwf;
};

std::string policy_table(const std::vector<PolicyRow>& rows,
                         const std::vector<std::pair<std::string, MixtureEffects>>& mixtures);

std::string correlation_table(const MatrixRef& corr, const std::vector<std::string>& attributes);

void write_text_file(const std::string& path, const std::string& content);

std::string fixed2(double x);

}  // namespace affinity::report
