#include "affinity/discrete.hpp"

#include <cmath>

#include "affinity/csv.hpp"
#include "affinity/errors.hpp"

namespace affinity {

void ContingencyTable::validate() const {
  if (mu.rows() < 1 || mu.cols() < 1) throw ValidationError("contingency table is empty");
  if (mu_m0.size() != mu.rows() || mu_0f.size() != mu.cols())
    throw DimensionMismatch("unmatched count lengths must match the table axes");
  if ((mu.array() < 0.0).any() || (mu_m0.array() < 0.0).any() || (mu_0f.array() < 0.0).any())
    throw ValidationError("counts must be nonnegative");
}

ContingencyTable tabulate(const CoupleSample& matched, const std::vector<double>& unmatched_m,
                          const std::vector<double>& unmatched_f, const std::string& attr,
                          const std::vector<double>& bins) {
  matched.validate();
  validate_bins(bins);
  const long col = matched.schema.index_of(attr);
  if (col < 0) throw MissingColumn(attr);

  const Index k = static_cast<Index>(bins.size()) - 1;
  ContingencyTable table;
  table.mu = Matrix::Zero(k, k);
  table.mu_m0 = Vector::Zero(k);
  table.mu_0f = Vector::Zero(k);
  for (Index n = 0; n < matched.size(); ++n) {
    const long i = bin_of(matched.X(n, col), bins);
    const long j = bin_of(matched.Y(n, col), bins);
    if (i < 0 || j < 0)
      throw ValidationError("bin boundaries do not cover matched attribute '" + attr + "'");
    table.mu(i, j) += 1.0;
  }
  for (double value : unmatched_m) {
    const long i = bin_of(value, bins);
    if (i < 0) throw ValidationError("bin boundaries do not cover unmatched male values");
    table.mu_m0(i) += 1.0;
  }
  for (double value : unmatched_f) {
    const long j = bin_of(value, bins);
    if (j < 0) throw ValidationError("bin boundaries do not cover unmatched female values");
    table.mu_0f(j) += 1.0;
  }
  for (Index i = 0; i < k; ++i) {
    const std::string label = "[" + csv::format_double(bins[static_cast<std::size_t>(i)]) + "," +
                              csv::format_double(bins[static_cast<std::size_t>(i) + 1]) +
                              (i + 1 == k ? "]" : ")");
    table.male_labels.push_back(label);
    table.female_labels.push_back(label);
  }
  table.validate();
  return table;
}

SurplusTable systematic_surplus(const ContingencyTable& table, double floor) {
  table.validate();
  if (!(floor > 0.0)) throw ValidationError("floor must be positive");

  SurplusTable out;
  out.phi.resize(table.mu.rows(), table.mu.cols());
  out.floored.resize(table.mu.rows(), table.mu.cols());
  for (Index i = 0; i < table.mu.rows(); ++i) {
    const bool male_floored = table.mu_m0(i) < floor;
    const double log_m0 = std::log(std::max(table.mu_m0(i), floor));
    for (Index j = 0; j < table.mu.cols(); ++j) {
      const bool cell_floored = table.mu(i, j) < floor;
      const bool female_floored = table.mu_0f(j) < floor;
      const double log_0f = std::log(std::max(table.mu_0f(j), floor));
      const double log_mu = std::log(std::max(table.mu(i, j), floor));
      out.phi(i, j) = 2.0 * log_mu - log_m0 - log_0f;
      out.floored(i, j) = cell_floored || male_floored || female_floored;
    }
  }
  return out;
}

}  // namespace affinity
