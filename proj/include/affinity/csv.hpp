#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "affinity/types.hpp"

namespace affinity::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  long column(const std::string& name) const;  // -1 when absent
};

Table read(std::istream& in);
Table read_file(const std::string& path);

// Shortest round-trip decimal rendering; locale independent.
std::string format_double(double x);

void write_matrix(std::ostream& out, const MatrixRef& m,
                  const std::vector<std::string>& row_labels = {},
                  const std::vector<std::string>& col_labels = {});

Matrix read_matrix(std::istream& in);
Matrix read_matrix_file(const std::string& path);

}  // namespace affinity::csv
