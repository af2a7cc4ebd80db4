#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "affinity/sample.hpp"
#include "affinity/schema.hpp"

namespace affinity {

struct LoadResult {
  CoupleSample sample;
  long dropped_rows = 0;  // rows removed because a required field was missing
};

// Reads a delimited couples file with header columns `male_<attr>` and
// `female_<attr>` for every schema attribute, plus optional `year` and
// `stage`. Ordinal labels are mapped through the schema encoding; numeric
// strings are accepted for ordinal columns as already-encoded codes. Rows
// with missing required fields are dropped and counted; unknown category
// labels are an error.
LoadResult load_couples(std::istream& in, const AttributeSchema& schema);
LoadResult load_couples_file(const std::string& path, const AttributeSchema& schema);

void write_couples(std::ostream& out, const CoupleSample& sample);

// Occupation-level characteristic scores used to build the per-category
// flexibility index: each characteristic is z-scored across occupations,
// sign-flipped so higher means more flexible, averaged within platform
// category, then averaged across characteristics.
struct OccupationTable {
  std::vector<std::string> occupations;
  Matrix characteristics;              // n_occupations x C raw scores
  std::vector<std::string> category_map;  // per-occupation platform category
  std::vector<double> signs;           // per-characteristic +1 / -1

  void validate() const;
};

std::map<std::string, double> flexibility_index(const OccupationTable& table);

}  // namespace affinity
