#pragma once

#include <string>
#include <vector>

#include "affinity/sample.hpp"
#include "affinity/types.hpp"

namespace affinity {

struct ContingencyTable {
  Matrix mu;       // I x J matched counts
  Vector mu_m0;    // unmatched male counts per male bin
  Vector mu_0f;    // unmatched female counts per female bin
  std::vector<std::string> male_labels;
  std::vector<std::string> female_labels;

  void validate() const;
};

// Bins the matched couples on one attribute and the unmatched individuals
// of each side on the same boundaries. Missing unmatched inputs yield zero
// vectors; the log floor handles them downstream.
ContingencyTable tabulate(const CoupleSample& matched, const std::vector<double>& unmatched_m,
                          const std::vector<double>& unmatched_f, const std::string& attr,
                          const std::vector<double>& bins);

struct SurplusTable {
  Matrix phi;           // systematic surplus per cell
  BoolMatrix floored;   // true where any input count was floored
};

// Phi_ij = 2 log(max(mu_ij, floor)) - log(max(mu_i0, floor)) - log(max(mu_0j, floor)).
// Values in floored cells reflect the floor constant rather than the counts;
// the mask lets report emitters grey them out.
SurplusTable systematic_surplus(const ContingencyTable& table, double floor = 1e-8);

}  // namespace affinity
