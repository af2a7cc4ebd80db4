#include "affinity/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "affinity/errors.hpp"

namespace affinity::report {

namespace {

// Space-padded table renderer; first column left-aligned, the rest right.
std::string render(const std::vector<std::vector<std::string>>& cells) {
  std::size_t cols = 0;
  for (const auto& row : cells) cols = std::max(cols, row.size());
  std::vector<std::size_t> width(cols, 0);
  for (const auto& row : cells)
    for (std::size_t j = 0; j < row.size(); ++j) width[j] = std::max(width[j], row[j].size());
  std::string out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) line += "  ";
      const auto pad = width[j] - row[j].size();
      if (j == 0) {
        line += row[j] + std::string(pad, ' ');
      } else {
        line += std::string(pad, ' ') + row[j];
      }
    }
    const auto end = line.find_last_not_of(' ');
    line.erase(end == std::string::npos ? 0 : end + 1);
    out += line;
    out += "\n";
  }
  return out;
}

std::vector<std::vector<std::string>> begin_table() { return {}; }

}  // namespace

std::string fixed2(double x) {
  if (std::abs(x) < 0.005) x = 0.0;  // avoid "-0.00"
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

std::string affinity_table(const MatrixRef& B, const MatrixRef& SE,
                           const std::vector<std::string>& attributes) {
  if (B.rows() != B.cols() || static_cast<std::size_t>(B.rows()) != attributes.size())
    throw DimensionMismatch("affinity table needs a square matrix matching the attribute list");
  if (SE.rows() != B.rows() || SE.cols() != B.cols())
    throw DimensionMismatch("standard error matrix shape must match the estimates");
  auto cells = begin_table();
  std::vector<std::string> header{"Male \\ Female"};
  header.insert(header.end(), attributes.begin(), attributes.end());
  cells.push_back(header);
  for (Index i = 0; i < B.rows(); ++i) {
    std::vector<std::string> est{attributes[static_cast<std::size_t>(i)]};
    std::vector<std::string> ses{""};
    for (Index j = 0; j < B.cols(); ++j) {
      const bool significant = SE(i, j) > 0.0 && std::abs(B(i, j)) >= 1.96 * SE(i, j);
      const std::string v = fixed2(B(i, j));
      est.push_back(significant ? "**" + v + "**" : v);
      ses.push_back("(" + fixed2(SE(i, j)) + ")");
    }
    cells.push_back(est);
    cells.push_back(ses);
  }
  return render(cells);
}

std::string saliency_table(const SaliencyDecomposition& dec,
                           const std::vector<std::string>& attributes) {
  const Index o = dec.lambdas.size();
  if (static_cast<std::size_t>(o) != attributes.size())
    throw DimensionMismatch("saliency table needs one attribute name per index");
  auto cells = begin_table();
  std::vector<std::string> header{""};
  for (Index k = 0; k < o; ++k) header.push_back("Men:I" + std::to_string(k + 1));
  for (Index k = 0; k < o; ++k) header.push_back("Women:I" + std::to_string(k + 1));
  cells.push_back(header);
  for (Index i = 0; i < o; ++i) {
    std::vector<std::string> row{attributes[static_cast<std::size_t>(i)]};
    for (Index k = 0; k < o; ++k) row.push_back(fixed2(dec.U_load(k, i)));
    for (Index k = 0; k < o; ++k) row.push_back(fixed2(dec.V_load(k, i)));
    cells.push_back(row);
  }
  std::vector<std::string> lambda_row{"Lambda"};
  for (int side = 0; side < 2; ++side)
    for (Index k = 0; k < o; ++k) lambda_row.push_back(fixed2(dec.lambdas(k)));
  cells.push_back(lambda_row);
  std::vector<std::string> share_row{"Share"};
  for (int side = 0; side < 2; ++side)
    for (Index k = 0; k < o; ++k) share_row.push_back(fixed2(dec.shares(k)));
  cells.push_back(share_row);
  return render(cells);
}

std::string trend_table(const TrendInput& input) {
  if (input.periods.size() != input.diagonals.size() ||
      input.periods.size() != input.sigma.size())
    throw DimensionMismatch("trend input lengths disagree");
  std::vector<std::string> attrs;  // union, first-seen order
  for (const auto& period : input.diagonals)
    for (const auto& [name, value] : period) {
      bool seen = false;
      for (const auto& a : attrs) seen = seen || a == name;
      if (!seen) attrs.push_back(name);
    }
  auto cells = begin_table();
  std::vector<std::string> header{""};
  header.insert(header.end(), input.periods.begin(), input.periods.end());
  cells.push_back(header);
  for (const auto& attr : attrs) {
    std::vector<std::string> row{attr};
    for (std::size_t t = 0; t < input.periods.size(); ++t) {
      std::string cell;
      for (const auto& [name, value] : input.diagonals[t])
        if (name == attr) cell = fixed2(value);
      row.push_back(cell);
    }
    cells.push_back(row);
  }
  std::vector<std::string> sigma_row{"Sigma"};
  for (double s : input.sigma) sigma_row.push_back(fixed2(s));
  cells.push_back(sigma_row);
  return render(cells);
}

std::string score_table(const ScoreFit& fit, const std::vector<std::string>& attributes) {
  auto cells = begin_table();
  cells.push_back({"Variable", "Mean", "95% CI"});
  for (const auto& c : fit.coefficients) {
    std::string label;
    if (c.i == c.j) {
      label = attributes[static_cast<std::size_t>(c.i)];
    } else {
      label = attributes[static_cast<std::size_t>(c.i)] + " x " +
              attributes[static_cast<std::size_t>(c.j)];
    }
    cells.push_back({label, fixed2(c.mean),
                     "[" + fixed2(c.lower) + ", " + fixed2(c.upper) + "]"});
  }
  cells.push_back({"Best score", std::to_string(fit.best_score), ""});
  return render(cells);
}

std::string heatmap_table(const SurplusTable& surplus, const std::vector<std::string>& male_labels,
                          const std::vector<std::string>& female_labels) {
  if (static_cast<Index>(male_labels.size()) != surplus.phi.rows() ||
      static_cast<Index>(female_labels.size()) != surplus.phi.cols())
    throw DimensionMismatch("heatmap labels must match the surplus table axes");
  auto cells = begin_table();
  std::vector<std::string> header{"Male \\ Female"};
  header.insert(header.end(), female_labels.begin(), female_labels.end());
  cells.push_back(header);
  for (Index i = 0; i < surplus.phi.rows(); ++i) {
    std::vector<std::string> row{male_labels[static_cast<std::size_t>(i)]};
    for (Index j = 0; j < surplus.phi.cols(); ++j) {
      std::string cell = fixed2(surplus.phi(i, j));
      if (surplus.floored(i, j)) cell += "*";
      row.push_back(cell);
    }
    cells.push_back(row);
  }
  std::string out = render(cells);
  out += "* cell uses the zero-count floor\n";
  return out;
}

std::string policy_table(const std::vector<PolicyRow>& rows,
                         const std::vector<std::pair<std::string, MixtureEffects>>& mixtures) {
  auto cells = begin_table();
  cells.push_back({"Scenario", "n", "l_f", "dn/ds", "dl_f/ds", "dn/dw_f", "dl_f/dw_f"});
  for (const auto& r : rows)
    cells.push_back({r.label, fixed2(r.n), fixed2(r.lf), fixed2(r.dn_ds), fixed2(r.dlf_ds),
                     fixed2(r.dn_dwf), fixed2(r.dlf_dwf)});
  std::string out = render(cells);
  if (!mixtures.empty()) {
    auto mix_cells = begin_table();
    mix_cells.push_back({"Mixture", "Het dn/ds", "Hom dn/ds", "Bias", "Het dl_f/ds",
                         "Hom dl_f/ds", "Bias"});
    for (const auto& [label, m] : mixtures)
      mix_cells.push_back({label, fixed2(m.fertility.heterogeneous), fixed2(m.fertility.homogeneous),
                           fixed2(m.fertility.bias_ratio), fixed2(m.labor_supply.heterogeneous),
                           fixed2(m.labor_supply.homogeneous), fixed2(m.labor_supply.bias_ratio)});
    out += "\n" + render(mix_cells);
  }
  return out;
}

std::string correlation_table(const MatrixRef& corr, const std::vector<std::string>& attributes) {
  if (corr.rows() != corr.cols() || static_cast<std::size_t>(corr.rows()) != attributes.size())
    throw DimensionMismatch("correlation table needs a square matrix matching the attributes");
  auto cells = begin_table();
  std::vector<std::string> header{""};
  header.insert(header.end(), attributes.begin(), attributes.end());
  cells.push_back(header);
  for (Index i = 0; i < corr.rows(); ++i) {
    std::vector<std::string> row{attributes[static_cast<std::size_t>(i)]};
    for (Index j = 0; j <= i; ++j) row.push_back(fixed2(corr(i, j)));
    cells.push_back(row);
  }
  return render(cells);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open output file: " + path);
  out << content;
  if (!out) throw IoFailure("failed writing output file: " + path);
}

}  // namespace affinity::report
