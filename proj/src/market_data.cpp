#include "affinity/market_data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

#include "affinity/csv.hpp"
#include "affinity/errors.hpp"

namespace affinity {

namespace {

bool is_missing(const std::string& field) {
  return field.empty() || field == "NA" || field == "na" || field == "NaN" || field == ".";
}

bool parse_number(const std::string& field, double& out) {
  auto res = std::from_chars(field.data(), field.data() + field.size(), out);
  return res.ec == std::errc() && res.ptr == field.data() + field.size();
}

// Encodes one field; returns false when missing. Throws UnknownCategory for
// an ordinal label absent from the encoding.
bool encode_field(const std::string& field, const Attribute& attr, long row, double& out) {
  if (is_missing(field)) return false;
  if (attr.kind == AttributeKind::Ordinal) {
    auto it = attr.encoding.find(field);
    if (it != attr.encoding.end()) {
      out = it->second;
      return true;
    }
    if (parse_number(field, out)) return true;  // already-encoded code
    throw UnknownCategory(row, attr.name, field);
  }
  if (!parse_number(field, out)) throw UnknownCategory(row, attr.name, field);
  return true;
}

}  // namespace

LoadResult load_couples(std::istream& in, const AttributeSchema& schema) {
  schema.validate();
  const csv::Table table = csv::read(in);
  if (table.header.empty()) throw EmptySample("couples file is empty");

  const long o = schema.size();
  std::vector<long> male_col(static_cast<std::size_t>(o));
  std::vector<long> female_col(static_cast<std::size_t>(o));
  for (long j = 0; j < o; ++j) {
    const std::string& name = schema.attributes[static_cast<std::size_t>(j)].name;
    male_col[static_cast<std::size_t>(j)] = table.column("male_" + name);
    female_col[static_cast<std::size_t>(j)] = table.column("female_" + name);
    if (male_col[static_cast<std::size_t>(j)] < 0) throw MissingColumn("male_" + name);
    if (female_col[static_cast<std::size_t>(j)] < 0) throw MissingColumn("female_" + name);
  }
  const long year_col = table.column("year");
  const long stage_col = table.column("stage");

  std::vector<std::vector<double>> xs, ys;
  std::vector<std::string> years, stages;
  long dropped = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::vector<double> x(static_cast<std::size_t>(o)), y(static_cast<std::size_t>(o));
    bool complete = true;
    for (long j = 0; j < o && complete; ++j) {
      const auto& attr = schema.attributes[static_cast<std::size_t>(j)];
      const auto get = [&](long c) -> std::string {
        return c >= 0 && static_cast<std::size_t>(c) < row.size()
                   ? row[static_cast<std::size_t>(c)]
                   : std::string{};
      };
      if (!encode_field(get(male_col[static_cast<std::size_t>(j)]), attr,
                        static_cast<long>(r) + 1, x[static_cast<std::size_t>(j)]) ||
          !encode_field(get(female_col[static_cast<std::size_t>(j)]), attr,
                        static_cast<long>(r) + 1, y[static_cast<std::size_t>(j)])) {
        complete = false;
      }
    }
    if (!complete) {
      ++dropped;
      continue;
    }
    xs.push_back(std::move(x));
    ys.push_back(std::move(y));
    if (year_col >= 0)
      years.push_back(static_cast<std::size_t>(year_col) < row.size()
                          ? row[static_cast<std::size_t>(year_col)]
                          : "");
    if (stage_col >= 0)
      stages.push_back(static_cast<std::size_t>(stage_col) < row.size()
                           ? row[static_cast<std::size_t>(stage_col)]
                           : "");
  }
  if (xs.empty()) throw EmptySample("no usable rows after dropping incomplete ones");

  const Index n = static_cast<Index>(xs.size());
  Matrix X(n, o), Y(n, o);
  for (Index i = 0; i < n; ++i)
    for (long j = 0; j < o; ++j) {
      X(i, j) = xs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      Y(i, j) = ys[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }

  LoadResult result;
  result.sample = CoupleSample::make(schema, std::move(X), std::move(Y));
  result.sample.year = std::move(years);
  result.sample.stage = std::move(stages);
  result.sample.validate();
  result.dropped_rows = dropped;
  return result;
}

LoadResult load_couples_file(const std::string& path, const AttributeSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open couples file: " + path);
  return load_couples(in, schema);
}

void write_couples(std::ostream& out, const CoupleSample& sample) {
  const auto names = sample.schema.names();
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (j > 0) out << ",";
    out << "male_" << names[j];
  }
  for (const auto& n : names) out << ",female_" << n;
  if (!sample.year.empty()) out << ",year";
  if (!sample.stage.empty()) out << ",stage";
  out << "\n";
  for (Index i = 0; i < sample.size(); ++i) {
    for (Index j = 0; j < sample.attribute_count(); ++j) {
      if (j > 0) out << ",";
      out << csv::format_double(sample.X(i, j));
    }
    for (Index j = 0; j < sample.attribute_count(); ++j)
      out << "," << csv::format_double(sample.Y(i, j));
    if (!sample.year.empty()) out << "," << sample.year[static_cast<std::size_t>(i)];
    if (!sample.stage.empty()) out << "," << sample.stage[static_cast<std::size_t>(i)];
    out << "\n";
  }
}

void OccupationTable::validate() const {
  const Index n = static_cast<Index>(occupations.size());
  if (n < 2) throw ValidationError("occupation table needs at least 2 occupations");
  if (characteristics.rows() != n)
    throw DimensionMismatch("characteristic rows must match occupation count");
  if (characteristics.cols() < 1)
    throw ValidationError("occupation table needs at least 1 characteristic");
  if (static_cast<Index>(category_map.size()) != n)
    throw DimensionMismatch("category map length must match occupation count");
  if (static_cast<Index>(signs.size()) != characteristics.cols())
    throw DimensionMismatch("signs length must match characteristic count");
  for (double s : signs)
    if (s != 1.0 && s != -1.0) throw ValidationError("characteristic signs must be +1 or -1");
}

std::map<std::string, double> flexibility_index(const OccupationTable& table) {
  table.validate();
  const Index n = table.characteristics.rows();
  const Index c = table.characteristics.cols();
  Matrix z(n, c);
  for (Index k = 0; k < c; ++k) {
    const double mean = table.characteristics.col(k).mean();
    const double ss = (table.characteristics.col(k).array() - mean).square().sum();
    // Population scaling: the z-scored column has unit variance exactly.
    const double sd = std::sqrt(ss / static_cast<double>(n));
    if (sd <= 0.0) throw DegenerateCharacteristic(static_cast<long>(k));
    z.col(k) = table.signs[static_cast<std::size_t>(k)] *
               (table.characteristics.col(k).array() - mean) / sd;
  }
  std::map<std::string, double> sums;
  std::map<std::string, long> counts;
  for (Index i = 0; i < n; ++i) {
    const std::string& cat = table.category_map[static_cast<std::size_t>(i)];
    sums[cat] += z.row(i).sum();
    counts[cat] += c;
  }
  std::map<std::string, double> index;
  for (const auto& [cat, total] : sums) index[cat] = total / static_cast<double>(counts[cat]);
  return index;
}

}  // namespace affinity
