#include "affinity/sample.hpp"

#include <cmath>

#include "affinity/errors.hpp"

namespace affinity {

void CoupleSample::validate() const {
  const Index n = X.rows();
  const Index o = X.cols();
  if (n < 2) throw ValidationError("couple sample needs at least 2 rows");
  if (o < 1) throw ValidationError("couple sample needs at least 1 attribute");
  if (Y.rows() != n || Y.cols() != o)
    throw DimensionMismatch("male and female attribute matrices must have identical shape");
  if (schema.size() != o)
    throw DimensionMismatch("schema lists " + std::to_string(schema.size()) +
                            " attributes but data has " + std::to_string(o) + " columns");
  if (!X.allFinite() || !Y.allFinite())
    throw ValidationError("couple sample holds non-finite entries");
  if (weights.size() != n) throw DimensionMismatch("weights length must equal row count");
  if ((weights.array() < 0.0).any()) throw ValidationError("weights must be nonnegative");
  if (std::abs(weights.sum() - 1.0) > 1e-9) throw ValidationError("weights must sum to 1");
  if (!year.empty() && static_cast<Index>(year.size()) != n)
    throw DimensionMismatch("year labels length must equal row count");
  if (!stage.empty()) {
    if (static_cast<Index>(stage.size()) != n)
      throw DimensionMismatch("stage labels length must equal row count");
    for (const auto& s : stage)
      if (!s.empty() && s != "Application" && s != "Pre-relationship" && s != "Serious" &&
          s != "Proposal")
        throw ValidationError("unknown stage label: " + s);
  }
}

CoupleSample CoupleSample::make(AttributeSchema schema, Matrix X, Matrix Y) {
  CoupleSample s;
  s.schema = std::move(schema);
  s.X = std::move(X);
  s.Y = std::move(Y);
  s.weights = Vector::Constant(s.X.rows(), 1.0 / static_cast<double>(s.X.rows()));
  s.validate();
  return s;
}

CoupleSample CoupleSample::subset(const std::vector<Index>& rows) const {
  CoupleSample out;
  out.schema = schema;
  const Index m = static_cast<Index>(rows.size());
  out.X.resize(m, X.cols());
  out.Y.resize(m, Y.cols());
  for (Index k = 0; k < m; ++k) {
    out.X.row(k) = X.row(rows[static_cast<std::size_t>(k)]);
    out.Y.row(k) = Y.row(rows[static_cast<std::size_t>(k)]);
  }
  out.weights = Vector::Constant(m, 1.0 / static_cast<double>(m));
  if (!year.empty()) {
    out.year.reserve(rows.size());
    for (Index r : rows) out.year.push_back(year[static_cast<std::size_t>(r)]);
  }
  if (!stage.empty()) {
    out.stage.reserve(rows.size());
    for (Index r : rows) out.stage.push_back(stage[static_cast<std::size_t>(r)]);
  }
  out.validate();
  return out;
}

namespace {

void column_moments(const Matrix& M, Vector& mean, Vector& sd,
                    const AttributeSchema& schema) {
  const double n = static_cast<double>(M.rows());
  mean = M.colwise().mean();
  sd.resize(M.cols());
  for (Index j = 0; j < M.cols(); ++j) {
    const double ss = (M.col(j).array() - mean(j)).square().sum();
    sd(j) = std::sqrt(ss / (n - 1.0));
    if (sd(j) <= 0.0) throw DegenerateColumn(schema.attributes[static_cast<std::size_t>(j)].name);
  }
}

}  // namespace

StandardizedSample standardize(const CoupleSample& sample) {
  sample.validate();
  StandardizedSample out;
  out.sample = sample;
  column_moments(sample.X, out.transform.male_mean, out.transform.male_sd, sample.schema);
  column_moments(sample.Y, out.transform.female_mean, out.transform.female_sd, sample.schema);
  for (Index j = 0; j < sample.X.cols(); ++j) {
    out.sample.X.col(j) =
        (sample.X.col(j).array() - out.transform.male_mean(j)) / out.transform.male_sd(j);
    out.sample.Y.col(j) =
        (sample.Y.col(j).array() - out.transform.female_mean(j)) / out.transform.female_sd(j);
  }
  return out;
}

Matrix correlation_matrix(const CoupleSample& sample, Gender gender) {
  sample.validate();
  const Matrix& M = gender == Gender::Male ? sample.X : sample.Y;
  const Index o = M.cols();
  Vector mean = M.colwise().mean();
  Matrix centered = M.rowwise() - mean.transpose();
  Vector norms(o);
  for (Index j = 0; j < o; ++j) {
    norms(j) = centered.col(j).norm();
    if (norms(j) <= 0.0)
      throw DegenerateColumn(sample.schema.attributes[static_cast<std::size_t>(j)].name);
  }
  Matrix corr(o, o);
  for (Index i = 0; i < o; ++i) {
    corr(i, i) = 1.0;
    for (Index j = 0; j < i; ++j) {
      const double r = centered.col(i).dot(centered.col(j)) / (norms(i) * norms(j));
      corr(i, j) = r;
      corr(j, i) = r;
    }
  }
  return corr;
}

void validate_bins(const std::vector<double>& bins) {
  if (bins.size() < 2) throw EmptyBinSpec("bin boundaries need at least two edges");
  for (std::size_t k = 1; k < bins.size(); ++k)
    if (!(bins[k] > bins[k - 1]))
      throw EmptyBinSpec("bin boundaries must be strictly increasing");
}

long bin_of(double value, const std::vector<double>& bins) {
  if (value < bins.front() || value > bins.back()) return -1;
  if (value == bins.back()) return static_cast<long>(bins.size()) - 2;
  long lo = 0, hi = static_cast<long>(bins.size()) - 1;
  while (hi - lo > 1) {
    const long mid = (lo + hi) / 2;
    if (value >= bins[static_cast<std::size_t>(mid)])
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

Matrix joint_proportion(const CoupleSample& sample, const std::string& attr,
                        const std::vector<double>& bins) {
  sample.validate();
  validate_bins(bins);
  const long col = sample.schema.index_of(attr);
  if (col < 0) throw MissingColumn(attr);
  const Index k = static_cast<Index>(bins.size()) - 1;
  Matrix P = Matrix::Zero(k, k);
  for (Index n = 0; n < sample.size(); ++n) {
    const long i = bin_of(sample.X(n, col), bins);
    const long j = bin_of(sample.Y(n, col), bins);
    if (i < 0 || j < 0)
      throw ValidationError("bin boundaries do not cover attribute '" + attr +
                            "' at data row " + std::to_string(n));
    P(i, j) += sample.weights(n);
  }
  return P;
}

LikelihoodRatio likelihood_ratio(const MatrixRef& P) {
  if ((P.array() < 0.0).any()) throw ValidationError("joint proportion entries must be nonnegative");
  if (std::abs(P.sum() - 1.0) > 1e-9) throw ValidationError("joint proportion must sum to 1");
  const Vector pm = P.rowwise().sum();
  const Vector pf = P.colwise().sum();
  LikelihoodRatio out;
  out.lr.resize(P.rows(), P.cols());
  out.defined.resize(P.rows(), P.cols());
  for (Index i = 0; i < P.rows(); ++i) {
    for (Index j = 0; j < P.cols(); ++j) {
      const double denom = pm(i) * pf(j);
      if (denom > 0.0) {
        out.lr(i, j) = P(i, j) / denom;
        out.defined(i, j) = true;
      } else {
        out.lr(i, j) = std::numeric_limits<double>::quiet_NaN();
        out.defined(i, j) = false;
      }
    }
  }
  return out;
}

}  // namespace affinity
