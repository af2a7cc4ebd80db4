// Command-line front end: simulate | estimate | saliency | trend | choo-siow
// | maxscore | policy | describe. Exit codes: 0 success, 1 validation error,
// 2 numerical failure (partial diagnostics written when possible).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "affinity/csv.hpp"
#include "affinity/discrete.hpp"
#include "affinity/entropic.hpp"
#include "affinity/errors.hpp"
#include "affinity/estimation.hpp"
#include "affinity/market_data.hpp"
#include "affinity/max_score.hpp"
#include "affinity/policy.hpp"
#include "affinity/report.hpp"
#include "affinity/rng.hpp"
#include "affinity/sample.hpp"
#include "affinity/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace affinity;

namespace {

// Values from a --config file supersede command-line flags; every consumed
// key is tracked so unknown keys can be rejected up front.
class ConfigOverlay {
 public:
  ConfigOverlay(const std::string& path, const CLI::App* cmd) : cmd_(cmd) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open config file: " + path);
    try {
      in >> config_;
    } catch (const json::exception& e) {
      throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!config_.is_object()) throw ValidationError("config must be a JSON object");
    active_ = true;
  }

  template <typename T>
  void apply(const std::string& key, T& value) {
    if (!active_) return;
    consumed_.insert(key);
    if (!config_.contains(key)) return;
    try {
      const T replacement = config_[key].get<T>();
      const CLI::Option* opt = cmd_ ? cmd_->get_option_no_throw("--" + key) : nullptr;
      if (opt != nullptr && opt->count() > 0)
        std::cerr << "warning: config value for '" << key << "' supersedes the command-line flag\n";
      value = replacement;
    } catch (const json::exception&) {
      throw ValidationError("config key '" + key + "' has the wrong type");
    }
  }

  void finish() const {
    if (!active_) return;
    for (auto it = config_.begin(); it != config_.end(); ++it)
      if (!consumed_.count(it.key()))
        throw ValidationError("unknown config key: " + it.key());
  }

 private:
  json config_;
  bool active_ = false;
  std::set<std::string> consumed_;
  const CLI::App* cmd_;
};

std::string output_dir(std::string out) {
  if (const char* env = std::getenv("AFFINITY_OUT"); env != nullptr && *env != '\0') out = env;
  if (out.empty()) throw ValidationError("no output directory given (--out or AFFINITY_OUT)");
  fs::create_directories(out);
  return out;
}

json matrix_to_json(const MatrixRef& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty()) throw ValidationError("expected a JSON matrix");
  const Index r = static_cast<Index>(rows.size());
  const Index c = static_cast<Index>(rows[0].size());
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
  return m;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open output file: " + path);
  out << j.dump(2) << "\n";
}

AttributeSchema schema_from_header(const std::vector<std::string>& header) {
  std::vector<std::string> names;
  for (const auto& col : header)
    if (col.rfind("male_", 0) == 0) names.push_back(col.substr(5));
  if (names.empty()) throw MissingColumn("male_<attribute>");
  return AttributeSchema::continuous(names);
}

struct LoadedCouples {
  CoupleSample sample;
  long dropped = 0;
};

LoadedCouples read_couples(const std::string& input, const std::string& schema_path) {
  std::string text;
  if (input == "-") {
    std::stringstream ss;
    ss << std::cin.rdbuf();
    text = ss.str();
  } else {
    std::ifstream in(input);
    if (!in) throw IoFailure("cannot open couples file: " + input);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  AttributeSchema schema;
  if (!schema_path.empty()) {
    schema = AttributeSchema::from_json_file(schema_path);
  } else {
    std::istringstream head(text);
    schema = schema_from_header(csv::read(head).header);
  }
  std::istringstream body(text);
  const auto result = load_couples(body, schema);
  return {result.sample, result.dropped_rows};
}

std::vector<double> parse_bins(const std::string& spec) {
  std::vector<double> bins;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      bins.push_back(std::stod(tok));
    } catch (...) {
      throw ValidationError("bad bin boundary: " + tok);
    }
  }
  validate_bins(bins);
  return bins;
}

// Accepts either an estimate sidecar (JSON with "B" and "attributes") or a
// plain delimited matrix.
struct NamedMatrix {
  Matrix B;
  std::vector<std::string> names;
};

NamedMatrix read_named_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open input file: " + path);
  NamedMatrix out;
  if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ValidationError(std::string("input is not valid JSON: ") + e.what());
    }
    if (!j.contains("B")) throw ValidationError("JSON input lacks a 'B' matrix: " + path);
    out.B = matrix_from_json(j["B"]);
    if (j.contains("attributes"))
      out.names = j["attributes"].get<std::vector<std::string>>();
  } else {
    out.B = csv::read_matrix(in);
  }
  if (out.names.empty())
    for (Index k = 0; k < out.B.rows(); ++k) out.names.push_back("a" + std::to_string(k + 1));
  if (out.B.rows() != out.B.cols()) throw ValidationError("affinity matrix must be square");
  if (static_cast<Index>(out.names.size()) != out.B.rows())
    throw ValidationError("attribute list does not match the matrix size");
  return out;
}

std::vector<std::string> split_list(const std::string& csv_list) {
  std::vector<std::string> out;
  std::stringstream ss(csv_list);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

int run_simulate(const std::string& truth_path, double sigma, long n, long types,
                 std::uint64_t seed, const std::string& out, double tol) {
  if (n < 2) throw ValidationError("--n must be at least 2");
  if (sigma <= 0.0) throw ValidationError("--sigma must be positive");
  const Matrix truth = csv::read_matrix_file(truth_path);
  if (truth.rows() != truth.cols()) throw ValidationError("truth matrix must be square");
  if (types <= 0) types = n;
  std::vector<std::string> names;
  for (Index k = 0; k < truth.rows(); ++k) names.push_back("a" + std::to_string(k + 1));
  const auto schema = AttributeSchema::continuous(names);
  const auto sample = simulate_market(truth, sigma, types, n, seed, schema, tol);

  if (out.empty() && std::getenv("AFFINITY_OUT") == nullptr) {
    write_couples(std::cout, sample);
    return 0;
  }
  const std::string dir = output_dir(out);
  std::ofstream couples(dir + "/couples.csv", std::ios::binary);
  if (!couples) throw IoFailure("cannot write couples file");
  write_couples(couples, sample);
  report::write_text_file(dir + "/schema.json", schema.to_json_text());
  json meta;
  meta["truth"] = matrix_to_json(truth);
  meta["sigma"] = sigma;
  meta["n"] = n;
  meta["types_per_side"] = types;
  meta["seed"] = seed;
  write_json_file(dir + "/simulate_meta.json", meta);
  return 0;
}

int run_estimate(const std::string& input, const std::string& schema_path, const std::string& out,
                 std::uint64_t seed, double tol, long reps) {
  if (tol <= 0.0) throw ValidationError("--tol must be positive");
  if (reps < 0) throw ValidationError("--bootstrap-reps must be nonnegative");
  const std::string dir = output_dir(out);
  const auto loaded = read_couples(input, schema_path);
  const auto standardized = standardize(loaded.sample);

  EstimationOptions options;
  options.outer_tol = tol;
  AffinityEstimate est = estimate_affinity(standardized.sample, Matrix(), options);
  long failures = 0;
  if (reps > 0) {
    const auto boot = bootstrap_errors(standardized.sample, reps, seed, options, est.B);
    est.standard_errors = boot.standard_errors;
    failures = boot.failures;
  }

  const auto names = standardized.sample.schema.names();
  report::write_text_file(dir + "/affinity_matrix.txt",
                          report::affinity_table(est.B, est.standard_errors, names));
  json sidecar;
  sidecar["attributes"] = names;
  sidecar["B"] = matrix_to_json(est.B);
  sidecar["standard_errors"] = matrix_to_json(est.standard_errors);
  sidecar["moment_residuals"] = matrix_to_json(est.moment_residuals);
  sidecar["objective"] = est.objective;
  sidecar["converged"] = est.converged;
  sidecar["outer_iterations"] = est.outer_iterations;
  sidecar["dropped_rows"] = loaded.dropped;
  sidecar["n"] = standardized.sample.size();
  sidecar["bootstrap_reps"] = reps;
  sidecar["bootstrap_failures"] = failures;
  sidecar["seed"] = seed;
  write_json_file(dir + "/affinity_estimate.json", sidecar);

  if (!est.converged) {
    std::cerr << "error: estimation did not converge; residual sup-norm "
              << est.moment_residuals.cwiseAbs().maxCoeff() << "\n";
    return 2;
  }
  return 0;
}

int run_saliency(const std::string& input, const std::string& out, const std::string& sign) {
  const std::string dir = output_dir(out);
  const auto named = read_named_matrix(input);
  LoadingSign convention;
  if (sign == "positive") {
    convention = LoadingSign::PositiveDominant;
  } else if (sign == "negative") {
    convention = LoadingSign::NegativeDominant;
  } else {
    throw ValidationError("--sign must be positive or negative");
  }
  const auto dec = saliency(named.B, convention);
  report::write_text_file(dir + "/saliency.txt", report::saliency_table(dec, named.names));
  json sidecar;
  sidecar["attributes"] = named.names;
  sidecar["U_load"] = matrix_to_json(dec.U_load);
  sidecar["V_load"] = matrix_to_json(dec.V_load);
  sidecar["lambdas"] = matrix_to_json(dec.lambdas);
  sidecar["shares"] = matrix_to_json(dec.shares);
  write_json_file(dir + "/saliency.json", sidecar);
  return 0;
}

int run_trend(const std::string& inputs, const std::string& labels, const std::string& out) {
  const std::string dir = output_dir(out);
  const auto paths = split_list(inputs);
  if (paths.empty()) throw ValidationError("--inputs lists no files");
  std::vector<std::string> period_labels =
      labels.empty() ? std::vector<std::string>{} : split_list(labels);
  if (!period_labels.empty() && period_labels.size() != paths.size())
    throw ValidationError("--labels length must match --inputs");

  std::vector<Matrix> bs;
  std::vector<std::vector<std::string>> names;
  for (const auto& p : paths) {
    auto named = read_named_matrix(p);
    bs.push_back(std::move(named.B));
    names.push_back(std::move(named.names));
  }
  const auto series = normalize_series(bs);

  report::TrendInput tr;
  for (std::size_t t = 0; t < paths.size(); ++t) {
    tr.periods.push_back(period_labels.empty() ? fs::path(paths[t]).stem().string()
                                               : period_labels[t]);
    std::vector<std::pair<std::string, double>> diag;
    for (Index k = 0; k < series.A[t].rows(); ++k)
      diag.emplace_back(names[t][static_cast<std::size_t>(k)], series.A[t](k, k));
    tr.diagonals.push_back(std::move(diag));
    tr.sigma.push_back(series.sigma[t]);
  }
  report::write_text_file(dir + "/trend.txt", report::trend_table(tr));
  json sidecar;
  for (std::size_t t = 0; t < paths.size(); ++t) {
    json period;
    period["label"] = tr.periods[t];
    period["attributes"] = names[t];
    period["A"] = matrix_to_json(series.A[t]);
    period["sigma"] = series.sigma[t];
    sidecar["periods"].push_back(period);
  }
  write_json_file(dir + "/trend.json", sidecar);
  return 0;
}

std::vector<double> read_unmatched(const std::string& path, const std::string& attr) {
  if (path.empty()) return {};
  const auto table = csv::read_file(path);
  long col = table.column(attr);
  if (col < 0 && table.header.size() == 1) col = 0;
  if (col < 0) throw MissingColumn(attr);
  std::vector<double> values;
  for (const auto& row : table.rows) {
    if (static_cast<std::size_t>(col) >= row.size()) continue;
    const std::string& field = row[static_cast<std::size_t>(col)];
    if (field.empty() || field == "NA") continue;
    try {
      values.push_back(std::stod(field));
    } catch (...) {
      throw ValidationError("bad numeric value in " + path + ": " + field);
    }
  }
  return values;
}

int run_choo_siow(const std::string& input, const std::string& schema_path,
                  const std::string& attr, const std::string& bins_spec,
                  const std::string& unmatched_m, const std::string& unmatched_f, double floor,
                  const std::string& out) {
  if (attr.empty()) throw ValidationError("--attr is required");
  if (!(floor > 0.0)) throw ValidationError("--floor must be positive");
  const std::string dir = output_dir(out);
  const auto bins = parse_bins(bins_spec);
  const auto loaded = read_couples(input, schema_path);
  const auto table = tabulate(loaded.sample, read_unmatched(unmatched_m, attr),
                              read_unmatched(unmatched_f, attr), attr, bins);
  const auto surplus = systematic_surplus(table, floor);
  report::write_text_file(dir + "/surplus.txt",
                          report::heatmap_table(surplus, table.male_labels, table.female_labels));
  json sidecar;
  sidecar["attribute"] = attr;
  sidecar["bins"] = bins;
  sidecar["phi"] = matrix_to_json(surplus.phi);
  sidecar["matched_counts"] = matrix_to_json(table.mu);
  sidecar["unmatched_male"] = matrix_to_json(table.mu_m0);
  sidecar["unmatched_female"] = matrix_to_json(table.mu_0f);
  sidecar["floor"] = floor;
  json floored = json::array();
  for (Index i = 0; i < surplus.floored.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < surplus.floored.cols(); ++j) row.push_back(bool(surplus.floored(i, j)));
    floored.push_back(row);
  }
  sidecar["floored"] = floored;
  write_json_file(dir + "/surplus.json", sidecar);
  return 0;
}

int run_maxscore(const std::string& input, const std::string& schema_path,
                 const std::string& stage, long inequalities, long runs, long population,
                 long iterations, std::uint64_t seed, const std::string& spec_kind,
                 const std::string& pin, const std::string& out) {
  if (inequalities < 1) throw ValidationError("--inequalities must be at least 1");
  if (runs < 1) throw ValidationError("--runs must be at least 1");
  if (population < 4) throw ValidationError("--population must be at least 4");
  if (iterations < 1) throw ValidationError("--iterations must be at least 1");
  const std::string dir = output_dir(out);
  auto loaded = read_couples(input, schema_path);

  CoupleSample stage_sample = loaded.sample;
  if (!stage.empty()) {
    if (loaded.sample.stage.empty())
      throw ValidationError("--stage given but the couples file has no stage column");
    std::vector<Index> keep;
    for (Index i = 0; i < loaded.sample.size(); ++i)
      if (loaded.sample.stage[static_cast<std::size_t>(i)] == stage) keep.push_back(i);
    if (keep.size() < 2) throw ValidationError("fewer than 2 trades at stage: " + stage);
    stage_sample = loaded.sample.subset(keep);
  }
  const auto standardized = standardize(stage_sample);

  ScoreSpec spec;
  spec.O = standardized.sample.attribute_count();
  if (spec_kind == "diagonal") {
    spec.kind = ScoreKind::Diagonal;
  } else if (spec_kind == "full") {
    spec.kind = ScoreKind::FullInteraction;
  } else {
    throw ValidationError("--spec must be diagonal or full");
  }
  std::string pin_attr = pin;
  double pin_value = 1.0;
  if (const auto eq = pin.find('='); eq != std::string::npos) {
    pin_attr = pin.substr(0, eq);
    try {
      pin_value = std::stod(pin.substr(eq + 1));
    } catch (...) {
      throw ValidationError("bad --pin value");
    }
  }
  long pin_index = 0;
  if (!pin_attr.empty()) {
    pin_index = standardized.sample.schema.index_of(pin_attr);
    if (pin_index < 0) throw MissingColumn(pin_attr);
  }
  spec.fixed = {{{pin_index, pin_index}, pin_value}};

  const auto ineqs = generate_inequalities(standardized.sample, inequalities, derive_seed(seed, 0));
  const auto fit = fit_max_score(ineqs, spec, runs, population, iterations, derive_seed(seed, 1));

  const auto names = standardized.sample.schema.names();
  report::write_text_file(dir + "/max_score.txt", report::score_table(fit, names));
  json sidecar;
  sidecar["attributes"] = names;
  sidecar["stage"] = stage;
  sidecar["inequalities"] = inequalities;
  sidecar["runs"] = runs;
  sidecar["population"] = population;
  sidecar["iterations"] = iterations;
  sidecar["seed"] = seed;
  sidecar["spec"] = spec_kind;
  sidecar["best_score"] = fit.best_score;
  sidecar["best_theta"] = matrix_to_json(fit.best_theta);
  json coefs = json::array();
  for (const auto& c : fit.coefficients) {
    json jc;
    jc["i"] = c.i;
    jc["j"] = c.j;
    jc["pinned"] = c.pinned;
    jc["mean"] = c.mean;
    jc["lower"] = c.lower;
    jc["upper"] = c.upper;
    coefs.push_back(jc);
  }
  sidecar["coefficients"] = coefs;
  write_json_file(dir + "/max_score.json", sidecar);
  return 0;
}

HouseholdParams params_from_json(const json& j) {
  HouseholdParams p;
  p.delta = j.value("delta", 0.0);
  p.w_m = j.value("w_m", 1.0);
  p.w_f = j.value("w_f", 1.0);
  p.psi = j.value("psi", 1.0);
  p.phi = j.value("phi", 0.1);
  p.s = j.value("s", 0.0);
  for (auto it = j.begin(); it != j.end(); ++it) {
    static const std::set<std::string> known{"delta", "w_m", "w_f", "psi", "phi", "s", "label"};
    if (!known.count(it.key())) throw ValidationError("unknown scenario key: " + it.key());
  }
  return p;
}

int run_policy(const std::string& scenario_path, const std::string& out) {
  const std::string dir = output_dir(out);
  std::ifstream in(scenario_path);
  if (!in) throw IoFailure("cannot open scenario file: " + scenario_path);
  json scenario;
  try {
    in >> scenario;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
  }

  std::vector<report::PolicyRow> rows;
  json sidecar;
  if (scenario.contains("households")) {
    for (const auto& h : scenario["households"]) {
      const HouseholdParams p = params_from_json(h);
      report::PolicyRow row;
      row.label = h.value("label", "household " + std::to_string(rows.size() + 1));
      row.n = fertility(p);
      row.lf = labor_supply(p);
      const auto cc = childcare_effects(p);
      const auto we = wage_effects(p);
      row.dn_ds = cc.dn_ds;
      row.dlf_ds = cc.dlf_ds;
      row.dn_dwf = we.dn_dwf;
      row.dlf_dwf = we.dlf_dwf;
      rows.push_back(row);
      json jr;
      jr["label"] = row.label;
      jr["n"] = row.n;
      jr["l_f"] = row.lf;
      jr["consumption"] = consumption(p);
      jr["dn_ds"] = row.dn_ds;
      jr["dlf_ds"] = row.dlf_ds;
      jr["dn_dwf"] = row.dn_dwf;
      jr["dlf_dwf"] = row.dlf_dwf;
      sidecar["households"].push_back(jr);
    }
  }
  std::vector<std::pair<std::string, MixtureEffects>> mixtures;
  if (scenario.contains("mixtures")) {
    for (const auto& m : scenario["mixtures"]) {
      PreferenceMixture mix;
      mix.delta_L = m.at("delta_L").get<double>();
      mix.delta_H = m.at("delta_H").get<double>();
      mix.p_H = m.at("p_H").get<double>();
      const HouseholdParams base =
          m.contains("base") ? params_from_json(m["base"]) : HouseholdParams{0.0, 1.0, 1.0, 1.0, 0.1, 0.0};
      const auto eff = mixture_effects(mix, base);
      const std::string label = m.value("label", "mixture " + std::to_string(mixtures.size() + 1));
      mixtures.emplace_back(label, eff);
      json jm;
      jm["label"] = label;
      jm["delta_L"] = mix.delta_L;
      jm["delta_H"] = mix.delta_H;
      jm["p_H"] = mix.p_H;
      jm["heterogeneous_dn_ds"] = eff.fertility.heterogeneous;
      jm["homogeneous_dn_ds"] = eff.fertility.homogeneous;
      jm["bias_ratio_fertility"] = eff.fertility.bias_ratio;
      jm["heterogeneous_dlf_ds"] = eff.labor_supply.heterogeneous;
      jm["homogeneous_dlf_ds"] = eff.labor_supply.homogeneous;
      jm["bias_ratio_labor"] = eff.labor_supply.bias_ratio;
      sidecar["mixtures"].push_back(jm);
    }
  }
  if (rows.empty() && mixtures.empty())
    throw ValidationError("scenario lists no households and no mixtures");
  report::write_text_file(dir + "/policy.txt", report::policy_table(rows, mixtures));
  write_json_file(dir + "/policy.json", sidecar);
  return 0;
}

int run_describe(const std::string& input, const std::string& schema_path, const std::string& attr,
                 const std::string& bins_spec, const std::string& out) {
  const std::string dir = output_dir(out);
  const auto loaded = read_couples(input, schema_path);
  const auto names = loaded.sample.schema.names();
  const Matrix male = correlation_matrix(loaded.sample, Gender::Male);
  const Matrix female = correlation_matrix(loaded.sample, Gender::Female);

  std::string text = "Couples: " + std::to_string(loaded.sample.size()) +
                     "  (dropped rows: " + std::to_string(loaded.dropped) + ")\n\n";
  text += "Correlation matrix, male\n" + report::correlation_table(male, names) + "\n";
  text += "Correlation matrix, female\n" + report::correlation_table(female, names);
  json sidecar;
  sidecar["n"] = loaded.sample.size();
  sidecar["dropped_rows"] = loaded.dropped;
  sidecar["attributes"] = names;
  sidecar["correlation_male"] = matrix_to_json(male);
  sidecar["correlation_female"] = matrix_to_json(female);

  if (!attr.empty()) {
    const auto bins = parse_bins(bins_spec);
    const Matrix P = joint_proportion(loaded.sample, attr, bins);
    const auto lr = likelihood_ratio(P);
    std::vector<std::string> labels;
    for (std::size_t k = 0; k + 1 < bins.size(); ++k)
      labels.push_back("[" + csv::format_double(bins[k]) + "," + csv::format_double(bins[k + 1]) +
                       (k + 2 == bins.size() ? "]" : ")"));
    std::ostringstream pm;
    csv::write_matrix(pm, P, labels, labels);
    report::write_text_file(dir + "/joint_proportion.csv", pm.str());
    std::ostringstream lm;
    csv::write_matrix(lm, lr.lr, labels, labels);
    report::write_text_file(dir + "/likelihood_ratio.csv", lm.str());
    sidecar["joint_proportion"] = matrix_to_json(P);
    sidecar["bins"] = bins;
  }
  report::write_text_file(dir + "/describe.txt", text);
  write_json_file(dir + "/describe.json", sidecar);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Marriage-market sorting toolkit"};
  app.require_subcommand(1);

  std::string config_path, input, schema_path, out, truth_path, sign = "positive";
  std::string inputs_list, labels_list, attr, bins_spec, unmatched_m, unmatched_f;
  std::string stage, spec_kind = "diagonal", pin, scenario_path;
  double sigma = 1.0, tol = 1e-6, solver_tol = 1e-10, floor = 1e-8;
  long n = 0, types = 0, reps = 200, runs = 100, population = 1000, iterations = 300,
       inequalities = 0;
  std::uint64_t seed = 0;

  auto* sim = app.add_subcommand("simulate", "Draw a synthetic market from a known truth matrix");
  sim->add_option("--truth", truth_path, "Delimited O x O truth affinity matrix")->required();
  sim->add_option("--sigma", sigma, "Scale of the idiosyncratic taste term");
  sim->add_option("--n", n, "Number of couples to draw")->required();
  sim->add_option("--types", types, "Types per side (default: n)");
  sim->add_option("--seed", seed, "Master seed");
  sim->add_option("--out", out, "Output directory (default: couples to stdout)");
  sim->add_option("--tol", solver_tol, "Equilibrium marginal tolerance");
  sim->add_option("--config", config_path, "JSON config; supersedes flags");

  auto* est = app.add_subcommand("estimate", "Estimate the affinity matrix from couples");
  est->add_option("--input", input, "Couples file ('-' for stdin)")->required();
  est->add_option("--schema", schema_path, "Schema JSON (default: infer continuous columns)");
  est->add_option("--out", out, "Output directory")->required();
  est->add_option("--seed", seed, "Bootstrap master seed");
  est->add_option("--tol", tol, "Moment-residual tolerance");
  est->add_option("--bootstrap-reps", reps, "Bootstrap replications (0 skips)");
  est->add_option("--config", config_path, "JSON config; supersedes flags");

  auto* sal = app.add_subcommand("saliency", "Singular value decomposition of an affinity matrix");
  sal->add_option("--input", input, "Estimate sidecar JSON or delimited matrix")->required();
  sal->add_option("--out", out, "Output directory")->required();
  sal->add_option("--sign", sign, "Loading sign convention: positive|negative");
  sal->add_option("--config", config_path, "JSON config; supersedes flags");

  auto* trend = app.add_subcommand("trend", "Normalize a series of estimates for comparison");
  trend->add_option("--inputs", inputs_list, "Comma-separated estimate files")->required();
  trend->add_option("--labels", labels_list, "Comma-separated period labels");
  trend->add_option("--out", out, "Output directory")->required();
  trend->add_option("--config", config_path, "JSON config; supersedes flags");

  auto* cs = app.add_subcommand("choo-siow", "Discrete-type systematic surplus from counts");
  cs->add_option("--input", input, "Matched couples file")->required();
  cs->add_option("--schema", schema_path, "Schema JSON");
  cs->add_option("--attr", attr, "Attribute to bin")->required();
  cs->add_option("--bins", bins_spec, "Comma-separated bin boundaries")->required();
  cs->add_option("--unmatched-male", unmatched_m, "Unmatched male values file");
  cs->add_option("--unmatched-female", unmatched_f, "Unmatched female values file");
  cs->add_option("--floor", floor, "Zero-count floor");
  cs->add_option("--out", out, "Output directory")->required();
  cs->add_option("--config", config_path, "JSON config; supersedes flags");

  auto* ms = app.add_subcommand("maxscore", "Matching maximum score estimation per stage");
  ms->add_option("--input", input, "Couples/trades file")->required();
  ms->add_option("--schema", schema_path, "Schema JSON");
  ms->add_option("--stage", stage, "Stage filter (requires a stage column)");
  ms->add_option("--inequalities", inequalities, "Swap inequalities to sample")->required();
  ms->add_option("--runs", runs, "Independent optimizer runs");
  ms->add_option("--population", population, "Differential-evolution population");
  ms->add_option("--iterations", iterations, "Differential-evolution generations");
  ms->add_option("--seed", seed, "Master seed");
  ms->add_option("--spec", spec_kind, "diagonal|full");
  ms->add_option("--pin", pin, "Normalized coefficient, attr[=value] (default: first attr = 1)");
  ms->add_option("--out", out, "Output directory")->required();
  ms->add_option("--config", config_path, "JSON config; supersedes flags");

  auto* pol = app.add_subcommand("policy", "Household policy effects and mixture bias ratios");
  pol->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  pol->add_option("--out", out, "Output directory")->required();
  pol->add_option("--config", config_path, "JSON config; supersedes flags");

  auto* desc = app.add_subcommand("describe", "Descriptive statistics of a couples file");
  desc->add_option("--input", input, "Couples file ('-' for stdin)")->required();
  desc->add_option("--schema", schema_path, "Schema JSON");
  desc->add_option("--attr", attr, "Attribute for joint proportion / likelihood ratio");
  desc->add_option("--bins", bins_spec, "Bin boundaries for --attr");
  desc->add_option("--out", out, "Output directory")->required();
  desc->add_option("--config", config_path, "JSON config; supersedes flags");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  try {
    if (sim->parsed()) {
      ConfigOverlay cfg(config_path, sim);
      cfg.apply("truth", truth_path);
      cfg.apply("sigma", sigma);
      cfg.apply("n", n);
      cfg.apply("types", types);
      cfg.apply("seed", seed);
      cfg.apply("out", out);
      cfg.apply("tol", solver_tol);
      cfg.finish();
      return run_simulate(truth_path, sigma, n, types, seed, out, solver_tol);
    }
    if (est->parsed()) {
      ConfigOverlay cfg(config_path, est);
      cfg.apply("input", input);
      cfg.apply("schema", schema_path);
      cfg.apply("out", out);
      cfg.apply("seed", seed);
      cfg.apply("tol", tol);
      cfg.apply("bootstrap-reps", reps);
      cfg.finish();
      return run_estimate(input, schema_path, out, seed, tol, reps);
    }
    if (sal->parsed()) {
      ConfigOverlay cfg(config_path, sal);
      cfg.apply("input", input);
      cfg.apply("out", out);
      cfg.apply("sign", sign);
      cfg.finish();
      return run_saliency(input, out, sign);
    }
    if (trend->parsed()) {
      ConfigOverlay cfg(config_path, trend);
      cfg.apply("inputs", inputs_list);
      cfg.apply("labels", labels_list);
      cfg.apply("out", out);
      cfg.finish();
      return run_trend(inputs_list, labels_list, out);
    }
    if (cs->parsed()) {
      ConfigOverlay cfg(config_path, cs);
      cfg.apply("input", input);
      cfg.apply("schema", schema_path);
      cfg.apply("attr", attr);
      cfg.apply("bins", bins_spec);
      cfg.apply("unmatched-male", unmatched_m);
      cfg.apply("unmatched-female", unmatched_f);
      cfg.apply("floor", floor);
      cfg.apply("out", out);
      cfg.finish();
      return run_choo_siow(input, schema_path, attr, bins_spec, unmatched_m, unmatched_f, floor,
                           out);
    }
    if (ms->parsed()) {
      ConfigOverlay cfg(config_path, ms);
      cfg.apply("input", input);
      cfg.apply("schema", schema_path);
      cfg.apply("stage", stage);
      cfg.apply("inequalities", inequalities);
      cfg.apply("runs", runs);
      cfg.apply("population", population);
      cfg.apply("iterations", iterations);
      cfg.apply("seed", seed);
      cfg.apply("spec", spec_kind);
      cfg.apply("pin", pin);
      cfg.apply("out", out);
      cfg.finish();
      return run_maxscore(input, schema_path, stage, inequalities, runs, population, iterations,
                          seed, spec_kind, pin, out);
    }
    if (pol->parsed()) {
      ConfigOverlay cfg(config_path, pol);
      cfg.apply("scenario", scenario_path);
      cfg.apply("out", out);
      cfg.finish();
      return run_policy(scenario_path, out);
    }
    if (desc->parsed()) {
      ConfigOverlay cfg(config_path, desc);
      cfg.apply("input", input);
      cfg.apply("schema", schema_path);
      cfg.apply("attr", attr);
      cfg.apply("bins", bins_spec);
      cfg.apply("out", out);
      cfg.finish();
      return run_describe(input, schema_path, attr, bins_spec, out);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    try {
      if (!out.empty()) {
        json diag;
        diag["error"] = e.what();
        write_json_file(output_dir(out) + "/diagnostics.json", diag);
      }
    } catch (...) {
    }
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
