// End-to-end checks of the command-line pipeline through a shell. Every
// command writes into a fresh directory under the test scratch root.
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const char* kCli = AFFINITY_CLI_PATH;

struct Scratch {
  fs::path root;
  Scratch() {
    root = fs::temp_directory_path() /
           ("affinity_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Scratch() { fs::remove_all(root); }
  std::string dir(const std::string& name) const {
    const auto p = root / name;
    fs::create_directories(p);
    return p.string();
  }
  std::string file(const std::string& name, const std::string& content) const {
    const auto p = root / name;
    std::ofstream out(p);
    out << content;
    return p.string();
  }
};

int run(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("simulate, estimate, saliency and trend chain") {
  Scratch scratch;
  const auto truth = scratch.file("truth.csv", "1.5,0\n0,0.5\n");
  const auto sim = scratch.dir("sim");
  REQUIRE(run(std::string(kCli) + " simulate --truth " + truth +
              " --n 500 --seed 7 --out " + sim) == 0);
  CHECK(fs::exists(sim + "/couples.csv"));
  CHECK(fs::exists(sim + "/schema.json"));

  const auto est = scratch.dir("est");
  REQUIRE(run(std::string(kCli) + " estimate --input " + sim + "/couples.csv --schema " + sim +
              "/schema.json --out " + est + " --bootstrap-reps 20 --seed 3") == 0);
  CHECK(fs::exists(est + "/affinity_matrix.txt"));
  const auto table = slurp(est + "/affinity_matrix.txt");
  CHECK(table.find("a1") != std::string::npos);
  CHECK(table.find("(") != std::string::npos);  // standard errors present

  const auto sal = scratch.dir("sal");
  REQUIRE(run(std::string(kCli) + " saliency --input " + est + "/affinity_estimate.json --out " +
              sal) == 0);
  CHECK(slurp(sal + "/saliency.txt").find("Lambda") != std::string::npos);

  const auto trend = scratch.dir("trend");
  REQUIRE(run(std::string(kCli) + " trend --inputs " + est + "/affinity_estimate.json," + est +
              "/affinity_estimate.json --labels 2023,2024 --out " + trend) == 0);
  const auto trend_text = slurp(trend + "/trend.txt");
  CHECK(trend_text.find("2024") != std::string::npos);
  CHECK(trend_text.find("Sigma") != std::string::npos);
}

TEST_CASE("stdin piping works") {
  Scratch scratch;
  const auto truth = scratch.file("truth.csv", "1.0\n");
  const auto est = scratch.dir("est");
  REQUIRE(run(std::string(kCli) + " simulate --truth " + truth + " --n 200 --seed 1 | " + kCli +
              " estimate --input - --out " + est + " --bootstrap-reps 0") == 0);
  CHECK(fs::exists(est + "/affinity_estimate.json"));
}

TEST_CASE("validation failures exit with code 1 and name the field") {
  Scratch scratch;
  const auto couples = scratch.file("couples.csv",
                                    "male_a1,female_a1\n"
                                    "1,2\n0.5,1\n-1,0\n");
  const auto schema = scratch.file("schema.json",
                                   "{\"attributes\":[{\"name\":\"a1\",\"kind\":\"continuous\"},"
                                   "{\"name\":\"a2\",\"kind\":\"continuous\"}]}");
  const auto out = scratch.dir("out");
  const auto err_file = scratch.root / "stderr.txt";
  const int code = run(std::string(kCli) + " estimate --input " + couples + " --schema " + schema +
                       " --out " + out + " 2> " + err_file.string());
  CHECK(code == 1);
  CHECK(slurp(err_file.string()).find("male_a2") != std::string::npos);
}

TEST_CASE("unknown config keys are rejected") {
  Scratch scratch;
  const auto truth = scratch.file("truth.csv", "1.0\n");
  const auto config = scratch.file("config.json", "{\"seed\": 3, \"bogus\": 1}");
  const int code = run(std::string(kCli) + " simulate --truth " + truth + " --n 100 --config " +
                       config + " --out " + scratch.dir("out") + " 2> /dev/null");
  CHECK(code == 1);
}

TEST_CASE("config supersedes flags with a warning") {
  Scratch scratch;
  const auto truth = scratch.file("truth.csv", "1.2\n");
  const auto config = scratch.file("config.json", "{\"seed\": 9}");
  const auto via_config = scratch.dir("via_config");
  const auto direct = scratch.dir("direct");
  const auto err_file = scratch.root / "warn.txt";
  REQUIRE(run(std::string(kCli) + " simulate --truth " + truth + " --n 100 --seed 4 --config " +
              config + " --out " + via_config + " 2> " + err_file.string()) == 0);
  CHECK(slurp(err_file.string()).find("supersedes") != std::string::npos);
  REQUIRE(run(std::string(kCli) + " simulate --truth " + truth + " --n 100 --seed 9 --out " +
              direct) == 0);
  CHECK(slurp(via_config + "/couples.csv") == slurp(direct + "/couples.csv"));
}

TEST_CASE("repeated runs are byte-identical") {
  Scratch scratch;
  const auto truth = scratch.file("truth.csv", "1.5,0\n0,0.5\n");
  const auto sim1 = scratch.dir("sim1");
  const auto sim2 = scratch.dir("sim2");
  REQUIRE(run(std::string(kCli) + " simulate --truth " + truth + " --n 300 --seed 5 --out " +
              sim1) == 0);
  REQUIRE(run(std::string(kCli) + " simulate --truth " + truth + " --n 300 --seed 5 --out " +
              sim2) == 0);
  CHECK(slurp(sim1 + "/couples.csv") == slurp(sim2 + "/couples.csv"));

  const auto est1 = scratch.dir("est1");
  const auto est2 = scratch.dir("est2");
  for (const auto& dir : {est1, est2})
    REQUIRE(run(std::string(kCli) + " estimate --input " + sim1 + "/couples.csv --out " + dir +
                " --bootstrap-reps 10 --seed 2") == 0);
  CHECK(slurp(est1 + "/affinity_matrix.txt") == slurp(est2 + "/affinity_matrix.txt"));
  CHECK(slurp(est1 + "/affinity_estimate.json") == slurp(est2 + "/affinity_estimate.json"));
}

TEST_CASE("choo-siow command reproduces the log-odds hand case") {
  Scratch scratch;
  std::string couples = "male_age,female_age\n";
  for (int i = 0; i < 4; ++i) couples += "30,30\n";
  const auto input = scratch.file("matched.csv", couples);
  const auto um = scratch.file("um.csv", "age\n31\n32\n");
  const auto uf = scratch.file("uf.csv", "age\n29\n33\n");
  const auto out = scratch.dir("out");
  REQUIRE(run(std::string(kCli) + " choo-siow --input " + input + " --attr age --bins 25,35 " +
              "--unmatched-male " + um + " --unmatched-female " + uf + " --out " + out) == 0);
  const auto text = slurp(out + "/surplus.txt");
  CHECK(text.find("1.39") != std::string::npos);  // 2 ln 4 - ln 2 - ln 2 = ln 4
  CHECK(fs::exists(out + "/surplus.json"));
}

TEST_CASE("policy command emits effects and the worked bias ratio") {
  Scratch scratch;
  const auto scenario = scratch.file("scenario.json", R"({
    "households": [
      {"label": "base", "delta": 1.0, "w_m": 1.0, "w_f": 1.0, "psi": 1.0, "phi": 0.5, "s": 0.0}
    ],
    "mixtures": [
      {"label": "polarized", "delta_L": 0.0, "delta_H": 2.0, "p_H": 0.5,
       "base": {"w_m": 1.0, "w_f": 1.0, "psi": 1.0, "phi": 0.5, "s": 0.0}}
    ]
  })");
  const auto out = scratch.dir("out");
  REQUIRE(run(std::string(kCli) + " policy --scenario " + scenario + " --out " + out) == 0);
  const auto text = slurp(out + "/policy.txt");
  CHECK(text.find("0.67") != std::string::npos);  // n = 2/3
  CHECK(text.find("1.50") != std::string::npos);  // bias ratio
}

TEST_CASE("describe command writes correlations and heatmap inputs") {
  Scratch scratch;
  const auto truth = scratch.file("truth.csv", "1.0,0\n0,0.8\n");
  const auto sim = scratch.dir("sim");
  REQUIRE(run(std::string(kCli) + " simulate --truth " + truth + " --n 300 --seed 2 --out " +
              sim) == 0);
  const auto out = scratch.dir("out");
  REQUIRE(run(std::string(kCli) + " describe --input " + sim + "/couples.csv --attr a1 " +
              "--bins -5,-1,0,1,5 --out " + out) == 0);
  CHECK(fs::exists(out + "/describe.txt"));
  CHECK(fs::exists(out + "/joint_proportion.csv"));
  CHECK(fs::exists(out + "/likelihood_ratio.csv"));
}

TEST_CASE("maxscore command pins the first attribute to one") {
  Scratch scratch;
  const auto truth = scratch.file("truth.csv", "1,0,0\n0,3,0\n0,0,1.5\n");
  const auto sim = scratch.dir("sim");
  REQUIRE(run(std::string(kCli) + " simulate --truth " + truth + " --n 150 --seed 4 --out " +
              sim) == 0);
  const auto out = scratch.dir("out");
  REQUIRE(run(std::string(kCli) + " maxscore --input " + sim + "/couples.csv --inequalities 300" +
              " --runs 3 --population 40 --iterations 60 --seed 5 --out " + out) == 0);
  const auto text = slurp(out + "/max_score.txt");
  CHECK(text.find("1.00  [1.00, 1.00]") != std::string::npos);
}

TEST_CASE("environment variable overrides the output directory") {
  Scratch scratch;
  const auto truth = scratch.file("truth.csv", "1.0\n");
  const auto flag_dir = scratch.dir("flag_dir");
  const auto env_dir = (scratch.root / "env_dir").string();
  REQUIRE(run("AFFINITY_OUT=" + env_dir + " " + kCli + " simulate --truth " + truth +
              " --n 100 --seed 1 --out " + flag_dir) == 0);
  CHECK(fs::exists(env_dir + "/couples.csv"));
  CHECK_FALSE(fs::exists(flag_dir + "/couples.csv"));
}

TEST_CASE("twelve-attribute pipeline reproduces the report layout") {
  Scratch scratch;
  const std::vector<std::string> attrs = {"education", "age",     "income",    "flexibility",
                                          "height",    "weight",  "drink",     "smoke",
                                          "marital_history",      "housework", "childcare",
                                          "child"};
  std::string schema = R"({"attributes":[
    {"name":"education","kind":"ordinal","encoding":{"JuniorHigh":1,"HighSchool":2,"Vocational":3,"Undergraduate":4,"Graduate":5}},
    {"name":"age","kind":"continuous"},{"name":"income","kind":"continuous"},
    {"name":"flexibility","kind":"continuous"},{"name":"height","kind":"continuous"},
    {"name":"weight","kind":"continuous"},
    {"name":"drink","kind":"ordinal","encoding":{"Never":1,"SocialOnly":2,"DrinkRegularly":3}},
    {"name":"smoke","kind":"ordinal","encoding":{"Never":1,"Occasionally":2,"Regularly":3}},
    {"name":"marital_history","kind":"ordinal","encoding":{"NeverMarried":1,"DivorcedOrWidowed":2}},
    {"name":"housework","kind":"continuous"},{"name":"childcare","kind":"continuous"},
    {"name":"child","kind":"continuous"}]})";
  const auto schema_path = scratch.file("schema.json", schema);

  const char* edu[] = {"JuniorHigh", "HighSchool", "Vocational", "Undergraduate", "Graduate"};
  const char* drink[] = {"Never", "SocialOnly", "DrinkRegularly"};
  std::ostringstream csv;
  for (std::size_t j = 0; j < attrs.size(); ++j) csv << (j ? "," : "") << "male_" << attrs[j];
  for (const auto& a : attrs) csv << ",female_" << a;
  csv << "\n";
  unsigned state = 12345;
  auto rnd = [&state]() {
    state = state * 1103515245u + 12345u;
    return static_cast<double>((state >> 16) & 0x7fff) / 32768.0;
  };
  for (int i = 0; i < 300; ++i) {
    for (int side = 0; side < 2; ++side) {
      if (side) csv << ",";
      csv << edu[static_cast<int>(5 * rnd())] << "," << 25 + 20 * rnd() << ","
          << 300 + 1800 * rnd() << "," << -1.4 + 2.5 * rnd() << "," << 150 + 45 * rnd() << ","
          << 40 + 50 * rnd() << "," << drink[static_cast<int>(3 * rnd())] << ","
          << 1 + static_cast<int>(3 * rnd()) << "," << 1 + static_cast<int>(2 * rnd()) << ","
          << 1 + 3 * rnd() << "," << 1 + 4 * rnd() << "," << 1 + 2 * rnd();
    }
    csv << "\n";
  }
  const auto input = scratch.file("couples12.csv", csv.str());
  const auto out = scratch.dir("out");
  REQUIRE(run(std::string(kCli) + " estimate --input " + input + " --schema " + schema_path +
              " --out " + out + " --bootstrap-reps 4 --seed 6") == 0);
  const auto table = slurp(out + "/affinity_matrix.txt");
  for (const auto& a : attrs) CHECK(table.find(a) != std::string::npos);
  CHECK(table.find("(") != std::string::npos);  // bootstrap SEs in parentheses
  const auto sidecar = slurp(out + "/affinity_estimate.json");
  CHECK(sidecar.find("\"converged\": true") != std::string::npos);
}

TEST_CASE("stage filter errors cleanly without a stage column") {
  Scratch scratch;
  const auto couples = scratch.file("couples.csv", "male_a1,female_a1\n1,2\n2,1\n3,4\n");
  const int code = run(std::string(kCli) + " maxscore --input " + couples +
                       " --stage Proposal --inequalities 1 --out " + scratch.dir("out") +
                       " 2> /dev/null");
  CHECK(code == 1);
}

TEST_CASE("numerical failure exits with code 2 and writes diagnostics") {
  Scratch scratch;
  // Perfectly sorted columns put the empirical moment on the boundary of
  // the moment set; the estimator cannot converge there.
  std::string csv = "male_a1,female_a1\n";
  for (int i = 0; i < 40; ++i) csv += std::to_string(i) + "," + std::to_string(i) + "\n";
  const auto couples = scratch.file("couples.csv", csv);
  const auto out = scratch.dir("out");
  const int code = run(std::string(kCli) + " estimate --input " + couples + " --out " + out +
                       " --bootstrap-reps 0 2> /dev/null");
  CHECK(code == 2);
  CHECK(fs::exists(out + "/diagnostics.json"));
}

TEST_CASE("garbage input exits with a validation error, not a crash") {
  Scratch scratch;
  const auto junk = scratch.file("junk.csv", "\x01\x02\xff not,a?csv\n;;;\n");
  const int code = run(std::string(kCli) + " estimate --input " + junk + " --out " +
                       scratch.dir("out") + " 2> /dev/null");
  CHECK(code == 1);
}
