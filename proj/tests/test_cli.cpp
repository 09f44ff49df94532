#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "doctest.h"
#include "examweight/cli.hpp"
#include "examweight/csv.hpp"

namespace fs = std::filesystem;
using examweight::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "examweight");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const fs::path p = fs::temp_directory_path() /
                     ("examweight_cli_" + tag + "_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter++));
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Generated once per test binary.
const fs::path& cohort() {
  static const fs::path dir = [] {
    const fs::path d = scratch_dir("cohort");
    const Result r = invoke({"generate", "--students", "9", "--seed", "7", "--out", d.string()});
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

examweight::csv::Document table(const std::string& text) {
  return examweight::csv::parse(text, "<stdout>");
}

}  // namespace

TEST_CASE("usage errors exit 64") {
  Result r = invoke({"evaluate", "--data", cohort().string(), "--bogus"});
  CHECK(r.code == 64);
  CHECK(r.err.find("--bogus") != std::string::npos);
  CHECK(invoke({}).code == 64);
  CHECK(invoke({"frobnicate"}).code == 64);
  CHECK(invoke({"evaluate", "--data", cohort().string(), "--scale", "weird"}).code == 64);
  CHECK(invoke({"evaluate", "--data", cohort().string(), "--epsilon", "0.5"}).code == 64);
  CHECK(invoke({"evaluate"}).code == 64);  // no data source
  CHECK(invoke({"analyze", "--data", cohort().string(), "--question", "MC1", "--degenerate"})
            .code == 64);
  CHECK(invoke({"generate", "--students", "0", "--out", scratch_dir("zero").string()}).code == 64);
  const Result help = invoke({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("evaluate") != std::string::npos);
}

TEST_CASE("data errors exit 1 and name the file") {
  const Result r = invoke({"evaluate", "--data", scratch_dir("missing").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("final_questions.csv: cannot open") != std::string::npos);
  const Result q =
      invoke({"analyze", "--data", cohort().string(), "--question", "MC999"});
  CHECK(q.code == 1);
  CHECK(q.err.find("MC999") != std::string::npos);
}

TEST_CASE("evaluate prints two scales by six approaches") {
  const Result r = invoke({"evaluate", "--data", cohort().string(), "--exam", "final",
                           "--scale", "both"});
  REQUIRE(r.code == 0);
  const auto t = table(r.out);
  CHECK(t.header.size() == 3 + 6);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].fields[0] == "final");
  CHECK(t.rows[0].fields[1] == "normalized");
  CHECK(t.rows[1].fields[1] == "actual");

  const Result both = invoke({"evaluate", "--data", cohort().string(), "--exam", "final",
                              "--exam", "midterm"});
  REQUIRE(both.code == 0);
  CHECK(table(both.out).rows.size() == 4);

  const Result again = invoke({"evaluate", "--data", cohort().string(), "--exam", "final"});
  CHECK(again.out == r.out);

  const Result json = invoke({"evaluate", "--data", cohort().string(), "--format", "json"});
  REQUIRE(json.code == 0);
  const auto j = nlohmann::json::parse(json.out);
  CHECK(j.size() == 2);
  CHECK(j[0]["exam"] == "final");
}

TEST_CASE("evaluate writes weights and exclusion comparisons") {
  const fs::path dir = scratch_dir("outputs");
  fs::create_directories(dir);
  const Result r = invoke({"evaluate", "--data", cohort().string(), "--scale", "actual",
                           "--weights-out", (dir / "w.csv").string(), "--out",
                           (dir / "mae.csv").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  CHECK(table(slurp(dir / "mae.csv")).rows.size() == 1);
  const auto w = table(slurp(dir / "w.csv"));
  CHECK(w.header == std::vector<std::string>{"exam", "solver", "scale", "question", "weight"});
  CHECK(w.rows.size() == 6 * 53 + 4);

  const Result c = invoke({"evaluate", "--data", cohort().string(), "--compare-exclusion",
                           "--deltas-out", (dir / "d.csv").string()});
  REQUIRE(c.code == 0);
  CHECK(table(c.out).rows.size() == 12);
  const auto d = table(slurp(dir / "d.csv"));
  CHECK(d.rows.size() == 2 * 4 * 53);
  for (std::size_t k = 1; k < d.rows.size(); ++k) {
    CHECK(std::abs(*examweight::csv::parse_real(d.rows[k - 1].fields[6])) >=
          std::abs(*examweight::csv::parse_real(d.rows[k].fields[6])));
  }
  CHECK(invoke({"evaluate", "--data", cohort().string(), "--deltas-out", "x.csv"}).code == 64);
  fs::remove_all(dir);
}

TEST_CASE("fit emits the long weights table for the chosen solver") {
  const Result r = invoke({"fit", "--data", cohort().string(), "--solver", "ols", "--scale",
                           "actual"});
  REQUIRE(r.code == 0);
  const auto t = table(r.out);
  CHECK(t.rows.size() == 53 + 1);
  for (const auto& row : t.rows) {
    CHECK(row.fields[1] == "ols_closed_form");
    CHECK(row.fields[2] == "actual");
  }
  CHECK(t.rows.back().fields[3] == "(intercept)");
}

TEST_CASE("analyze subcommands") {
  const Result q = invoke({"analyze", "--data", cohort().string(), "--exam", "final",
                           "--question", "MC7"});
  REQUIRE(q.code == 0);
  const auto t = table(q.out);
  CHECK(t.header == std::vector<std::string>{"student", "score", "ability"});
  REQUIRE(t.rows.size() == 9);
  for (std::size_t k = 1; k < t.rows.size(); ++k) {
    CHECK(*examweight::csv::parse_real(t.rows[k - 1].fields[2]) <=
          *examweight::csv::parse_real(t.rows[k].fields[2]));
  }

  const Result x = invoke({"analyze", "--data", cohort().string(), "--extremes", "3"});
  REQUIRE(x.code == 0);
  const auto xt = table(x.out);
  REQUIRE(xt.rows.size() == 6);
  CHECK(xt.rows[0].fields[1] == "linear_intercept");
  CHECK(xt.rows[0].fields[3] == "top");
  CHECK(xt.rows[3].fields[3] == "bottom");

  const Result d = invoke({"analyze", "--data", cohort().string()});
  REQUIRE(d.code == 0);
  CHECK(table(d.out).header.size() == 9);
}

TEST_CASE("strict mode turns tolerated non-convergence into exit 2") {
  const std::vector<std::string> args = {"evaluate", "--data", cohort().string(), "--tolerance",
                                         "1e-300"};
  const Result lax = invoke(args);
  CHECK(lax.code == 0);
  CHECK(lax.err.find("warning") != std::string::npos);

  std::vector<std::string> strict = args;
  strict.insert(strict.begin(), "--strict");
  CHECK(invoke(strict).code == 2);

  ::setenv("EXAMWEIGHT_STRICT", "1", 1);
  CHECK(invoke(args).code == 2);
  ::unsetenv("EXAMWEIGHT_STRICT");

  // A fold stopped far from the optimum is fatal either way.
  CHECK(invoke({"evaluate", "--data", cohort().string(), "--max-iterations", "0"}).code == 2);
}

TEST_CASE("generate is byte-deterministic and honours the spec file") {
  const fs::path a = scratch_dir("gen_a");
  const fs::path b = scratch_dir("gen_b");
  REQUIRE(invoke({"generate", "--seed", "7", "--out", a.string()}).code == 0);
  REQUIRE(invoke({"generate", "--seed", "7", "--out", b.string()}).code == 0);
  for (const char* f : {"components.csv", "final_scores.csv", "final_questions.csv",
                        "midterm_scores.csv", "midterm_questions.csv"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }

  const fs::path spec = a / "spec.json";
  std::ofstream(spec) << R"({"students": 5, "exams": [{"name": "final", "multiple_choice": 3,
                             "true_false": 1, "subparts": [2]}]})";
  const fs::path c = scratch_dir("gen_c");
  REQUIRE(invoke({"generate", "--spec", spec.string(), "--students", "6", "--out", c.string()})
              .code == 0);
  CHECK(table(slurp(c / "final_scores.csv")).rows.size() == 6);
  CHECK(table(slurp(c / "final_scores.csv")).header.size() == 1 + 6);
  CHECK_FALSE(fs::exists(c / "midterm_scores.csv"));

  const fs::path bad = a / "bad.json";
  std::ofstream(bad) << "{\"studnets\": 3}";
  const Result r = invoke({"generate", "--spec", bad.string(), "--out", c.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("bad.json") != std::string::npos);
  for (const auto& p : {a, b, c}) fs::remove_all(p);
}
