#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "malgpro/benchmarks.hpp"
#include "malgpro/errors.hpp"
#include "malgpro/harness.hpp"
#include "malgpro/run_spec.hpp"

using namespace malgpro;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "malgpro-tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

int cli(const std::string& args) {
  const std::string command = std::string(MALGPRO_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("spec defaults") {
  const fs::path dir = scratch("defaults");
  const RunSpec spec = load_spec(write_file(dir / "s.json", R"({"problem": "scalar-bs"})"));
  CHECK(spec.problem_id == "scalar-bs");
  CHECK(spec.method == Method::mal_gpro);
  CHECK(spec.steps == 100);
  CHECK(spec.batch == 100);
  CHECK(spec.max_iterations == 500);
  CHECK(spec.repetitions == 1);
  CHECK(spec.rate.at(0, 10) == doctest::Approx(1e-2));
  CHECK(spec.solve_options(3).master_seed == 3);
}

TEST_CASE("spec validation") {
  try {
    parse_spec(R"({"problem": "scalar-bs", "steps": 0})");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "steps");
  }
  try {
    parse_spec(R"({"problem": "nope"})");
    FAIL("expected a lookup error");
  } catch (const LookupError& e) {
    CHECK(std::string(e.what()).find("vector-tracking") != std::string::npos);
  }
  try {
    parse_spec(R"({"problem": "scalar-bs", "stepz": 10})");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("stepz") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_spec(R"({"problem": "scalar-bs", "rate": 0.1, "schedule": {"start": 0.1, "end": 0.2}})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_spec(R"({"problem": "scalar-bs", "method": "newton"})"), ValidationError);
  CHECK_THROWS_AS(parse_spec(R"({"problem": "scalar-bs", "horizon": 2})"), ValidationError);
  CHECK_THROWS_AS(parse_spec("{not json"), ValidationError);
  CHECK_THROWS_AS(load_spec("/nonexistent/spec.json"), IoError);

  const RunSpec lq = parse_spec(R"({"problem": {"id": "lq", "dim": 5, "seed": 9}, "method": "ad-sgd"})");
  CHECK(lq.params.dim == 5);
  CHECK(lq.params.seed == 9);
  CHECK(lq.method == Method::ad_sgd);
}

TEST_CASE("shipped run specs parse") {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(MALGPRO_SPEC_DIR)) {
    if (entry.path().extension() != ".json") continue;
    INFO(entry.path().string());
    CHECK_NOTHROW(load_spec(entry.path()));
    ++count;
  }
  CHECK(count >= 1);
}

TEST_CASE("zero iterations leave the initial control") {
  const fs::path dir = scratch("zero");
  RunSpec spec = parse_spec(R"({"problem": "scalar-bs", "max_iterations": 0, "batch": 10})");
  spec.output = dir;
  const RunOutcome outcome = run(spec);
  REQUIRE(outcome.repetitions.size() == 1);
  CHECK(outcome.repetitions[0].control.values().isZero());
  const TimeGrid grid(1.0, 100);
  CHECK(outcome.final_control_errors().at(0) ==
        doctest::Approx(control_error(PiecewiseControl(grid, 1), outcome.benchmark.analytical_control)));
  for (const char* f : {"convergence.csv", "control.csv", "timing.csv", "summary.json"}) CHECK(fs::exists(dir / f));
}

TEST_CASE("artifacts are reproducible") {
  const fs::path a = scratch("repro-a"), b = scratch("repro-b");
  const std::string text =
      R"({"problem": "scalar-bs", "max_iterations": 5, "batch": 20, "steps": 20, "repetitions": 2, "master_seed": 4})";
  RunSpec spec = parse_spec(text);
  spec.output = a;
  run(spec);
  spec.output = b;
  run(spec);
  for (const char* f : {"convergence.csv", "control.csv"}) CHECK(slurp(a / f) == slurp(b / f));
  const std::string header = slurp(a / "convergence.csv").substr(0, slurp(a / "convergence.csv").find('\n'));
  CHECK(header == "repetition,iteration,J,J_stderr,grad_norm,E_c");
}

TEST_CASE("compare") {
  const fs::path dir = scratch("compare");
  RunSpec mal = parse_spec(R"({"problem": "scalar-bs", "max_iterations": 3, "batch": 10, "steps": 10})");
  RunSpec ad = parse_spec(R"({"problem": "scalar-bs", "method": "ad-sgd", "max_iterations": 3, "batch": 10, "steps": 10})");
  mal.output = dir / "mal";
  ad.output = dir / "ad";
  compare({mal, ad}, dir);
  std::istringstream rows(slurp(dir / "compare.csv"));
  std::string line;
  int count = 0;
  std::getline(rows, line);
  CHECK(line == "method,final_E_c,final_J,mean_wall_ms,iterations");
  while (std::getline(rows, line))
    if (!line.empty()) ++count;
  CHECK(count == 2);

  RunSpec other = parse_spec(R"({"problem": "scalar-bs", "max_iterations": 3, "batch": 10, "steps": 20})");
  CHECK_THROWS_AS(compare({mal, other}, dir), InvalidArgument);
}

TEST_CASE("unwritable output") {
  const fs::path dir = scratch("blocked");
  write_file(dir / "file", "x");
  RunSpec spec = parse_spec(R"({"problem": "scalar-bs", "max_iterations": 0, "batch": 10})");
  spec.output = dir / "file" / "sub";
  CHECK_THROWS_AS(run(spec), IoError);
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  const std::string good =
      write_file(dir / "good.json", R"({"problem": "scalar-bs", "max_iterations": 2, "batch": 10, "steps": 10})");
  const std::string bad = write_file(dir / "bad.json", R"({"problem": "scalar-bs", "steps": 0})");
  const std::string unknown = write_file(dir / "unknown.json", R"({"problem": "nope"})");
  CHECK(cli("run " + good + " --out " + (dir / "out").string()) == 0);
  CHECK(fs::exists(dir / "out" / "summary.json"));
  CHECK(cli("run " + bad) == 2);
  CHECK(cli("run " + unknown) == 2);
  CHECK(cli("run " + (dir / "missing.json").string()) == 4);
  CHECK(cli("frobnicate") == 2);
  CHECK(cli("compare " + good + " " + good + " --out " + (dir / "cmp").string()) == 0);
  CHECK(fs::exists(dir / "cmp" / "compare.csv"));
}
