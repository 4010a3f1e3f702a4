#include "malgpro/harness.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "malgpro/adjoint.hpp"
#include "malgpro/errors.hpp"

namespace malgpro {

namespace {

using nlohmann::json;

std::ofstream open_for_write(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& file) {
  out.flush();
  if (!out) throw IoError("write failed for " + file.string());
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string() + (ec ? ": " + ec.message() : ""));
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? std::nan("") : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::vector<double> RunOutcome::final_control_errors() const {
  std::vector<double> out;
  if (!benchmark.has_analytical_control()) return out;
  for (const auto& r : repetitions) out.push_back(control_error(r.control, benchmark.analytical_control));
  return out;
}

double RunOutcome::mean_wall_ms() const {
  std::vector<double> all;
  for (const auto& r : repetitions) all.insert(all.end(), r.wall_ms.begin(), r.wall_ms.end());
  return all.empty() ? 0.0 : mean_of(all);
}

RunOutcome execute(const RunSpec& spec) {
  RunOutcome outcome{spec, make_benchmark(spec.problem_id, spec.params), {}};
  for (std::size_t r = 0; r < spec.repetitions; ++r) {
    SolveOptions options = spec.solve_options(r);
    options.reference = outcome.benchmark.analytical_control;
    try {
      outcome.repetitions.push_back(spec.method == Method::mal_gpro ? solve(outcome.benchmark.problem, options)
                                                                    : adsgd_solve(outcome.benchmark.problem, options));
    } catch (const UnstableProblemError& e) {
      throw UnstableProblemError(spec.problem_id + " (" + to_string(spec.method) + ", repetition " +
                                 std::to_string(r) + "): " + e.what());
    }
  }
  return outcome;
}

void write_artifacts(const RunOutcome& outcome, const std::filesystem::path& dir) {
  ensure_directory(dir);
  const BenchmarkProblem& bench = outcome.benchmark;
  const bool analytical = bench.has_analytical_control();
  const std::size_t k = bench.problem.control_dim;

  {
    const auto file = dir / "convergence.csv";
    auto out = open_for_write(file);
    out << "repetition,iteration,J,J_stderr,grad_norm" << (analytical ? ",E_c" : "") << '\n';
    for (std::size_t r = 0; r < outcome.repetitions.size(); ++r) {
      const SolveResult& res = outcome.repetitions[r];
      for (std::size_t i = 0; i < res.iterations; ++i) {
        out << r << ',' << i << ',' << format_number(res.objective[i].mean) << ','
            << format_number(res.objective[i].std_error) << ',' << format_number(res.gradient_norm[i]);
        if (analytical) out << ',' << format_number(res.control_error[i]);
        out << '\n';
      }
    }
    finish(out, file);
  }
  {
    const auto file = dir / "control.csv";
    auto out = open_for_write(file);
    out << "repetition,t";
    for (std::size_t c = 1; c <= k; ++c) out << ",u_" << c;
    if (analytical)
      for (std::size_t c = 1; c <= k; ++c) out << ",ua_" << c;
    out << '\n';
    for (std::size_t r = 0; r < outcome.repetitions.size(); ++r) {
      const PiecewiseControl& u = outcome.repetitions[r].control;
      const TimeGrid& grid = u.grid();
      for (std::size_t j = 0; j < grid.steps(); ++j) {
        const double t = grid.node(j);
        out << r << ',' << format_number(t);
        for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(k); ++c)
          out << ',' << format_number(u.values()(c, static_cast<Eigen::Index>(j)));
        if (analytical) {
          const Eigen::VectorXd ua = bench.analytical_control(t);
          for (Eigen::Index c = 0; c < ua.size(); ++c) out << ',' << format_number(ua(c));
        }
        out << '\n';
      }
    }
    finish(out, file);
  }
  {
    const auto file = dir / "timing.csv";
    auto out = open_for_write(file);
    out << "repetition,iteration,wall_ms\n";
    for (std::size_t r = 0; r < outcome.repetitions.size(); ++r) {
      const SolveResult& res = outcome.repetitions[r];
      for (std::size_t i = 0; i < res.wall_ms.size(); ++i)
        out << r << ',' << i << ',' << format_number(res.wall_ms[i]) << '\n';
    }
    finish(out, file);
  }
  {
    const auto file = dir / "summary.json";
    json s;
    s["library_version"] = kVersion;
    s["problem"] = bench.id;
    s["method"] = to_string(outcome.spec.method);
    s["master_seed"] = outcome.spec.master_seed;
    s["repetitions"] = outcome.repetitions.size();
    s["problem_metadata"] = bench.metadata;
    s["problem_notes"] = bench.notes;
    const auto errors = outcome.final_control_errors();
    if (analytical) {
      s["final_control_error"] = {{"mean", number_or_null(mean_of(errors))},
                                  {"std", sample_std(errors)},
                                  {"values", errors}};
    } else {
      s["final_control_error"] = nullptr;
    }
    json reps = json::array();
    for (std::size_t r = 0; r < outcome.repetitions.size(); ++r) {
      const SolveResult& res = outcome.repetitions[r];
      json item{{"seed", outcome.spec.master_seed + r},
                {"iterations", res.iterations},
                {"termination", to_string(res.termination)},
                {"mean_wall_ms", res.mean_wall_ms()}};
      item["final_objective"] = res.objective.empty() ? json(nullptr) : json(res.objective.back().mean);
      item["final_objective_stderr"] =
          res.objective.empty() ? json(nullptr) : json(res.objective.back().std_error);
      reps.push_back(item);
    }
    s["runs"] = reps;
    s["termination"] = outcome.repetitions.empty() ? json(nullptr)
                                                   : json(to_string(outcome.repetitions.back().termination));
    s["mean_wall_ms_per_iteration"] = outcome.mean_wall_ms();
    s["spec"] = json::parse(outcome.spec.source.empty() ? "{}" : outcome.spec.source);
    auto out = open_for_write(file);
    out << s.dump(2) << '\n';
    finish(out, file);
  }
}

RunOutcome run(const RunSpec& spec) {
  // Fail on an unusable directory before spending time on the solve.
  ensure_directory(spec.output);
  RunOutcome outcome = execute(spec);
  write_artifacts(outcome, spec.output);
  return outcome;
}

std::vector<RunOutcome> compare(const std::vector<RunSpec>& specs, const std::filesystem::path& dir) {
  if (specs.empty()) throw InvalidArgument("compare: no specs given");
  const RunSpec& first = specs.front();
  for (const auto& s : specs) {
    if (s.problem_id != first.problem_id || s.params.dim != first.params.dim || s.params.seed != first.params.seed ||
        s.params.cubic != first.params.cubic || s.params.sigma != first.params.sigma)
      throw InvalidArgument("compare: specs reference different problems");
    if (s.steps != first.steps || s.horizon != first.horizon)
      throw InvalidArgument("compare: specs use different grids");
  }
  ensure_directory(dir);
  std::vector<RunOutcome> outcomes;
  for (const auto& s : specs) outcomes.push_back(execute(s));

  const auto file = dir / "compare.csv";
  auto out = open_for_write(file);
  out << "method,final_E_c,final_J,mean_wall_ms,iterations\n";
  for (const auto& o : outcomes) {
    const auto errors = o.final_control_errors();
    std::vector<double> final_j, iterations;
    for (const auto& r : o.repetitions) {
      final_j.push_back(r.objective.empty() ? std::nan("") : r.objective.back().mean);
      iterations.push_back(static_cast<double>(r.iterations));
    }
    out << to_string(o.spec.method) << ',' << (errors.empty() ? "" : format_number(mean_of(errors))) << ','
        << format_number(mean_of(final_j)) << ',' << format_number(o.mean_wall_ms()) << ','
        << format_number(mean_of(iterations)) << '\n';
  }
  finish(out, file);
  return outcomes;
}

}  // namespace malgpro
