#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "malgpro/benchmarks.hpp"
#include "malgpro/run_spec.hpp"
#include "malgpro/solver.hpp"

namespace malgpro {

inline constexpr const char* kVersion = "0.1.0";

struct RunOutcome {
  RunSpec spec;
  BenchmarkProblem benchmark;
  std::vector<SolveResult> repetitions;

  /// Final E_c of each repetition; empty without an analytical control.
  std::vector<double> final_control_errors() const;
  double mean_wall_ms() const;
};

/// Runs every repetition (master_seed + r) without writing anything.
RunOutcome execute(const RunSpec& spec);

/// Writes convergence.csv, control.csv, timing.csv and summary.json into `dir`.
///
///   convergence.csv  repetition,iteration,J,J_stderr,grad_norm[,E_c]
///   control.csv      repetition,t,u_1..u_k[,ua_1..ua_k]
///   timing.csv       repetition,iteration,wall_ms
///
/// Timings live in their own file so the other CSVs are a pure function of the spec.
void write_artifacts(const RunOutcome& outcome, const std::filesystem::path& dir);

/// execute followed by write_artifacts into spec.output.
RunOutcome run(const RunSpec& spec);

/// Runs each spec and writes compare.csv
///   method,final_E_c,final_J,mean_wall_ms,iterations
/// into `dir`. Specs must share problem and grid (InvalidArgument otherwise).
std::vector<RunOutcome> compare(const std::vector<RunSpec>& specs, const std::filesystem::path& dir);

/// Shortest decimal that round-trips to `value`.
std::string format_number(double value);

}  // namespace malgpro
