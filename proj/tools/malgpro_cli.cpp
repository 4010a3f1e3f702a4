#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "malgpro/errors.hpp"
#include "malgpro/harness.hpp"
#include "malgpro/run_spec.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitInstability = 3;
constexpr int kExitIo = 4;

int report(const std::exception& e, int code) {
  std::cerr << "malgpro: " << e.what() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Malliavin gradient-projection solver for stochastic optimal control"};
  app.set_version_flag("--version", std::string(malgpro::kVersion));
  app.require_subcommand(1);

  std::string spec_path;
  std::optional<std::string> run_out;
  std::optional<std::uint64_t> run_seed;
  auto* run_cmd = app.add_subcommand("run", "Solve one run specification and write its artifacts");
  run_cmd->add_option("spec", spec_path, "JSON run specification")->required();
  run_cmd->add_option("--out", run_out, "Output directory (overrides the spec)");
  run_cmd->add_option("--seed", run_seed, "Master seed (overrides the spec)");

  std::vector<std::string> compare_paths;
  std::string compare_out = "out";
  auto* compare_cmd = app.add_subcommand("compare", "Run several specs on one problem and tabulate them");
  compare_cmd->add_option("specs", compare_paths, "JSON run specifications")->required();
  compare_cmd->add_option("--out", compare_out, "Output directory for compare.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*run_cmd) {
      malgpro::RunSpec spec = malgpro::load_spec(spec_path);
      if (run_out) spec.output = *run_out;
      if (run_seed) spec.master_seed = *run_seed;
      const auto outcome = malgpro::run(spec);
      const auto errors = outcome.final_control_errors();
      std::cout << "wrote " << spec.output.string() << " (" << outcome.repetitions.size() << " repetition"
                << (outcome.repetitions.size() == 1 ? "" : "s");
      if (!errors.empty()) std::cout << ", final E_c " << malgpro::format_number(errors.front());
      std::cout << ")\n";
    } else {
      std::vector<malgpro::RunSpec> specs;
      for (const auto& p : compare_paths) specs.push_back(malgpro::load_spec(p));
      malgpro::compare(specs, compare_out);
      std::cout << "wrote " << (std::filesystem::path(compare_out) / "compare.csv").string() << '\n';
    }
  } catch (const malgpro::IoError& e) {
    return report(e, kExitIo);
  } catch (const malgpro::InvalidArgument& e) {
    return report(e, kExitValidation);
  } catch (const malgpro::LookupError& e) {
    return report(e, kExitValidation);
  } catch (const malgpro::ConfigurationError& e) {
    return report(e, kExitValidation);
  } catch (const malgpro::UnstableProblemError& e) {
    return report(e, kExitInstability);
  } catch (const malgpro::PoisonedGradientError& e) {
    return report(e, kExitInstability);
  } catch (const malgpro::DivergedPathError& e) {
    return report(e, kExitInstability);
  } catch (const std::exception& e) {
    return report(e, 1);
  }
  return 0;
}
