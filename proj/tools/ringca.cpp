// ringca: ring-road cellular-automaton experiment runner.
//
//   ringca <fd|spacetime|wave|validate> --config <path> [--out <dir>]
//
// Exit codes: 0 success, 1 invalid config or arguments, 2 runtime failure.

#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ringca/config.hpp"
#include "ringca/experiments.hpp"

namespace {

  constexpr int exit_ok = 0;
  constexpr int exit_invalid = 1;
  constexpr int exit_runtime = 2;

  void print_summary(const ringca::ExperimentConfig& cfg) {
    std::cout << "model " << ringca::to_string(cfg.model) << ", L " << cfg.run.length_cells
              << " cells, " << cfg.run.steps << " steps (warmup " << cfg.run.warmup << "), "
              << cfg.densities.size() << " fd densities, " << cfg.p_d_sweep.size()
              << " slowdown variants, " << cfg.seeds.size() << " seeds\n";
  }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ring-road cellular-automaton traffic experiments (NaSch, DTGBLM, DBBLM)"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Experiment configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  };
  auto* fd = app.add_subcommand("fd", "Fundamental-diagram sweep -> fd.csv");
  auto* st = app.add_subcommand("spacetime", "Space-time trajectory window -> spacetime.csv");
  auto* wave = app.add_subcommand("wave", "Jam-front wave speeds -> wave.csv");
  auto* validate = app.add_subcommand("validate", "Parse and check a config without running");
  for (auto* sub : {fd, st, wave, validate}) {
    add_common(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_invalid;
  }

  ringca::ExperimentConfig cfg;
  try {
    cfg = ringca::load_config(config_path);
    if (!out_dir.empty()) {
      cfg.output_dir = out_dir;
    }
  } catch (const ringca::ConfigError& e) {
    std::cerr << "ringca: " << e.what() << "\n";
    return exit_invalid;
  } catch (const std::exception& e) {
    std::cerr << "ringca: " << e.what() << "\n";
    return exit_runtime;
  }

  try {
    if (validate->parsed()) {
      std::cout << config_path << ": ok\n";
      print_summary(cfg);
      return exit_ok;
    }
    std::filesystem::path written;
    if (fd->parsed()) {
      written = ringca::cmd_fd(cfg);
    } else if (st->parsed()) {
      written = ringca::cmd_spacetime(cfg);
    } else {
      written = ringca::cmd_wave(cfg);
    }
    std::cout << "wrote " << written.string() << "\n";
    return exit_ok;
  } catch (const ringca::ConfigError& e) {
    std::cerr << "ringca: " << e.what() << "\n";
    return exit_invalid;
  } catch (const std::exception& e) {
    std::cerr << "ringca: " << e.what() << "\n";
    return exit_runtime;
  }
}
