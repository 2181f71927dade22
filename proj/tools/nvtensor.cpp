#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "nvtensor/config.hpp"
#include "nvtensor/errors.hpp"
#include "nvtensor/experiments.hpp"

namespace {

bool experiment_known(const std::string& name) {
  for (const auto& e : nvt::experiment_registry())
    if (e.name == name) return true;
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tensor-network simulator for driven, dissipative NV spin-1 chains"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 1;

  CLI::App* run = app.add_subcommand("run", "run an experiment described by a config file");
  run->add_option("config", config_path, "config file path")->required();
  run->add_option("--out", out_dir, "output directory (overrides config and NVTENSOR_OUT)");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "master seed override");
  run->add_option("--threads", threads, "worker threads for independent grid points")
      ->check(CLI::PositiveNumber);

  CLI::App* validate =
      app.add_subcommand("validate", "parse a config file and check all guards");
  validate->add_option("config", config_path, "config file path")->required();

  app.add_subcommand("list-experiments", "print the experiment registry");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("list-experiments")) {
      for (const auto& e : nvt::experiment_registry())
        std::printf("%-20s %s\n", e.name.c_str(), e.summary.c_str());
      return 0;
    }

    if (app.got_subcommand("validate")) {
      const nvt::ExperimentConfig c = nvt::load_config_file(config_path);
      nvt::validate_config(c);
      if (!experiment_known(c.experiment))
        throw nvt::ConfigError("unknown experiment: " + c.experiment);
      std::printf("ok: %s (config %s)\n", c.experiment.c_str(),
                  nvt::config_hash(c).c_str());
      return 0;
    }

    nvt::ExperimentConfig c = nvt::load_config_file(config_path);
    if (seed_opt->count() > 0) c.seed = seed;
    if (!out_dir.empty()) {
      c.out_dir = out_dir;
    } else if (const char* env = std::getenv("NVTENSOR_OUT")) {
      if (*env != '\0') c.out_dir = env;
    }

    const nvt::RunRecord record = nvt::run_experiment(c, threads);
    std::printf("%s\n", record.version.c_str());
    std::printf("experiment: %s\n", c.experiment.c_str());
    std::printf("config: %s seed: %llu\n", record.config_hash.c_str(),
                static_cast<unsigned long long>(c.seed));
    std::printf("wall: %.3f s\n", record.wall_seconds);
    for (const auto& p : record.csv_paths) std::printf("wrote %s\n", p.c_str());
    return 0;
  } catch (const nvt::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const nvt::CapacityError& e) {
    std::fprintf(stderr, "capacity guard: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "engine error: %s\n", e.what());
    return 4;
  }
}
