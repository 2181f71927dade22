#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nvtensor/model.hpp"
#include "nvtensor/trajectory.hpp"

namespace nvt {

// Raw [section] / key = value file content.  '#' starts a comment, values may
// be comma-separated lists.  Sections and keys are case-sensitive.
using ConfigMap = std::map<std::string, std::map<std::string, std::string>>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap parse_config_file(const std::string& path);

// One experiment run.  Interface units are MHz (linear frequencies), nm, ns
// and 1/us for the dephasing rates; conversion to internal angular units
// happens when the model and engine objects are built.
struct ExperimentConfig {
  // [run]
  std::string experiment = "engine-comparison";
  std::uint64_t seed = 1;

  // [model]
  int sites = 3;
  double spacing_nm = 2.0;
  std::vector<double> gamma = {0.0};     // 1/us, a list drives scan experiments
  std::string interaction = "rotating";  // rotating | lab
  double rabi_mhz = 2.0;                 // Omega / 2pi
  double splitting_mhz = 407.0;          // 2 * zeeman / 2pi
  std::string initial = "zero";          // zero | plus

  // [engine]
  std::string engine = "tdvp";  // tdvp | wii | ed
  double dt_ns = 1.0;
  int n_steps = 500;
  long chi_max = 64;
  std::vector<long> chi_list = {2, 4, 8, 16, 32};  // bond-scan grid
  double rel_floor = 1e-12;
  double krylov_tol = 1e-10;
  int krylov_dim = 30;
  bool wii_substeps = true;

  // [qfi]
  double qfi_delta_mhz = 1e-3;  // central-difference step on the splitting
  int qfi_restarts = 10;
  long qfi_chi_sld = 0;  // <= 0: twice the state bond, capped at 64
  int qfi_cadence = 10;
  int qfi_smoothing = 10;

  // [output]
  std::string out_dir = "out";
  int opee_cadence = 1;

  bool operator==(const ExperimentConfig&) const = default;
};

// Strict mapping: unknown sections or keys raise ConfigError, as do malformed
// values.  Missing keys keep their defaults.
ExperimentConfig config_from_map(const ConfigMap& m);
ExperimentConfig load_config_file(const std::string& path);

// Canonical text form; parse(serialize(c)) reproduces c exactly (17
// significant digits on floating-point fields).
std::string serialize_config(const ExperimentConfig& c);

// Hard limits (CapacityError) and value sanity (ConfigError).
void validate_config(const ExperimentConfig& c);

// FNV-1a over the canonical serialization, as a fixed-width hex string.
std::string config_hash(const ExperimentConfig& c);

// --- derived internal-unit objects -----------------------------------------

double config_dt_us(const ExperimentConfig& c);
ModelSpec model_from_config(const ExperimentConfig& c, double gamma_per_us);
EngineOptions engine_from_config(const ExperimentConfig& c);
EngineOptions engine_from_config(const ExperimentConfig& c, const std::string& engine_name);
InitialState initial_from_config(const ExperimentConfig& c);

}  // namespace nvt
