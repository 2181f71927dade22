#pragma once

#include <string>
#include <vector>

#include "nvtensor/config.hpp"
#include "nvtensor/trajectory.hpp"

namespace nvt {

struct RunRecord {
  std::string config_hash;
  std::string version;
  double wall_seconds = 0.0;
  std::vector<std::string> csv_paths;
};

// Pointwise |<Sz>_a - <Sz>_b|, real and imaginary parts separately, plus the
// max-over-time and final-time values.  Requires identical time grids.
struct ErrorMetrics {
  std::vector<double> abs_err_re;
  std::vector<double> abs_err_im;
  double max_re = 0.0;
  double max_im = 0.0;
  double final_re = 0.0;
  double final_im = 0.0;
};
ErrorMetrics error_metrics(const Trajectory& a, const Trajectory& b);

struct ExperimentInfo {
  std::string name;
  std::string summary;
};
const std::vector<ExperimentInfo>& experiment_registry();

// Runs the named experiment, writing one CSV per series into c.out_dir.
// Deterministic for a given config + seed.  threads > 1 fans independent grid
// points out to a worker pool; outputs are still written in a fixed order.
RunRecord run_experiment(const ExperimentConfig& c, int threads = 1);

// First row: column names.  Second row: the comment string (config hash and
// seed).  Cells carry 17 significant digits; any non-finite cell aborts.
void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows, const std::string& comment);

std::string version_string();

}  // namespace nvt
