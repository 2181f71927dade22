#pragma once

#include <memory>
#include <optional>

#include "nvtensor/ed.hpp"
#include "nvtensor/model.hpp"
#include "nvtensor/tdvp.hpp"
#include "nvtensor/wii.hpp"

namespace nvt {

enum class EngineKind { Tdvp, Wii, DenseReference };

struct EngineOptions {
  EngineKind kind = EngineKind::Tdvp;
  TdvpOptions tdvp;
  WiiOptions wii;
  EdOptions ed;
};

struct InitialState {
  enum class Kind { ZeroProduct, PlusProduct, Custom };
  Kind kind = Kind::ZeroProduct;
  std::vector<Matrix> local_rho;  // used when kind == Custom

  // Resolved per-site density matrices.
  std::vector<Matrix> factors(int n) const;
};

struct RecordOptions {
  // Operator-space entropy across the middle cut every k steps; 0 disables.
  int opee_cadence = 1;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<cd> mean_sz;
  std::vector<double> opee_mid;      // NaN where not recorded
  std::vector<double> trace_drift;   // |trace - 1| before renormalization
  std::vector<double> step_epsilon;  // truncation weight discarded that step
  double cumulative_epsilon = 0.0;
};

// Steps one model/engine combination with a fixed time step, renormalizing
// the trace after every step.  Exposes the live state so observables beyond
// the standard records can be evaluated mid-run.
class TrajectoryRunner {
 public:
  TrajectoryRunner(const ModelSpec& m, const EngineOptions& opt, double dt,
                   const InitialState& init = {});

  StepDiagnostics advance();  // one step of dt
  double time() const { return time_; }
  double dt() const { return dt_; }
  int steps_taken() const { return steps_; }

  cd mean_sz() const;
  double middle_opee() const;  // NaN for a single site

  bool dense() const { return static_cast<bool>(dense_engine_); }
  const TensorTrain& state() const;
  const Vector& dense_state() const;

 private:
  EngineOptions opt_;
  double dt_;
  double time_ = 0.0;
  int steps_ = 0;

  TensorTrain state_;
  std::unique_ptr<TdvpEngine> tdvp_engine_;
  std::unique_ptr<WiiPropagator> wii_engine_;
  std::unique_ptr<DenseLindblad> dense_engine_;
  Vector dense_state_;
};

Trajectory run_trajectory(const ModelSpec& m, const EngineOptions& opt, double dt,
                          int n_steps, const RecordOptions& rec = {},
                          const InitialState& init = {});

}  // namespace nvt
