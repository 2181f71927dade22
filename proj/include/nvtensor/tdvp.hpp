#pragma once

#include "nvtensor/krylov.hpp"
#include "nvtensor/mpo.hpp"
#include "nvtensor/tensor_train.hpp"

namespace nvt {

struct TdvpOptions {
  long chi_max = 64;
  double rel_floor = 1e-12;
  KrylovOptions krylov{20, 1e-10};
};

struct StepDiagnostics {
  TruncationReport trunc;
  double trace_drift = 0.0;  // |trace - 1| before any renormalization
  int krylov_dim_max = 0;
};

// Two-site time-dependent variational principle sweep for d(state)/dt =
// generator * state.  One step = forward half-sweep at dt/2 followed by a
// backward half-sweep at dt/2, with the usual reversed one-site updates in
// between.  Leaves the state canonical with center 0.  Does not renormalize.
class TdvpEngine {
 public:
  TdvpEngine(Mpo generator, TdvpOptions opt);

  StepDiagnostics step(TensorTrain& state, double dt) const;
  const Mpo& generator() const { return w_; }

 private:
  Mpo w_;
  TdvpOptions opt_;
};

StepDiagnostics tdvp_step(TensorTrain& state, const Mpo& generator, double dt,
                          const TdvpOptions& opt = {});

}  // namespace nvt
