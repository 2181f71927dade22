#pragma once

#include "nvtensor/model.hpp"
#include "nvtensor/mpo.hpp"
#include "nvtensor/tdvp.hpp"

namespace nvt {

// First-order matrix product propagator for exp(tau * generator), built site
// by site from the triangular generator MPO (layout of
// triangular_mpo_from_terms).  Each site block is an exact exponential on the
// physical space tensored with a four-state hard-core auxiliary register, so
// purely on-site generators are reproduced exactly and pair terms to first
// order in tau.
Mpo wii_propagator(const Mpo& triangular_generator, cd tau);

struct WiiOptions {
  long chi_max = 64;
  double rel_floor = 1e-12;
  // Split each step into two conjugate complex substeps; cancels the leading
  // non-Hermitian step artifact at the cost of two MPO applications.
  bool complex_substeps = true;
};

class WiiPropagator {
 public:
  WiiPropagator(const ModelSpec& m, double dt, const WiiOptions& opt);
  WiiPropagator(const Mpo& triangular_generator, double dt, const WiiOptions& opt);

  // Applies the step factors, truncates to the configured bond budget and
  // renormalizes the trace.  Reports the pre-rescale trace drift.
  StepDiagnostics step(TensorTrain& state) const;

  const std::vector<Mpo>& factors() const { return factors_; }

 private:
  void build(const Mpo& gen, double dt);

  std::vector<Mpo> factors_;
  WiiOptions opt_;
};

StepDiagnostics wii_step(TensorTrain& state, const ModelSpec& m, double dt,
                         const WiiOptions& opt = {});

}  // namespace nvt
