#pragma once

#include <functional>

#include "nvtensor/dtensor.hpp"
#include "nvtensor/errors.hpp"

namespace nvt {

struct KrylovOptions {
  int max_dim = 20;
  double tol = 1e-10;  // relative to the input norm
};

struct KrylovInfo {
  int dim_used = 0;
  double residual = 0.0;
  bool breakdown = false;  // subspace became invariant (result exact)
};

// exp(tau * A) v through an Arnoldi subspace; A enters only through its
// action.  Supports non-normal A and complex tau.  Throws KrylovError with
// the last residual estimate if the subspace cap is hit before convergence.
Vector krylov_expv(const std::function<Vector(const Vector&)>& apply, const Vector& v,
                   cd tau, const KrylovOptions& opt = {}, KrylovInfo* info = nullptr);

}  // namespace nvt
