#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include "nvtensor/model.hpp"
#include "nvtensor/mpo.hpp"
#include "nvtensor/tensor_train.hpp"
#include "nvtensor/trajectory.hpp"

namespace nvt {

// Orthonormal basis of 3x3 Hermitian matrices (trace inner product).
const std::array<Matrix3, 9>& hermitian_basis();

struct QfiOptions {
  // Bond budget of the symmetric-derivative operator; <= 0 resolves to twice
  // the state bond dimension, capped at 64.
  long chi_sld = 0;
  int restarts = 10;       // fresh random starting points
  double rel_tol = 1e-8;   // functional change per sweep, relative
  int max_sweeps = 200;
  double ridge = 1e-10;    // scaled by the mean diagonal, applied on bad conditioning
  std::uint64_t seed = 1;
};

struct QfiResult {
  double value = 0.0;
  Mpo sld;  // Hermitian site blocks by construction
  bool converged = false;
  int sweeps = 0;
  std::vector<double> restart_values;
};

// Quantum Fisher information through the variational functional
//   F(L) = 2 Tr(drho L) - Tr(rho L^2),
// maximized over MPOs with Hermitian site blocks by alternating local solves.
// Any iterate is a certified lower bound on the true value.  Preconditions:
// rho has unit trace and drho is traceless (both to 1e-8).
QfiResult qfi_local_sweep(const TensorTrain& rho, const TensorTrain& drho,
                          const QfiOptions& opt, const Mpo* warm_start = nullptr,
                          std::vector<double>* functional_trace = nullptr);

// Spectral-resolution reference: F = sum 2 |<i|drho|j>|^2 / (li + lj) over
// pairs with li + lj above the cutoff.
double qfi_exact(const Matrix& rho, const Matrix& drho, Matrix* sld_out = nullptr,
                 double cutoff = 1e-12);

// Functional value of a given candidate operator (diagnostic).
double qfi_functional(const TensorTrain& rho, const TensorTrain& drho, const Mpo& sld);

struct DerivativeOptions {
  double delta = 1e-3 * two_pi;  // Zeeman offset for the central difference
};

// Evolves the model at zeeman +- delta/2 to time dt * n_steps and returns
// (central state, central-difference derivative), both as MPDOs.
std::pair<TensorTrain, TensorTrain> derivative_mpdo(const ModelSpec& m,
                                                    const EngineOptions& engine, double dt,
                                                    int n_steps,
                                                    const DerivativeOptions& dopt = {},
                                                    const InitialState& init = {});

struct QfiDynamicsOptions {
  double dt = 1e-3;          // us
  int n_steps = 1000;
  int cadence = 10;          // steps between evaluations
  DerivativeOptions derivative;
  EngineOptions engine;
  InitialState init;
  QfiOptions qfi;
  int smoothing_window = 10;
};

struct QfiPoint {
  double t = 0.0;
  double f_raw = 0.0;    // per the parameter as given (units of time^2)
  double f_phase = 0.0;  // f_raw / t^2, dimensionless phase normalization
  bool converged = false;
  int sweeps = 0;
};

struct QfiSeries {
  std::vector<QfiPoint> points;
  std::vector<double> f_phase_smooth;  // trailing moving average of f_phase
};

QfiSeries qfi_dynamics(const ModelSpec& m, const QfiDynamicsOptions& opt);

}  // namespace nvt
