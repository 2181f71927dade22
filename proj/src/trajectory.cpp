#include "nvtensor/trajectory.hpp"

#include <cmath>
#include <limits>

namespace nvt {

std::vector<Matrix> InitialState::factors(int n) const {
  std::vector<Matrix> out;
  switch (kind) {
    case Kind::ZeroProduct: {
      Matrix rho = Matrix::Zero(3, 3);
      rho(1, 1) = 1.0;  // |0><0|, m = 0 is the middle basis state
      out.assign(static_cast<std::size_t>(n), rho);
      break;
    }
    case Kind::PlusProduct: {
      // (|0> + |-1>)/sqrt(2), the equatorial probe state of the lower branch
      Vector psi = Vector::Zero(3);
      psi(1) = 1.0 / std::sqrt(2.0);
      psi(2) = 1.0 / std::sqrt(2.0);
      Matrix rho = psi * psi.adjoint();
      out.assign(static_cast<std::size_t>(n), rho);
      break;
    }
    case Kind::Custom: {
      if (static_cast<int>(local_rho.size()) != n)
        throw std::invalid_argument("InitialState: custom factor count mismatch");
      out = local_rho;
      break;
    }
  }
  return out;
}

TrajectoryRunner::TrajectoryRunner(const ModelSpec& m, const EngineOptions& opt, double dt,
                                   const InitialState& init)
    : opt_(opt), dt_(dt) {
  m.validate();
  if (!(dt >= 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("TrajectoryRunner: bad time step");
  const std::vector<Matrix> factors = init.factors(m.n());
  switch (opt.kind) {
    case EngineKind::Tdvp: {
      state_ = product_mpdo(factors);
      Mpo gen = mpo_from_terms(build_superop_terms(m), m.n(), 9, 1e-13);
      tdvp_engine_ = std::make_unique<TdvpEngine>(std::move(gen), opt.tdvp);
      break;
    }
    case EngineKind::Wii: {
      state_ = product_mpdo(factors);
      wii_engine_ = std::make_unique<WiiPropagator>(m, dt, opt.wii);
      break;
    }
    case EngineKind::DenseReference: {
      dense_engine_ = std::make_unique<DenseLindblad>(m, opt.ed);
      dense_state_ = dense_engine_->product_vec(factors);
      break;
    }
  }
}

StepDiagnostics TrajectoryRunner::advance() {
  StepDiagnostics diag;
  if (tdvp_engine_) {
    diag = tdvp_engine_->step(state_, dt_);
    const cd tr = mpdo_trace(state_);
    diag.trace_drift = std::abs(tr - cd(1.0, 0.0));
    mpdo_renormalize(state_);
  } else if (wii_engine_) {
    diag = wii_engine_->step(state_);
  } else {
    dense_engine_->step(dense_state_, dt_);
    const cd tr = dense_engine_->trace(dense_state_);
    diag.trace_drift = std::abs(tr - cd(1.0, 0.0));
    if (tr == cd(0.0, 0.0)) throw EngineError("dense reference: zero trace");
    dense_state_ /= tr;
  }
  ++steps_;
  time_ = dt_ * steps_;
  return diag;
}

cd TrajectoryRunner::mean_sz() const {
  const Matrix3 sz = spin1_operators().sz;
  if (dense_engine_) return dense_engine_->mean_site_expectation(dense_state_, sz);
  return mpdo_mean_site_expectation(state_, sz);
}

double TrajectoryRunner::middle_opee() const {
  if (dense_engine_) {
    if (dense_engine_->n() < 2) return std::numeric_limits<double>::quiet_NaN();
    return dense_engine_->middle_cut_operator_entropy(dense_state_);
  }
  if (state_.n() < 2) return std::numeric_limits<double>::quiet_NaN();
  return operator_entanglement_entropy(state_, state_.n() / 2);
}

const TensorTrain& TrajectoryRunner::state() const {
  if (dense_engine_) throw std::logic_error("TrajectoryRunner: dense engine has no train");
  return state_;
}

const Vector& TrajectoryRunner::dense_state() const {
  if (!dense_engine_) throw std::logic_error("TrajectoryRunner: no dense state");
  return dense_state_;
}

Trajectory run_trajectory(const ModelSpec& m, const EngineOptions& opt, double dt,
                          int n_steps, const RecordOptions& rec, const InitialState& init) {
  if (n_steps < 0) throw std::invalid_argument("run_trajectory: negative step count");
  TrajectoryRunner runner(m, opt, dt, init);
  Trajectory traj;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  auto record = [&](const StepDiagnostics* diag) {
    traj.times.push_back(runner.time());
    const cd sz = runner.mean_sz();
    if (!std::isfinite(sz.real()) || !std::isfinite(sz.imag()))
      throw EngineError("run_trajectory: non-finite observable");
    traj.mean_sz.push_back(sz);
    const bool want_opee =
        rec.opee_cadence > 0 && (runner.steps_taken() % rec.opee_cadence == 0);
    traj.opee_mid.push_back(want_opee ? runner.middle_opee() : nan);
    traj.trace_drift.push_back(diag ? diag->trace_drift : 0.0);
    traj.step_epsilon.push_back(diag ? diag->trunc.epsilon : 0.0);
    if (diag) traj.cumulative_epsilon = std::hypot(traj.cumulative_epsilon, diag->trunc.epsilon);
  };

  record(nullptr);
  for (int k = 0; k < n_steps; ++k) {
    StepDiagnostics diag = runner.advance();
    record(&diag);
  }
  return traj;
}

}  // namespace nvt
