#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <unsupported/Eigen/KroneckerProduct>

#include "nvtensor/qfi.hpp"

using namespace nvt;

namespace {

std::mt19937_64 rng(77001u);

Matrix random_matrix(long r, long c) {
  std::normal_distribution<double> g;
  Matrix m(r, c);
  for (long i = 0; i < r; ++i)
    for (long j = 0; j < c; ++j) m(i, j) = cd(g(rng), g(rng));
  return m;
}

Matrix random_density(long d) {
  const Matrix a = random_matrix(d, d);
  Matrix rho = a * a.adjoint();
  rho /= rho.trace();
  return rho;
}

Matrix random_traceless_hermitian(long d) {
  Matrix a = random_matrix(d, d);
  a = (a + a.adjoint()).eval();
  a -= (a.trace() / static_cast<double>(d)) * Matrix::Identity(d, d);
  return a;
}

TensorTrain train_of_density(const Matrix& rho, int n) {
  return train_from_dense(density_matrix_to_paired_vec(rho, n),
                          std::vector<long>(static_cast<std::size_t>(n), 9));
}

// d(rho)/d(theta) for evolution exp(-i theta G): -i [G, rho]
Matrix phase_derivative(const Matrix& g, const Matrix& rho) {
  return cd(0.0, -1.0) * (g * rho - rho * g);
}

// the collective Sz as a dense matrix on n spin-1 sites
Matrix collective_sz(int n) {
  const Spin1& s = spin1_operators();
  long dim = 1;
  for (int k = 0; k < n; ++k) dim *= 3;
  Matrix out = Matrix::Zero(dim, dim);
  for (int site = 0; site < n; ++site) {
    Matrix term = Matrix::Identity(1, 1);
    for (int k = 0; k < n; ++k) {
      const Matrix f = (k == site) ? Matrix(s.sz) : Matrix(Matrix3::Identity());
      term = Eigen::kroneckerProduct(term, f).eval();
    }
    out += term;
  }
  return out;
}

// MPDO-train derivative under the collective-Sz phase: sum over sites of the
// single-site commutator superoperator applied to rho
TensorTrain phase_derivative_train(const TensorTrain& rho) {
  const Matrix gen = hamiltonian_superop(Matrix(spin1_operators().sz), 1);
  TensorTrain sum;
  for (int k = 0; k < rho.n(); ++k) {
    TensorTrain branch = rho;
    apply_single_site(branch, k, gen);
    sum = (k == 0) ? branch : train_add(sum, 1.0, branch, 1.0);
  }
  train_compress(sum, 0, 1e-13);
  return sum;
}

double dense_functional(const Matrix& rho, const Matrix& drho, const Matrix& l) {
  return (2.0 * (drho * l).trace() - (rho * l * l).trace()).real();
}

}  // namespace

TEST(qfi, hermitian_basis_is_orthonormal_and_complete) {
  const auto& basis = hermitian_basis();
  for (int a = 0; a < 9; ++a) {
    EXPECT_LT((basis[static_cast<std::size_t>(a)] -
               basis[static_cast<std::size_t>(a)].adjoint()).norm(), 1e-14);
    for (int b = 0; b < 9; ++b) {
      const cd dot = (basis[static_cast<std::size_t>(a)] * basis[static_cast<std::size_t>(b)]).trace();
      EXPECT_NEAR(dot.real(), a == b ? 1.0 : 0.0, 1e-13);
      EXPECT_NEAR(dot.imag(), 0.0, 1e-13);
    }
  }
  Matrix h = random_matrix(3, 3);
  h = (h + h.adjoint()).eval();
  Matrix rebuilt = Matrix::Zero(3, 3);
  for (const auto& b : basis) rebuilt += (Matrix3(h).adjoint() * b).trace().real() * b;
  EXPECT_LT((rebuilt - h).norm(), 1e-12);
}

TEST(qfi, exact_reference_reproduces_pure_state_variance) {
  for (int rep = 0; rep < 5; ++rep) {
    Vector psi = random_matrix(9, 1);
    psi /= psi.norm();
    const Matrix rho = psi * psi.adjoint();
    const Matrix g = random_traceless_hermitian(9);
    const cd mean = psi.adjoint() * g * psi;
    const cd second = psi.adjoint() * g * g * psi;
    const double var = second.real() - mean.real() * mean.real();
    EXPECT_NEAR(qfi_exact(rho, phase_derivative(g, rho)), 4.0 * var,
                1e-9 * std::max(1.0, 4.0 * var));
  }
}

TEST(qfi, exact_reference_satisfies_the_sld_equation) {
  const Matrix rho = random_density(9);
  const Matrix drho = random_traceless_hermitian(9);
  Matrix sld;
  const double f = qfi_exact(rho, drho, &sld);
  EXPECT_LT((sld - sld.adjoint()).norm(), 1e-10);
  EXPECT_LT((drho - 0.5 * (sld * rho + rho * sld)).norm(), 1e-9);
  EXPECT_NEAR(f, (drho * sld).trace().real(), 1e-9 * std::max(1.0, f));
  EXPECT_EQ(qfi_exact(rho, Matrix(Matrix::Zero(9, 9))), 0.0);
}

TEST(qfi, functional_matches_dense_algebra) {
  const Matrix rho = random_density(9);
  const Matrix drho = random_traceless_hermitian(9);
  const TensorTrain rt = train_of_density(rho, 2);
  const TensorTrain dt = train_of_density(drho, 2);

  // identity candidate: 2 Tr(drho) - Tr(rho) = -1
  EXPECT_NEAR(qfi_functional(rt, dt, mpo_identity(2, 3)), -1.0, 1e-10);
}

TEST(qfi, sweep_agrees_with_the_spectral_reference) {
  for (int rep = 0; rep < 3; ++rep) {
    const int n = rep + 1;
    long dim = 1;
    for (int k = 0; k < n; ++k) dim *= 3;
    const Matrix rho = random_density(dim);
    const Matrix drho = random_traceless_hermitian(dim);
    const double exact = qfi_exact(rho, drho);

    QfiOptions opt;
    opt.chi_sld = 9;  // full operator rank for n <= 3
    opt.restarts = 6;
    opt.seed = 17 + static_cast<std::uint64_t>(rep);
    const QfiResult res =
        qfi_local_sweep(train_of_density(rho, n), train_of_density(drho, n), opt);

    EXPECT_TRUE(res.converged);
    EXPECT_LE(res.value, exact + 1e-6);          // certified lower bound
    EXPECT_GT(res.value, exact * (1.0 - 0.01));  // and tight

    // the reported value is the functional of the reported operator
    const Matrix ld = mpo_to_dense(res.sld);
    EXPECT_LT((ld - ld.adjoint()).norm(), 1e-9);
    EXPECT_NEAR(dense_functional(rho, drho, ld), res.value, 1e-7 * std::max(1.0, res.value));
  }
}

TEST(qfi, sweep_iterates_never_decrease_the_functional) {
  const Matrix rho = random_density(9);
  const Matrix drho = random_traceless_hermitian(9);
  QfiOptions opt;
  opt.chi_sld = 9;
  opt.restarts = 1;
  std::vector<double> trace;
  qfi_local_sweep(train_of_density(rho, 2), train_of_density(drho, 2), opt, nullptr, &trace);
  ASSERT_GE(trace.size(), 2u);
  for (std::size_t k = 1; k < trace.size(); ++k)
    EXPECT_GE(trace[k], trace[k - 1] - 1e-9 * std::max(1.0, std::abs(trace[k - 1])));
}

TEST(qfi, product_superposition_probe_reaches_f_equals_n) {
  const int n = 3;
  Vector plus = Vector::Zero(3);
  plus(1) = plus(2) = 1.0 / std::sqrt(2.0);
  const TensorTrain mps = product_state_mps({plus, plus, plus});
  const TensorTrain rho = mpdo_from_mps(mps);
  const TensorTrain drho = phase_derivative_train(rho);

  QfiOptions opt;
  opt.restarts = 4;
  const QfiResult res = qfi_local_sweep(rho, drho, opt);
  EXPECT_NEAR(res.value, static_cast<double>(n), 0.01 * n);

  // dense cross-check of the same construction
  const Matrix rho_d = mpdo_to_density_matrix(rho);
  const Matrix drho_d = phase_derivative(collective_sz(n), rho_d);
  EXPECT_LT((mpdo_to_density_matrix(drho) - drho_d).norm(), 1e-10);
  EXPECT_NEAR(qfi_exact(rho_d, drho_d), static_cast<double>(n), 1e-8 * n);
}

TEST(qfi, ghz_probe_reaches_f_equals_n_squared) {
  const int n = 3;
  Vector v = Vector::Zero(27);
  v(13) = 1.0 / std::sqrt(2.0);  // |0,0,0>, digits (1,1,1)
  v(26) = 1.0 / std::sqrt(2.0);  // |-1,-1,-1>, digits (2,2,2)
  const TensorTrain mps = train_from_dense(v, {3, 3, 3});
  const TensorTrain rho = mpdo_from_mps(mps);
  const TensorTrain drho = phase_derivative_train(rho);

  QfiOptions opt;
  opt.chi_sld = 16;
  opt.restarts = 6;
  const QfiResult res = qfi_local_sweep(rho, drho, opt);
  EXPECT_NEAR(res.value, static_cast<double>(n) * n, 0.01 * n * n);
  EXPECT_NEAR(qfi_exact(mpdo_to_density_matrix(rho),
                        mpdo_to_density_matrix(drho)),
              static_cast<double>(n) * n, 1e-8 * n * n);
}

TEST(qfi, stretched_eigenstate_carries_no_information) {
  // all sites in m = +1: an eigenstate of the collective Sz, so the phase
  // imprints nothing
  Vector top = Vector::Zero(3);
  top(0) = 1.0;
  const TensorTrain rho = mpdo_from_mps(product_state_mps({top, top}));
  const TensorTrain drho = phase_derivative_train(rho);
  EXPECT_LT(mpdo_to_density_matrix(drho).norm(), 1e-14);

  QfiOptions opt;
  opt.restarts = 2;
  const QfiResult res = qfi_local_sweep(rho, drho, opt);
  EXPECT_NEAR(res.value, 0.0, 1e-8);
}

TEST(qfi, functional_is_gauge_invariant) {
  const Matrix rho = random_density(27);
  const Matrix drho = random_traceless_hermitian(27);
  TensorTrain rt = train_of_density(rho, 3);
  TensorTrain dt = train_of_density(drho, 3);
  QfiOptions opt;
  opt.chi_sld = 9;
  opt.restarts = 1;
  const QfiResult res = qfi_local_sweep(rt, dt, opt);
  const double before = qfi_functional(rt, dt, res.sld);
  EXPECT_NEAR(before, res.value, 1e-8 * std::max(1.0, std::abs(res.value)));

  canonicalize(rt, 0);
  canonicalize(dt, 2);
  const double moved = qfi_functional(rt, dt, res.sld);
  EXPECT_NEAR(moved, before, 1e-10 * std::max(1.0, std::abs(before)));
}

TEST(qfi, derivative_vanishes_at_time_zero) {
  const ModelSpec m = standard_chain_model(2, 2.0, 1.0);
  EngineOptions engine;
  engine.kind = EngineKind::Tdvp;
  const auto [rho, drho] = derivative_mpdo(m, engine, 1e-3, 0);
  EXPECT_LT(std::abs(mpdo_trace(rho) - cd(1.0, 0.0)), 1e-10);
  EXPECT_LT(train_overlap_norm(drho), 1e-10);
}

TEST(qfi, derivative_matches_a_dense_central_difference) {
  const ModelSpec m = standard_chain_model(2, 2.0, 1.0);
  EngineOptions engine;
  engine.kind = EngineKind::Tdvp;
  engine.tdvp.chi_max = 81;
  // the division by delta amplifies per-step integrator error, so push the
  // substep exponentials well below the comparison tolerance
  engine.tdvp.krylov.tol = 1e-13;
  const double dt = 1e-3;
  const int steps = 20;
  DerivativeOptions dopt;
  dopt.delta = two_pi * 1e-3;
  const auto [rho, drho] = derivative_mpdo(m, engine, dt, steps, dopt);

  EngineOptions ed;
  ed.kind = EngineKind::DenseReference;
  auto dense_at = [&](double shift) {
    TrajectoryRunner run(with_zeeman_shift(m, shift), ed, dt);
    for (int k = 0; k < steps; ++k) run.advance();
    return paired_vec_to_density_matrix(run.dense_state(), 2);
  };
  const Matrix expect =
      (dense_at(0.5 * dopt.delta) - dense_at(-0.5 * dopt.delta)) / dopt.delta;
  EXPECT_LT((mpdo_to_density_matrix(drho) - expect).norm(), 1e-7);
  EXPECT_LT((mpdo_to_density_matrix(rho) - dense_at(0.0)).norm(), 1e-8);
}

TEST(qfi, dynamics_series_has_the_documented_shape) {
  QfiDynamicsOptions opt;
  opt.dt = 1e-3;
  opt.n_steps = 30;
  opt.cadence = 10;
  opt.engine.kind = EngineKind::Tdvp;
  opt.qfi.restarts = 2;
  opt.smoothing_window = 2;

  const ModelSpec m = standard_chain_model(2, 2.0, 0.0);
  const QfiSeries series = qfi_dynamics(m, opt);
  ASSERT_EQ(series.points.size(), 4u);
  ASSERT_EQ(series.f_phase_smooth.size(), 4u);

  const QfiPoint& origin = series.points[0];
  EXPECT_EQ(origin.t, 0.0);
  EXPECT_EQ(origin.f_raw, 0.0);
  EXPECT_EQ(origin.f_phase, 0.0);
  EXPECT_TRUE(origin.converged);

  for (std::size_t k = 1; k < series.points.size(); ++k) {
    const QfiPoint& p = series.points[k];
    EXPECT_NEAR(p.t, 1e-2 * static_cast<double>(k), 1e-12);
    EXPECT_GT(p.f_raw, 0.0);
    EXPECT_NEAR(p.f_phase, p.f_raw / (p.t * p.t), 1e-9 * std::max(1.0, p.f_phase));
    EXPECT_TRUE(std::isfinite(series.f_phase_smooth[k]));
  }

  QfiDynamicsOptions bad = opt;
  bad.engine.kind = EngineKind::DenseReference;
  EXPECT_THROW(qfi_dynamics(m, bad), std::invalid_argument);
}
