#include <cmath>

#include <gtest/gtest.h>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "nvtensor/errors.hpp"
#include "nvtensor/trajectory.hpp"

using namespace nvt;

namespace {

// Dense Lindbladian for the paired site-major layout, built from scratch via
// the textbook column-stacking superoperator and a layout permutation.  This
// shares no code with the generator-term assembly it is checked against.
Matrix dense_lindblad_oracle(const ModelSpec& m) {
  const int n = m.n();
  long dket = 1;
  for (int k = 0; k < n; ++k) dket *= 3;
  const Spin1& s = spin1_operators();

  auto embed = [&](const Matrix3& a, int site) {
    Matrix out = Matrix::Identity(1, 1);
    for (int k = 0; k < n; ++k) {
      const Matrix f = (k == site) ? Matrix(a) : Matrix(Matrix3::Identity());
      out = Eigen::kroneckerProduct(out, f).eval();
    }
    return out;
  };
  auto embed_pair = [&](const Matrix& h9, int i, int j) {
    Matrix out = Matrix::Zero(dket, dket);
    std::vector<long> xr(static_cast<std::size_t>(n)), xc(static_cast<std::size_t>(n));
    for (long row = 0; row < dket; ++row) {
      long r = row;
      for (int k = n - 1; k >= 0; --k) { xr[static_cast<std::size_t>(k)] = r % 3; r /= 3; }
      for (long col = 0; col < dket; ++col) {
        long c = col;
        for (int k = n - 1; k >= 0; --k) { xc[static_cast<std::size_t>(k)] = c % 3; c /= 3; }
        bool diag = true;
        for (int k = 0; k < n; ++k)
          if (k != i && k != j && xr[static_cast<std::size_t>(k)] != xc[static_cast<std::size_t>(k)])
            diag = false;
        if (!diag) continue;
        out(row, col) = h9(3 * xr[static_cast<std::size_t>(i)] + xr[static_cast<std::size_t>(j)],
                           3 * xc[static_cast<std::size_t>(i)] + xc[static_cast<std::size_t>(j)]);
      }
    }
    return out;
  };

  Matrix h = Matrix::Zero(dket, dket);
  for (int k = 0; k < n; ++k)
    h += embed(single_site_hamiltonian(m.sites[static_cast<std::size_t>(k)], m.constants), k);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) h += embed_pair(pair_term(m, i, j), i, j);

  const Matrix id = Matrix::Identity(dket, dket);
  const cd im(0.0, 1.0);
  // column-stacking convention: vec(A rho B) = (B^T kron A) vec(rho)
  Matrix lcol = -im * (Eigen::kroneckerProduct(id, h) - Eigen::kroneckerProduct(h.transpose(), id));
  for (const auto& dis : m.dissipators) {
    if (dis.rate <= 0.0) continue;
    const Matrix l = embed(lindblad_matrix(dis.op), dis.site);
    const Matrix ldl = l.adjoint() * l;
    lcol += dis.rate *
            (Eigen::kroneckerProduct(l.conjugate(), l) -
             0.5 * Eigen::kroneckerProduct(id, ldl) -
             0.5 * Eigen::kroneckerProduct(ldl.transpose(), id));
  }

  // permutation from the column-stacked index (ket + dket * bra, global) to
  // the site-major paired index
  std::vector<long> paired_of_col(static_cast<std::size_t>(dket * dket));
  for (long ket = 0; ket < dket; ++ket)
    for (long bra = 0; bra < dket; ++bra) {
      long p = 0, kk = ket, bb = bra, w = 1;
      std::vector<long> kd(static_cast<std::size_t>(n)), bd(static_cast<std::size_t>(n));
      for (int k = n - 1; k >= 0; --k) {
        kd[static_cast<std::size_t>(k)] = kk % 3; kk /= 3;
        bd[static_cast<std::size_t>(k)] = bb % 3; bb /= 3;
      }
      for (int k = n - 1; k >= 0; --k) {
        p += (kd[static_cast<std::size_t>(k)] + 3 * bd[static_cast<std::size_t>(k)]) * w;
        w *= 9;
      }
      paired_of_col[static_cast<std::size_t>(ket + dket * bra)] = p;
    }
  Matrix out(dket * dket, dket * dket);
  for (long r = 0; r < dket * dket; ++r)
    for (long c = 0; c < dket * dket; ++c)
      out(paired_of_col[static_cast<std::size_t>(r)], paired_of_col[static_cast<std::size_t>(c)]) =
          lcol(r, c);
  return out;
}

// the same dense matrix, but assembled from the production generator terms
Matrix dense_from_terms(const ModelSpec& m) {
  const int n = m.n();
  long dim = 1;
  for (int k = 0; k < n; ++k) dim *= 9;
  Matrix out = Matrix::Zero(dim, dim);
  for (const auto& term : build_superop_terms(m)) {
    std::vector<long> xr(static_cast<std::size_t>(n)), xc(static_cast<std::size_t>(n));
    for (long row = 0; row < dim; ++row) {
      long r = row;
      for (int k = n - 1; k >= 0; --k) { xr[static_cast<std::size_t>(k)] = r % 9; r /= 9; }
      for (long col = 0; col < dim; ++col) {
        long c = col;
        for (int k = n - 1; k >= 0; --k) { xc[static_cast<std::size_t>(k)] = c % 9; c /= 9; }
        bool diag = true;
        for (int k = 0; k < n; ++k) {
          bool in_support = false;
          for (int s : term.sites) in_support = in_support || (s == k);
          if (!in_support && xr[static_cast<std::size_t>(k)] != xc[static_cast<std::size_t>(k)])
            diag = false;
        }
        if (!diag) continue;
        long fr = 0, fc = 0;
        for (int s : term.sites) {
          fr = fr * 9 + xr[static_cast<std::size_t>(s)];
          fc = fc * 9 + xc[static_cast<std::size_t>(s)];
        }
        out(row, col) += term.op(fr, fc);
      }
    }
  }
  return out;
}

Matrix plus_rho() {
  Vector psi = Vector::Zero(3);
  psi(1) = psi(2) = 1.0 / std::sqrt(2.0);
  return psi * psi.adjoint();
}

Vector initial_paired(const ModelSpec& m, const InitialState& init) {
  return density_matrix_to_paired_vec(
      mpdo_to_density_matrix(product_mpdo(init.factors(m.n()))), m.n());
}

}  // namespace

TEST(evolve, generator_terms_match_the_column_stacking_oracle) {
  ModelSpec m = standard_chain_model(2, 1.5, 2.0);
  const Matrix oracle = dense_lindblad_oracle(m);
  EXPECT_LT((dense_from_terms(m) - oracle).norm(), 1e-9 * oracle.norm());

  m.interaction = InteractionForm::LabFrame;
  const Matrix lab_oracle = dense_lindblad_oracle(m);
  EXPECT_LT((dense_from_terms(m) - lab_oracle).norm(), 1e-9 * lab_oracle.norm());
}

TEST(evolve, tdvp_zero_step_is_identity) {
  const ModelSpec m = standard_chain_model(2, 2.0, 1.0);
  EngineOptions opt;
  opt.kind = EngineKind::Tdvp;
  TrajectoryRunner run(m, opt, 0.0);
  const Matrix before = mpdo_to_density_matrix(run.state());
  run.advance();
  EXPECT_LT((mpdo_to_density_matrix(run.state()) - before).norm(), 1e-12);
}

TEST(evolve, single_site_coherence_decays_at_half_gamma) {
  const double gamma = 1.7;
  const ModelSpec m = standard_chain_model(1, 2.0, gamma, /*rabi=*/0.0);
  InitialState init;
  init.kind = InitialState::Kind::Custom;
  init.local_rho = {plus_rho()};

  for (EngineKind kind : {EngineKind::Tdvp, EngineKind::DenseReference}) {
    EngineOptions opt;
    opt.kind = kind;
    opt.tdvp.krylov.tol = 1e-12;
    TrajectoryRunner run(m, opt, 0.01, init);
    for (int k = 0; k < 100; ++k) run.advance();
    const Matrix rho = run.dense()
                           ? paired_vec_to_density_matrix(run.dense_state(), 1)
                           : mpdo_to_density_matrix(run.state());
    // on resonance the driven doublet is degenerate, so the coherence picks
    // up no phase and just decays
    EXPECT_LT(std::abs(rho(1, 2) - 0.5 * std::exp(-0.5 * gamma * run.time())), 1e-8);
    EXPECT_LT(std::abs(rho(1, 1) - 0.5), 1e-9);
    EXPECT_LT(std::abs(rho(2, 2) - 0.5), 1e-9);
  }
}

TEST(evolve, tdvp_tracks_the_dense_exponential) {
  const ModelSpec m = standard_chain_model(2, 2.0, 1.0);
  const Matrix lgen = dense_lindblad_oracle(m);
  InitialState init;
  init.kind = InitialState::Kind::PlusProduct;

  EngineOptions opt;
  opt.kind = EngineKind::Tdvp;
  opt.tdvp.chi_max = 81;
  const double dt = 0.002;
  const int steps = 50;
  TrajectoryRunner run(m, opt, dt, init);
  for (int k = 0; k < steps; ++k) run.advance();

  const Vector v0 = initial_paired(m, init);
  const Vector ref = (dt * steps * lgen).exp() * v0;
  const Matrix rho_ref = paired_vec_to_density_matrix(ref, 2);
  EXPECT_LT((mpdo_to_density_matrix(run.state()) - rho_ref).norm(), 1e-7);
}

TEST(evolve, dense_engine_matches_the_matrix_exponential) {
  const ModelSpec m = standard_chain_model(2, 2.0, 1.0);
  const Matrix lgen = dense_lindblad_oracle(m);
  DenseLindblad ed(m);

  InitialState init;
  init.kind = InitialState::Kind::PlusProduct;
  Vector v = initial_paired(m, init);

  // matvec agrees with the dense matrix
  EXPECT_LT((ed.matvec(v) - lgen * v).norm(), 1e-10 * (lgen * v).norm());

  const double dt = 0.001;
  Vector ref = v;
  for (int k = 0; k < 20; ++k) {
    ed.step(v, dt);
    ref = ((dt * lgen).exp() * ref).eval();
  }
  EXPECT_LT((v - ref).norm(), 1e-9);
}

TEST(evolve, dense_engine_rejects_large_systems) {
  EXPECT_THROW(DenseLindblad(standard_chain_model(7, 2.0, 0.0)), CapacityError);
}

TEST(evolve, wii_propagator_is_first_order_accurate) {
  const ModelSpec m = standard_chain_model(2, 2.0, 1.0);
  const Matrix lgen = dense_lindblad_oracle(m);
  const Mpo tri = triangular_mpo_from_terms(build_superop_terms(m), m.n(), 9);

  auto defect = [&](double tau) {
    const Matrix w = mpo_to_dense(wii_propagator(tri, cd(tau, 0.0)));
    return (w - (tau * lgen).exp()).norm();
  };
  const double d1 = defect(1e-5);
  const double d2 = defect(5e-6);
  EXPECT_GT(d1 / d2, 3.0);  // per-step defect is quadratic in tau
  EXPECT_LT(d1 / d2, 5.0);
}

TEST(evolve, wii_substeps_raise_the_convergence_order) {
  const ModelSpec m = standard_chain_model(2, 2.0, 1.0);
  const Matrix lgen = dense_lindblad_oracle(m);
  InitialState init;
  init.kind = InitialState::Kind::PlusProduct;
  const Vector v0 = initial_paired(m, init);

  const double horizon = 0.004;
  auto final_error = [&](double dt, bool substeps) {
    EngineOptions opt;
    opt.kind = EngineKind::Wii;
    opt.wii.chi_max = 81;
    opt.wii.complex_substeps = substeps;
    TrajectoryRunner run(m, opt, dt, init);
    const int steps = static_cast<int>(std::lround(horizon / dt));
    for (int k = 0; k < steps; ++k) run.advance();
    const Matrix ref = paired_vec_to_density_matrix((horizon * lgen).exp() * v0, 2);
    return (mpdo_to_density_matrix(run.state()) - ref).norm();
  };

  const double plain1 = final_error(2e-4, false);
  const double plain2 = final_error(1e-4, false);
  EXPECT_GT(plain1 / plain2, 1.6);  // first order overall
  EXPECT_LT(plain1 / plain2, 2.6);

  const double sub1 = final_error(2e-4, true);
  const double sub2 = final_error(1e-4, true);
  EXPECT_GT(sub1 / sub2, 3.2);  // second order overall
  EXPECT_LT(sub1 / sub2, 5.0);
  EXPECT_LT(sub1, plain1);
}

TEST(evolve, engines_agree_on_a_dissipative_chain) {
  const ModelSpec m = standard_chain_model(3, 2.0, 5.0);
  EngineOptions tn;
  tn.kind = EngineKind::Tdvp;
  tn.tdvp.chi_max = 81;
  EngineOptions ed;
  ed.kind = EngineKind::DenseReference;

  TrajectoryRunner a(m, tn, 0.001), b(m, ed, 0.001);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    a.advance();
    b.advance();
    worst = std::max(worst, std::abs(a.mean_sz() - b.mean_sz()));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(evolve, trajectory_records_have_the_documented_shape) {
  const ModelSpec m = standard_chain_model(2, 2.0, 1.0);
  EngineOptions opt;
  opt.kind = EngineKind::Tdvp;
  InitialState init;
  init.kind = InitialState::Kind::PlusProduct;
  RecordOptions rec;
  rec.opee_cadence = 3;

  const Trajectory tr = run_trajectory(m, opt, 0.001, 10, rec, init);
  ASSERT_EQ(tr.times.size(), 11u);
  ASSERT_EQ(tr.mean_sz.size(), 11u);
  ASSERT_EQ(tr.opee_mid.size(), 11u);
  EXPECT_NEAR(tr.times[10], 0.010, 1e-12);
  // plus product: site expectation is -1/2 on every site
  EXPECT_LT(std::abs(tr.mean_sz[0] - cd(-0.5, 0.0)), 1e-12);
  for (int k = 0; k <= 10; ++k) {
    if (k % 3 == 0)
      EXPECT_TRUE(std::isfinite(tr.opee_mid[static_cast<std::size_t>(k)]));
    else
      EXPECT_TRUE(std::isnan(tr.opee_mid[static_cast<std::size_t>(k)]));
  }

  // determinism of the whole pipeline: same inputs, same records
  const Trajectory tr2 = run_trajectory(m, opt, 0.001, 10, rec, init);
  for (int k = 0; k <= 10; ++k)
    EXPECT_EQ(tr.mean_sz[static_cast<std::size_t>(k)], tr2.mean_sz[static_cast<std::size_t>(k)]);
}

TEST(evolve, trace_stays_normalized_along_the_run) {
  const ModelSpec m = standard_chain_model(3, 1.5, 2.0);
  EngineOptions opt;
  opt.kind = EngineKind::Wii;
  TrajectoryRunner run(m, opt, 0.001);
  for (int k = 0; k < 5; ++k) {
    run.advance();
    EXPECT_LT(std::abs(mpdo_trace(run.state()) - cd(1.0, 0.0)), 1e-10);
  }
}
