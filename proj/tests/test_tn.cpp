#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <unsupported/Eigen/KroneckerProduct>

#include "nvtensor/mpo.hpp"
#include "nvtensor/tensor_train.hpp"

using namespace nvt;

namespace {

std::mt19937_64 rng(20260815u);

Vector random_vector(long d) {
  std::normal_distribution<double> g;
  Vector v(d);
  for (long k = 0; k < d; ++k) v(k) = cd(g(rng), g(rng));
  return v;
}

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

TensorTrain random_train(int n, long d) {
  Vector v = random_vector(static_cast<long>(std::pow(d, n)));
  v /= v.norm();
  return train_from_dense(v, std::vector<long>(static_cast<std::size_t>(n), d));
}

// Dense embedding of a local term into the full d^n space, leftmost site
// slowest.  Oracle for the MPO builders.
Matrix dense_embed(const LocalTerm& term, int n, long d) {
  long total = 1;
  for (int k = 0; k < n; ++k) total *= d;
  Matrix out = Matrix::Zero(total, total);
  std::vector<long> xr(static_cast<std::size_t>(n)), xc(static_cast<std::size_t>(n));
  for (long row = 0; row < total; ++row) {
    long r = row;
    for (int k = n - 1; k >= 0; --k) { xr[static_cast<std::size_t>(k)] = r % d; r /= d; }
    for (long col = 0; col < total; ++col) {
      long c = col;
      for (int k = n - 1; k >= 0; --k) { xc[static_cast<std::size_t>(k)] = c % d; c /= d; }
      bool diag = true;
      for (int k = 0; k < n && diag; ++k) {
        bool in_support = false;
        for (int s : term.sites) in_support = in_support || (s == k);
        if (!in_support && xr[static_cast<std::size_t>(k)] != xc[static_cast<std::size_t>(k)])
          diag = false;
      }
      if (!diag) continue;
      long fr = 0, fc = 0;
      for (int s : term.sites) {
        fr = fr * d + xr[static_cast<std::size_t>(s)];
        fc = fc * d + xc[static_cast<std::size_t>(s)];
      }
      out(row, col) = term.op(fr, fc);
    }
  }
  return out;
}

Matrix dense_terms(const LocalTermList& terms, int n, long d) {
  long total = 1;
  for (int k = 0; k < n; ++k) total *= d;
  Matrix out = Matrix::Zero(total, total);
  for (const auto& t : terms) out += dense_embed(t, n, d);
  return out;
}

double left_ortho_defect(const TensorTrain& t, int k) {
  const Matrix m = t.sites[static_cast<std::size_t>(k)].to_matrix(2);
  return (m.adjoint() * m - Matrix::Identity(m.cols(), m.cols())).norm();
}

double right_ortho_defect(const TensorTrain& t, int k) {
  const Matrix m = t.sites[static_cast<std::size_t>(k)].to_matrix(1);
  return (m * m.adjoint() - Matrix::Identity(m.rows(), m.rows())).norm();
}

}  // namespace

TEST(tensor_train, product_state_matches_kron) {
  Vector a = random_vector(3), b = random_vector(3), c = random_vector(3);
  a /= a.norm(); b /= b.norm(); c /= c.norm();
  const TensorTrain t = product_state_mps({a, b, c});
  const Vector expect = Eigen::kroneckerProduct(a, Eigen::kroneckerProduct(b, c).eval()).eval();
  EXPECT_LT((train_to_dense(t) - expect).norm(), 1e-14);
  EXPECT_EQ(t.max_bond_dim(), 1);
}

TEST(tensor_train, product_mpdo_matches_kron_and_validates) {
  const Matrix r1 = random_density(3), r2 = random_density(3);
  const TensorTrain t = product_mpdo({r1, r2});
  const Matrix expect = Eigen::kroneckerProduct(r1, r2);
  EXPECT_LT((mpdo_to_density_matrix(t) - expect).norm(), 1e-13);

  Matrix skew = r1;
  skew(0, 1) += cd(0.0, 0.3);
  EXPECT_THROW(product_mpdo({skew, r2}), std::invalid_argument);

  EXPECT_THROW(product_mpdo({Matrix(0.9 * r1), r2}), std::invalid_argument);

  Matrix indefinite = Matrix::Zero(3, 3);
  indefinite(0, 0) = 1.5;
  indefinite(1, 1) = -0.5;
  EXPECT_THROW(product_mpdo({indefinite, r2}), std::invalid_argument);
}

TEST(tensor_train, mpdo_from_mps_is_the_projector) {
  const TensorTrain mps = random_train(3, 3);
  const Vector psi = train_to_dense(mps);
  const TensorTrain rho = mpdo_from_mps(mps);
  EXPECT_LT((mpdo_to_density_matrix(rho) - psi * psi.adjoint()).norm(), 1e-12);
}

TEST(tensor_train, operator_entropy_doubles_state_entropy_for_pure_states) {
  for (int rep = 0; rep < 3; ++rep) {
    const TensorTrain mps = random_train(4, 3);
    const TensorTrain rho = mpdo_from_mps(mps);
    for (int b = 1; b < 4; ++b) {
      const double s = entanglement_entropy(mps, b);
      const double sop = operator_entanglement_entropy(rho, b);
      EXPECT_NEAR(sop, 2.0 * s, 1e-10);
    }
  }
  // exactly zero for product operators
  const TensorTrain prod = product_mpdo({random_density(3), random_density(3)});
  EXPECT_EQ(operator_entanglement_entropy(prod, 1), 0.0);
}

TEST(tensor_train, paired_vector_layout_round_trips) {
  const Matrix rho = random_matrix(9, 9);
  const Vector v = density_matrix_to_paired_vec(rho, 2);
  EXPECT_LT((paired_vec_to_density_matrix(v, 2) - rho).norm(), 1e-14);
  // spot check the layout: site-major over j = ket + 3*bra
  const long k1 = 2, b1 = 0, k2 = 1, b2 = 2;
  EXPECT_EQ(v((k1 + 3 * b1) * 9 + (k2 + 3 * b2)), rho(k1 * 3 + k2, b1 * 3 + b2));
}

TEST(tensor_train, canonicalization_is_pure_gauge) {
  TensorTrain t = random_train(4, 3);
  const Vector before = train_to_dense(t);

  canonicalize(t, 1);
  EXPECT_EQ(t.center, 1);
  EXPECT_LT((train_to_dense(t) - before).norm(), 1e-12);
  EXPECT_LT(left_ortho_defect(t, 0), 1e-12);
  EXPECT_LT(right_ortho_defect(t, 2), 1e-12);
  EXPECT_LT(right_ortho_defect(t, 3), 1e-12);

  move_center(t, 3);
  EXPECT_EQ(t.center, 3);
  EXPECT_LT((train_to_dense(t) - before).norm(), 1e-12);
  for (int k = 0; k < 3; ++k) EXPECT_LT(left_ortho_defect(t, k), 1e-12);
}

TEST(tensor_train, arithmetic_matches_dense) {
  const TensorTrain a = random_train(3, 3), b = random_train(3, 3);
  const Vector da = train_to_dense(a), db = train_to_dense(b);

  const TensorTrain sum = train_add(a, cd(0.5, 0.0), b, cd(0.0, -2.0));
  EXPECT_LT((train_to_dense(sum) - (0.5 * da - cd(0, 2) * db)).norm(), 1e-12);
  EXPECT_EQ(sum.bond_dim(1), a.bond_dim(1) + b.bond_dim(1));

  TensorTrain scaled = a;
  train_scale(scaled, cd(0.3, 0.1));
  EXPECT_LT((train_to_dense(scaled) - cd(0.3, 0.1) * da).norm(), 1e-13);

  TensorTrain hit = a;
  const Matrix op = random_matrix(3, 3);
  apply_single_site(hit, 1, op);
  const Matrix emb = dense_embed({{1}, op}, 3, 3);
  EXPECT_LT((train_to_dense(hit) - emb * da).norm(), 1e-12);
}

TEST(tensor_train, compression_finds_the_minimal_ghz_rank) {
  Vector v = Vector::Zero(27);
  v(0) = v(26) = 1.0 / std::sqrt(2.0);
  TensorTrain t = train_from_dense(v, {3, 3, 3});
  // pad the bonds by summing with itself, then compress back down
  TensorTrain fat = train_add(t, cd(0.5, 0.0), t, cd(0.5, 0.0));
  const TruncationReport rep = train_compress(fat, 27, 1e-12);
  EXPECT_LT(rep.epsilon, 1e-12);
  EXPECT_LT((train_to_dense(fat) - v).norm(), 1e-12);
  EXPECT_EQ(fat.max_bond_dim(), 2);
  EXPECT_EQ(fat.center, 0);
  EXPECT_LT(right_ortho_defect(fat, 1), 1e-12);
  EXPECT_LT(right_ortho_defect(fat, 2), 1e-12);

  EXPECT_NEAR(entanglement_entropy(fat, 1), 1.0, 1e-12);
  EXPECT_NEAR(entanglement_entropy(fat, 2), 1.0, 1e-12);
  const Eigen::VectorXd spec = bond_spectrum(fat, 1);
  ASSERT_EQ(spec.size(), 2);
  EXPECT_NEAR(spec(0), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(spec(1), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(tensor_train, from_dense_round_trips_and_respects_caps) {
  Vector v = random_vector(243);
  v /= v.norm();
  const std::vector<long> dims{3, 3, 3, 3, 3};
  const TensorTrain t = train_from_dense(v, dims);
  EXPECT_LT((train_to_dense(t) - v).norm(), 1e-12);
  EXPECT_EQ(t.center, 4);
  for (int k = 0; k < 4; ++k) EXPECT_LT(left_ortho_defect(t, k), 1e-12);
  EXPECT_LE(t.bond_dim(1), 3);
  EXPECT_LE(t.bond_dim(2), 9);
  EXPECT_LE(t.bond_dim(3), 9);
  EXPECT_LE(t.bond_dim(4), 3);

  const TensorTrain capped = train_from_dense(v, dims, 2);
  EXPECT_EQ(capped.max_bond_dim(), 2);
}

TEST(tensor_train, product_states_have_zero_entropy) {
  Vector up = Vector::Zero(3);
  up(0) = 1.0;
  const TensorTrain t = product_state_mps({up, up, up});
  EXPECT_EQ(entanglement_entropy(t, 1), 0.0);
  EXPECT_EQ(entanglement_entropy(t, 2), 0.0);
}

TEST(tensor_train, trace_and_site_expectations_match_dense) {
  const Matrix r1 = random_density(3), r2 = random_density(3), r3 = random_density(3);
  TensorTrain t = product_mpdo({r1, r2, r3});
  EXPECT_LT(std::abs(mpdo_trace(t) - cd(1.0, 0.0)), 1e-13);

  Matrix h = random_matrix(3, 3);
  h = (h + h.adjoint()).eval();
  const SiteSums sums = mpdo_site_sums(t, Matrix3(h));
  EXPECT_LT(std::abs(sums.trace - cd(1.0, 0.0)), 1e-13);
  EXPECT_LT(std::abs(sums.per_site[0] - (h * r1).trace()), 1e-12);
  EXPECT_LT(std::abs(sums.per_site[1] - (h * r2).trace()), 1e-12);
  EXPECT_LT(std::abs(sums.per_site[2] - (h * r3).trace()), 1e-12);
  const cd mean = ((h * r1).trace() + (h * r2).trace() + (h * r3).trace()) / 3.0;
  EXPECT_LT(std::abs(mpdo_mean_site_expectation(t, Matrix3(h)) - mean), 1e-12);

  train_scale(t, cd(2.0, 0.0));
  const cd pre = mpdo_renormalize(t);
  EXPECT_LT(std::abs(pre - cd(2.0, 0.0)), 1e-12);
  EXPECT_LT(std::abs(mpdo_trace(t) - cd(1.0, 0.0)), 1e-12);
}

TEST(mpo, identity_is_identity) {
  const Mpo id = mpo_identity(3, 3);
  EXPECT_LT((mpo_to_dense(id) - Matrix::Identity(27, 27)).norm(), 1e-14);
  EXPECT_EQ(id.max_bond_dim(), 1);
}

TEST(mpo, term_sum_matches_dense_embedding) {
  LocalTermList terms;
  terms.push_back({{0}, random_matrix(3, 3)});
  terms.push_back({{2}, random_matrix(3, 3)});
  terms.push_back({{0, 1}, random_matrix(9, 9)});
  terms.push_back({{1, 2}, random_matrix(9, 9)});
  terms.push_back({{0, 2}, random_matrix(9, 9)});  // long range
  const Matrix expect = dense_terms(terms, 3, 3);

  Mpo tri = triangular_mpo_from_terms(terms, 3, 3);
  EXPECT_LT((mpo_to_dense(tri) - expect).norm(), 1e-10 * expect.norm());

  const Mpo packed = mpo_from_terms(terms, 3, 3);
  EXPECT_LT((mpo_to_dense(packed) - expect).norm(), 1e-9 * expect.norm());
  EXPECT_LE(packed.max_bond_dim(), tri.max_bond_dim());

  mpo_compress(tri, 200, 1e-13);
  EXPECT_LT((mpo_to_dense(tri) - expect).norm(), 1e-9 * expect.norm());
}

TEST(mpo, single_site_terms_need_only_the_rails) {
  LocalTermList terms;
  for (int s = 0; s < 4; ++s) terms.push_back({{s}, random_matrix(3, 3)});
  const Mpo op = mpo_from_terms(terms, 4, 3);
  EXPECT_LE(op.max_bond_dim(), 2);
  EXPECT_LT((mpo_to_dense(op) - dense_terms(terms, 4, 3)).norm(), 1e-10);
}

TEST(mpo, zip_up_application_matches_dense) {
  LocalTermList terms;
  terms.push_back({{0}, random_matrix(3, 3)});
  terms.push_back({{0, 1}, random_matrix(9, 9)});
  terms.push_back({{1, 2}, random_matrix(9, 9)});
  const Mpo op = mpo_from_terms(terms, 3, 3);

  TensorTrain t = random_train(3, 3);
  const Vector before = train_to_dense(t);
  apply_mpo(op, t, 200, 1e-14);
  const Vector expect = mpo_to_dense(op) * before;
  EXPECT_LT((train_to_dense(t) - expect).norm(), 1e-10 * expect.norm());
  EXPECT_EQ(t.center, 0);
}
