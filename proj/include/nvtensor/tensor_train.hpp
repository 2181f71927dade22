#pragma once

#include <vector>

#include "nvtensor/dtensor.hpp"
#include "nvtensor/svd.hpp"

namespace nvt {

// Finite tensor train with rank-3 site tensors (left bond, physical, right
// bond).  Serves both pure states (physical dimension 3) and vectorized
// density matrices (physical dimension 9, paired index ket + 3*bra).
struct TensorTrain {
  std::vector<DTensor> sites;
  int center = -1;       // orthogonality center, -1 if not canonical
  // Diagnostic record of log |scale| divided out by renormalization; never
  // enters any numeric operation on the stored tensors.
  double log_norm = 0.0;

  int n() const { return static_cast<int>(sites.size()); }
  long phys_dim(int k) const { return sites[static_cast<std::size_t>(k)].dim(1); }
  // bond b sits between sites b-1 and b, b in [1, n-1]
  long bond_dim(int b) const { return sites[static_cast<std::size_t>(b)].dim(0); }
  long max_bond_dim() const;
  void check_consistent() const;
};

TensorTrain product_state_mps(const std::vector<Vector>& local_kets);

// MPDO from local density matrices.  Each factor must be Hermitian, unit
// trace and positive semidefinite (up to 1e-10), else invalid_argument.
TensorTrain product_mpdo(const std::vector<Matrix>& local_rho);

// |psi><psi| as an MPDO, bond dimensions squared.
TensorTrain mpdo_from_mps(const TensorTrain& mps);

// Dense conversions (guarded to small systems by memory, not by a hard cap).
Vector train_to_dense(const TensorTrain& t);
Matrix mpdo_to_density_matrix(const TensorTrain& t);
Vector density_matrix_to_paired_vec(const Matrix& rho, int nsites);
Matrix paired_vec_to_density_matrix(const Vector& v, int nsites);

// Gauge fixing.  After the call, sites left of `center` are left-orthonormal
// and sites right of it right-orthonormal.  Pure gauge: the dense vector is
// unchanged up to roundoff.
void canonicalize(TensorTrain& t, int center);
void move_center(TensorTrain& t, int to);

// Singular values across bond b (state normalized as-is, not rescaled).
Eigen::VectorXd bond_spectrum(const TensorTrain& t, int b);
// Entropy (base 2) of the normalized squared bond spectrum.  For a pure-state
// MPS this is the entanglement entropy; for a vectorized density matrix it is
// the operator-space entanglement entropy.
double entanglement_entropy(const TensorTrain& t, int b);
double operator_entanglement_entropy(const TensorTrain& t, int b);

// Trace functional of an MPDO (of the stored tensors).
cd mpdo_trace(const TensorTrain& t);
// <<I| o_s |rho>> for a single-site ket operator o at each site, plus the
// trace, in one pass.  expectation = site value / trace.
struct SiteSums {
  std::vector<cd> per_site;
  cd trace;
};
SiteSums mpdo_site_sums(const TensorTrain& t, const Matrix3& o);
// Average over sites of Tr(o_s rho) / Tr(rho).
cd mpdo_mean_site_expectation(const TensorTrain& t, const Matrix3& o);

// Rescale so the trace is exactly one; returns the pre-rescale trace.
cd mpdo_renormalize(TensorTrain& t);

// Structural sum c_a * a + c_b * b (direct sum of bonds).
TensorTrain train_add(const TensorTrain& a, cd ca, const TensorTrain& b, cd cb);
void train_scale(TensorTrain& t, cd c);
void apply_single_site(TensorTrain& t, int site, const Matrix& op);

// Sweep truncation to chi_max / rel_floor; leaves the train right-canonical
// with center 0.
TruncationReport train_compress(TensorTrain& t, long chi_max, double rel_floor);

double train_overlap_norm(const TensorTrain& a);  // 2-norm of the dense vector

// Successive-SVD factorization of a dense vector (leftmost site slowest
// index).  Result is left-canonical with center at the last site.  chi_max
// and rel_floor as in svd_split; chi_max <= 0 keeps everything.
TensorTrain train_from_dense(const Vector& v, const std::vector<long>& phys_dims,
                             long chi_max = 0, double rel_floor = 0.0);

}  // namespace nvt
