#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace nvt {

using cd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Matrix3 = Eigen::Matrix3cd;
using Vector = Eigen::VectorXcd;
using RMatrix = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense complex tensor of dynamic rank, row-major (last index fastest).
// Ranks stay small (<= 6); dimensions can be large.  Contractions reduce to
// permute + GEMM.
class DTensor {
 public:
  DTensor() = default;
  explicit DTensor(std::vector<long> dims);

  static DTensor from_matrix(const Eigen::Ref<const Matrix>& m);
  static DTensor from_vector(const Eigen::Ref<const Vector>& v);
  static DTensor ones(std::vector<long> dims);

  long rank() const { return static_cast<long>(dims_.size()); }
  long dim(long k) const { return dims_[static_cast<std::size_t>(k)]; }
  const std::vector<long>& dims() const { return dims_; }
  long size() const { return static_cast<long>(data_.size()); }

  cd* data() { return data_.data(); }
  const cd* data() const { return data_.data(); }

  cd& operator()(const std::vector<long>& idx) { return data_[offset(idx)]; }
  const cd& operator()(const std::vector<long>& idx) const { return data_[offset(idx)]; }

  // Reinterpret the flat buffer under new dimensions (sizes must match).
  DTensor& reshape(std::vector<long> dims);
  DTensor reshaped(std::vector<long> dims) const;

  // Output axis k takes the data of input axis perm[k].
  DTensor permuted(const std::vector<long>& perm) const;

  DTensor conjugated() const;
  double norm() const;
  bool all_finite() const;

  DTensor& operator*=(cd s);
  DTensor& operator+=(const DTensor& other);

  // View with axes [0, split) fused into rows and [split, rank) into columns.
  Eigen::Map<RMatrix> matrix(long split);
  Eigen::Map<const RMatrix> matrix(long split) const;
  Matrix to_matrix(long split) const;
  Vector to_vector() const;

  // Contract axes_a of a with axes_b of b (paired in order).  Result carries
  // the free axes of a (in order) followed by the free axes of b.
  static DTensor contract(const DTensor& a, const std::vector<long>& axes_a,
                          const DTensor& b, const std::vector<long>& axes_b);

 private:
  std::size_t offset(const std::vector<long>& idx) const;

  std::vector<long> dims_;
  std::vector<cd> data_;
};

}  // namespace nvt
