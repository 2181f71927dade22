#include "nvtensor/dtensor.hpp"

#include <cmath>
#include <stdexcept>

namespace nvt {

namespace {

long product(const std::vector<long>& dims) {
  long p = 1;
  for (long d : dims) {
    if (d <= 0) throw std::invalid_argument("DTensor: dimensions must be positive");
    p *= d;
  }
  return p;
}

std::vector<long> row_major_strides(const std::vector<long>& dims) {
  std::vector<long> strides(dims.size(), 1);
  for (long k = static_cast<long>(dims.size()) - 2; k >= 0; --k)
    strides[static_cast<std::size_t>(k)] =
        strides[static_cast<std::size_t>(k + 1)] * dims[static_cast<std::size_t>(k + 1)];
  return strides;
}

}  // namespace

DTensor::DTensor(std::vector<long> dims)
    : dims_(std::move(dims)), data_(static_cast<std::size_t>(product(dims_)), cd(0.0, 0.0)) {}

DTensor DTensor::from_matrix(const Eigen::Ref<const Matrix>& m) {
  DTensor t({m.rows(), m.cols()});
  Eigen::Map<RMatrix>(t.data(), m.rows(), m.cols()) = m;
  return t;
}

DTensor DTensor::from_vector(const Eigen::Ref<const Vector>& v) {
  DTensor t({v.size()});
  Eigen::Map<Vector>(t.data(), v.size()) = v;
  return t;
}

DTensor DTensor::ones(std::vector<long> dims) {
  DTensor t(std::move(dims));
  for (auto& x : t.data_) x = cd(1.0, 0.0);
  return t;
}

std::size_t DTensor::offset(const std::vector<long>& idx) const {
  if (idx.size() != dims_.size()) throw std::invalid_argument("DTensor: index rank mismatch");
  std::size_t o = 0;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= dims_[k]) throw std::out_of_range("DTensor: index out of range");
    o = o * static_cast<std::size_t>(dims_[k]) + static_cast<std::size_t>(idx[k]);
  }
  return o;
}

DTensor& DTensor::reshape(std::vector<long> dims) {
  if (product(dims) != size()) throw std::invalid_argument("DTensor::reshape: size mismatch");
  dims_ = std::move(dims);
  return *this;
}

DTensor DTensor::reshaped(std::vector<long> dims) const {
  DTensor out = *this;
  out.reshape(std::move(dims));
  return out;
}

DTensor DTensor::permuted(const std::vector<long>& perm) const {
  const std::size_t r = dims_.size();
  if (perm.size() != r) throw std::invalid_argument("DTensor::permuted: rank mismatch");
  std::vector<bool> seen(r, false);
  bool identity = true;
  for (std::size_t k = 0; k < r; ++k) {
    if (perm[k] < 0 || perm[k] >= static_cast<long>(r) || seen[static_cast<std::size_t>(perm[k])])
      throw std::invalid_argument("DTensor::permuted: invalid permutation");
    seen[static_cast<std::size_t>(perm[k])] = true;
    if (perm[k] != static_cast<long>(k)) identity = false;
  }
  if (identity) return *this;

  std::vector<long> out_dims(r);
  for (std::size_t k = 0; k < r; ++k) out_dims[k] = dims_[static_cast<std::size_t>(perm[k])];

  DTensor out(out_dims);
  const std::vector<long> in_strides = row_major_strides(dims_);
  // stride in the source buffer when advancing output axis k
  std::vector<long> src_stride(r);
  for (std::size_t k = 0; k < r; ++k) src_stride[k] = in_strides[static_cast<std::size_t>(perm[k])];

  std::vector<long> idx(r, 0);
  const long n = out.size();
  long src = 0;
  for (long lin = 0; lin < n; ++lin) {
    out.data_[static_cast<std::size_t>(lin)] = data_[static_cast<std::size_t>(src)];
    // increment mixed-radix counter over out_dims, updating src incrementally
    for (long k = static_cast<long>(r) - 1; k >= 0; --k) {
      auto ku = static_cast<std::size_t>(k);
      if (++idx[ku] < out_dims[ku]) {
        src += src_stride[ku];
        break;
      }
      idx[ku] = 0;
      src -= src_stride[ku] * (out_dims[ku] - 1);
    }
  }
  return out;
}

DTensor DTensor::conjugated() const {
  DTensor out = *this;
  for (auto& x : out.data_) x = std::conj(x);
  return out;
}

double DTensor::norm() const {
  double s = 0.0;
  for (const auto& x : data_) s += std::norm(x);
  return std::sqrt(s);
}

bool DTensor::all_finite() const {
  for (const auto& x : data_)
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
  return true;
}

DTensor& DTensor::operator*=(cd s) {
  for (auto& x : data_) x *= s;
  return *this;
}

DTensor& DTensor::operator+=(const DTensor& other) {
  if (dims_ != other.dims_) throw std::invalid_argument("DTensor::operator+=: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Eigen::Map<RMatrix> DTensor::matrix(long split) {
  long rows = 1, cols = 1;
  for (long k = 0; k < rank(); ++k) (k < split ? rows : cols) *= dim(k);
  return Eigen::Map<RMatrix>(data(), rows, cols);
}

Eigen::Map<const RMatrix> DTensor::matrix(long split) const {
  long rows = 1, cols = 1;
  for (long k = 0; k < rank(); ++k) (k < split ? rows : cols) *= dim(k);
  return Eigen::Map<const RMatrix>(data(), rows, cols);
}

Matrix DTensor::to_matrix(long split) const { return Matrix(matrix(split)); }

Vector DTensor::to_vector() const {
  return Eigen::Map<const Vector>(data(), size());
}

DTensor DTensor::contract(const DTensor& a, const std::vector<long>& axes_a,
                          const DTensor& b, const std::vector<long>& axes_b) {
  if (axes_a.size() != axes_b.size())
    throw std::invalid_argument("DTensor::contract: axis count mismatch");
  const long nc = static_cast<long>(axes_a.size());

  std::vector<bool> used_a(static_cast<std::size_t>(a.rank()), false);
  std::vector<bool> used_b(static_cast<std::size_t>(b.rank()), false);
  long contracted = 1;
  for (long k = 0; k < nc; ++k) {
    long ax = axes_a[static_cast<std::size_t>(k)];
    long bx = axes_b[static_cast<std::size_t>(k)];
    if (ax < 0 || ax >= a.rank() || bx < 0 || bx >= b.rank())
      throw std::invalid_argument("DTensor::contract: axis out of range");
    if (used_a[static_cast<std::size_t>(ax)] || used_b[static_cast<std::size_t>(bx)])
      throw std::invalid_argument("DTensor::contract: repeated axis");
    if (a.dim(ax) != b.dim(bx))
      throw std::invalid_argument("DTensor::contract: dimension mismatch");
    used_a[static_cast<std::size_t>(ax)] = true;
    used_b[static_cast<std::size_t>(bx)] = true;
    contracted *= a.dim(ax);
  }

  std::vector<long> perm_a, perm_b, out_dims;
  for (long k = 0; k < a.rank(); ++k)
    if (!used_a[static_cast<std::size_t>(k)]) {
      perm_a.push_back(k);
      out_dims.push_back(a.dim(k));
    }
  perm_a.insert(perm_a.end(), axes_a.begin(), axes_a.end());
  perm_b = axes_b;
  for (long k = 0; k < b.rank(); ++k)
    if (!used_b[static_cast<std::size_t>(k)]) {
      perm_b.push_back(k);
      out_dims.push_back(b.dim(k));
    }

  DTensor pa = a.permuted(perm_a);
  DTensor pb = b.permuted(perm_b);
  const long m = pa.size() / contracted;
  const long n = pb.size() / contracted;

  if (out_dims.empty()) out_dims = {1};
  DTensor out(out_dims);
  Eigen::Map<RMatrix>(out.data(), m, n).noalias() =
      Eigen::Map<const RMatrix>(pa.data(), m, contracted) *
      Eigen::Map<const RMatrix>(pb.data(), contracted, n);
  return out;
}

}  // namespace nvt
