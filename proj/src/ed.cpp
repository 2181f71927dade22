#include "nvtensor/ed.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "nvtensor/errors.hpp"
#include "nvtensor/svd.hpp"

namespace nvt {

DenseLindblad::DenseLindblad(const ModelSpec& m, EdOptions opt)
    : nsites_(m.n()), opt_(opt) {
  if (nsites_ > opt_.max_sites)
    throw CapacityError("dense reference: site count exceeds the configured cap");
  dim_ = 1;
  for (int k = 0; k < nsites_; ++k) dim_ *= 9;
  site_stride_.resize(static_cast<std::size_t>(nsites_));
  long s = dim_;
  for (int k = 0; k < nsites_; ++k) {
    s /= 9;
    site_stride_[static_cast<std::size_t>(k)] = s;
  }
  for (const auto& t : build_superop_terms(m))
    terms_.push_back({t.sites, RMatrix(t.op)});
}

Vector DenseLindblad::matvec(const Vector& v) const {
  Vector out = Vector::Zero(dim_);
  for (const auto& t : terms_) {
    if (t.sites.size() == 1) {
      const long st = site_stride_[static_cast<std::size_t>(t.sites[0])];
      const long hi_step = st * 9;
      cd x[9], y[9];
      for (long hi = 0; hi < dim_; hi += hi_step)
        for (long lo = 0; lo < st; ++lo) {
          const long base = hi + lo;
          for (long a = 0; a < 9; ++a) x[a] = v(base + a * st);
          for (long a = 0; a < 9; ++a) {
            cd acc(0.0, 0.0);
            for (long b = 0; b < 9; ++b) acc += t.op(a, b) * x[b];
            y[a] = acc;
          }
          for (long a = 0; a < 9; ++a) out(base + a * st) += y[a];
        }
    } else {
      const long s1 = site_stride_[static_cast<std::size_t>(t.sites[0])];
      const long s2 = site_stride_[static_cast<std::size_t>(t.sites[1])];
      const long hi_step = s1 * 9;
      const long mid_step = s2 * 9;
      cd x[81], y[81];
      for (long hi = 0; hi < dim_; hi += hi_step)
        for (long mid = 0; mid < s1; mid += mid_step)
          for (long lo = 0; lo < s2; ++lo) {
            const long base = hi + mid + lo;
            for (long a = 0; a < 9; ++a)
              for (long b = 0; b < 9; ++b) x[a * 9 + b] = v(base + a * s1 + b * s2);
            for (long a = 0; a < 81; ++a) {
              cd acc(0.0, 0.0);
              for (long b = 0; b < 81; ++b) acc += t.op(a, b) * x[b];
              y[a] = acc;
            }
            for (long a = 0; a < 9; ++a)
              for (long b = 0; b < 9; ++b) out(base + a * s1 + b * s2) += y[a * 9 + b];
          }
    }
  }
  return out;
}

void DenseLindblad::step(Vector& v, double dt) const {
  v = krylov_expv([this](const Vector& x) { return matvec(x); }, v, cd(dt, 0.0),
                  opt_.krylov);
}

Vector DenseLindblad::product_vec(const std::vector<Matrix>& local_rho) const {
  if (static_cast<int>(local_rho.size()) != nsites_)
    throw std::invalid_argument("dense reference: factor count mismatch");
  Vector v = Vector::Ones(1);
  for (const auto& rho : local_rho) {
    if (rho.rows() != 3 || rho.cols() != 3)
      throw std::invalid_argument("dense reference: local factors must be 3x3");
    Vector local(9);
    for (long i = 0; i < 3; ++i)
      for (long ip = 0; ip < 3; ++ip) local(i + 3 * ip) = rho(i, ip);
    Vector next(v.size() * 9);
    for (long a = 0; a < v.size(); ++a)
      for (long j = 0; j < 9; ++j) next(a * 9 + j) = v(a) * local(j);
    v = std::move(next);
  }
  return v;
}

cd DenseLindblad::trace(const Vector& v) const {
  cd out(0.0, 0.0);
  // sum over all-diagonal paired digits
  std::vector<long> digits(static_cast<std::size_t>(nsites_), 0);
  while (true) {
    long base = 0;
    for (int k = 0; k < nsites_; ++k) {
      const long m = digits[static_cast<std::size_t>(k)];
      base += (m + 3 * m) * site_stride_[static_cast<std::size_t>(k)];
    }
    out += v(base);
    int k = nsites_ - 1;
    for (; k >= 0; --k) {
      if (++digits[static_cast<std::size_t>(k)] < 3) break;
      digits[static_cast<std::size_t>(k)] = 0;
    }
    if (k < 0) break;
  }
  return out;
}

cd DenseLindblad::site_expectation(const Vector& v, int site, const Matrix3& o) const {
  // weights on the target site's paired digit, diagonal on all others
  Vector w(9);
  for (long i = 0; i < 3; ++i)
    for (long ip = 0; ip < 3; ++ip) w(i + 3 * ip) = o(ip, i);

  cd num(0.0, 0.0);
  std::vector<long> digits(static_cast<std::size_t>(nsites_), 0);
  while (true) {
    long base = 0;
    for (int k = 0; k < nsites_; ++k) {
      if (k == site) continue;
      const long m = digits[static_cast<std::size_t>(k)];
      base += (m + 3 * m) * site_stride_[static_cast<std::size_t>(k)];
    }
    for (long j = 0; j < 9; ++j)
      num += w(j) * v(base + j * site_stride_[static_cast<std::size_t>(site)]);
    int k = nsites_ - 1;
    for (; k >= 0; --k) {
      if (k == site) continue;
      if (++digits[static_cast<std::size_t>(k)] < 3) break;
      digits[static_cast<std::size_t>(k)] = 0;
    }
    if (k < 0) break;
  }
  const cd tr = trace(v);
  if (tr == cd(0.0, 0.0)) throw EngineError("dense reference: zero trace");
  return num / tr;
}

cd DenseLindblad::mean_site_expectation(const Vector& v, const Matrix3& o) const {
  cd acc(0.0, 0.0);
  for (int s = 0; s < nsites_; ++s) acc += site_expectation(v, s, o);
  return acc / static_cast<double>(nsites_);
}

double DenseLindblad::middle_cut_operator_entropy(const Vector& v) const {
  const int half = nsites_ / 2;
  if (half < 1) throw std::invalid_argument("operator entropy needs at least two sites");
  long rows = 1;
  for (int k = 0; k < half; ++k) rows *= 9;
  const long cols = dim_ / rows;
  Eigen::Map<const RMatrix> m(v.data(), rows, cols);
  Eigen::BDCSVD<Matrix> svd(m);
  return entropy_from_spectrum(svd.singularValues());
}

}  // namespace nvt
