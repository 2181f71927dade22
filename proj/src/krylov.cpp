#include "nvtensor/krylov.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace nvt {

namespace {

// One Arnoldi build for the full tau; empty return means the subspace cap was
// reached before the residual estimate dropped below tolerance.
std::pair<Vector, bool> expv_attempt(const std::function<Vector(const Vector&)>& apply,
                                     const Vector& v, cd tau, const KrylovOptions& opt,
                                     KrylovInfo* info, double* last_residual) {
  const double beta = v.norm();
  if (beta == 0.0) return {v, true};
  const long n = v.size();
  const int mmax = static_cast<int>(std::min<long>(opt.max_dim, n));
  std::vector<Vector> basis;
  basis.reserve(static_cast<std::size_t>(mmax) + 1);
  basis.push_back(v / beta);
  Matrix h = Matrix::Zero(mmax + 1, mmax);

  double hscale = 0.0;
  for (int j = 0; j < mmax; ++j) {
    Vector w = apply(basis[static_cast<std::size_t>(j)]);
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i <= j; ++i) {
        const cd c = basis[static_cast<std::size_t>(i)].dot(w);
        h(i, j) += c;
        w -= c * basis[static_cast<std::size_t>(i)];
      }
    const double hnext = w.norm();
    h(j + 1, j) = hnext;
    for (int i = 0; i <= j + 1; ++i) hscale = std::max(hscale, std::abs(h(i, j)));

    const int m = j + 1;
    const Matrix f = (tau * h.topLeftCorner(m, m)).exp();
    const Vector y = f.col(0);

    const bool happy = hnext <= 1e-14 * std::max(hscale, 1.0);
    const double residual = happy ? 0.0 : hnext * std::abs(tau) * std::abs(y(m - 1));
    *last_residual = residual;
    if (happy || residual <= opt.tol) {
      Vector x = Vector::Zero(n);
      for (int i = 0; i < m; ++i) x += (beta * y(i)) * basis[static_cast<std::size_t>(i)];
      if (info) {
        info->dim_used = std::max(info->dim_used, m);
        info->residual = std::max(info->residual, residual);
        info->breakdown = happy;
      }
      return {std::move(x), true};
    }
    if (j + 1 < mmax) basis.push_back(w / hnext);
  }
  return {Vector(), false};
}

}  // namespace

Vector krylov_expv(const std::function<Vector(const Vector&)>& apply, const Vector& v,
                   cd tau, const KrylovOptions& opt, KrylovInfo* info) {
  if (info) *info = KrylovInfo{};
  if (tau == cd(0.0, 0.0) || v.norm() == 0.0) {
    if (info) info->breakdown = true;
    return v;
  }

  // When the cap is hit at full tau, step through 2^k segments instead; the
  // local bandwidth can exceed what max_dim resolves in one shot.
  double residual = 0.0;
  for (int splits = 0; splits <= 10; ++splits) {
    const int segments = 1 << splits;
    const cd seg_tau = tau / static_cast<double>(segments);
    Vector x = v;
    bool ok = true;
    for (int s = 0; s < segments && ok; ++s) {
      auto [next, converged] = expv_attempt(apply, x, seg_tau, opt, info, &residual);
      if (!converged) {
        ok = false;
        break;
      }
      x = std::move(next);
    }
    if (ok) return x;
  }
  throw KrylovError("krylov_expv: no convergence within subspace cap", residual);
}

}  // namespace nvt
