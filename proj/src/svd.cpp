#include "nvtensor/svd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

namespace nvt {

void TruncationReport::absorb(const TruncationReport& other) {
  kept = std::max(kept, other.kept);
  epsilon = std::hypot(epsilon, other.epsilon);
  discarded.insert(discarded.end(), other.discarded.begin(), other.discarded.end());
}

SvdSplitResult svd_split(const DTensor& theta, long split, long chi_max, double rel_floor) {
  if (split < 1 || split >= theta.rank())
    throw std::invalid_argument("svd_split: split axis out of range");
  if (!theta.all_finite()) throw std::runtime_error("svd_split: non-finite input");

  const Matrix m = theta.to_matrix(split);
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const long full = sv.size();

  long keep = full;
  if (chi_max > 0) keep = std::min(keep, chi_max);
  if (full > 0 && sv(0) > 0.0 && rel_floor > 0.0) {
    const double cut = rel_floor * sv(0);
    while (keep > 1 && sv(keep - 1) < cut) --keep;
  }
  if (keep < 1) keep = std::min<long>(1, full);

  SvdSplitResult out;
  out.report.kept = keep;
  double eps2 = 0.0;
  for (long k = keep; k < full; ++k) {
    out.report.discarded.push_back(sv(k));
    eps2 += sv(k) * sv(k);
  }
  out.report.epsilon = std::sqrt(eps2);
  out.s = sv.head(keep);

  std::vector<long> udims(theta.dims().begin(), theta.dims().begin() + split);
  udims.push_back(keep);
  std::vector<long> vdims;
  vdims.push_back(keep);
  vdims.insert(vdims.end(), theta.dims().begin() + split, theta.dims().end());

  out.u = DTensor(udims);
  Eigen::Map<RMatrix>(out.u.data(), m.rows(), keep) = svd.matrixU().leftCols(keep);
  out.vh = DTensor(vdims);
  Eigen::Map<RMatrix>(out.vh.data(), keep, m.cols()) =
      svd.matrixV().leftCols(keep).adjoint();
  return out;
}

double entropy_from_spectrum(const Eigen::VectorXd& s) {
  double total = 0.0;
  for (long k = 0; k < s.size(); ++k) total += s(k) * s(k);
  if (!(total > 0.0)) throw std::runtime_error("entropy_from_spectrum: zero spectrum");
  double h = 0.0;
  for (long k = 0; k < s.size(); ++k) {
    const double p = s(k) * s(k) / total;
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

}  // namespace nvt
