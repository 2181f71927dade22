#pragma once

#include <vector>

#include "nvtensor/dtensor.hpp"

namespace nvt {

// Bookkeeping for a truncating SVD: what was kept, what was dropped, and the
// 2-norm of the dropped tail.  absorb() accumulates epsilon in quadrature so
// a trajectory can carry a running total.
struct TruncationReport {
  long kept = 0;
  double epsilon = 0.0;
  std::vector<double> discarded;

  void absorb(const TruncationReport& other);
};

struct SvdSplitResult {
  DTensor u;           // (left dims..., k)
  DTensor vh;          // (k, right dims...)
  Eigen::VectorXd s;   // kept singular values, descending
  TruncationReport report;
};

// Split a tensor across the bond between axes [0, split) and [split, rank).
// Keeps at most chi_max singular values and drops any s_k < rel_floor * s_0.
// chi_max <= 0 means unbounded.
SvdSplitResult svd_split(const DTensor& theta, long split, long chi_max, double rel_floor);

// Shannon-like entropy (base 2) of a normalized squared-singular-value
// distribution.  Throws on an all-zero spectrum.
double entropy_from_spectrum(const Eigen::VectorXd& s);

}  // namespace nvt
