#pragma once

#include <vector>

#include "nvtensor/svd.hpp"
#include "nvtensor/tensor_train.hpp"
#include "nvtensor/terms.hpp"

namespace nvt {

// Matrix product operator with rank-4 site tensors
// (left bond, physical out, physical in, right bond).
struct Mpo {
  std::vector<DTensor> sites;

  int n() const { return static_cast<int>(sites.size()); }
  long phys_dim(int k) const { return sites[static_cast<std::size_t>(k)].dim(1); }
  long bond_dim(int b) const { return sites[static_cast<std::size_t>(b)].dim(0); }
  long max_bond_dim() const;
  void check_consistent() const;
};

Mpo mpo_identity(int n, long d);

// Sum of 1- and 2-site terms as an explicit first-order automaton.  Bond
// layout at every interior bond: index 0 is the "not started" rail, the last
// index is the "finished" rail, and the slots in between carry the open
// channels of pair terms spanning that bond (one group per term, ordered by
// term, factor rank determined by an SVD of the pair matrix).  The layout is
// what the propagator construction in evolve relies on.
Mpo triangular_mpo_from_terms(const LocalTermList& terms, int n, long d);

// Same content, compressed: bonds truncated at rel_floor relative accuracy.
Mpo mpo_from_terms(const LocalTermList& terms, int n, long d, double rel_floor = 1e-13);

// Exact gauge compression of an MPO (no-op on content up to rel_floor).
TruncationReport mpo_compress(Mpo& op, long chi_max, double rel_floor);

// op applied to t via a zip-up sweep, truncated to (chi_max, rel_floor), then
// a final right-to-left exact truncation pass.  Leaves t right-canonical.
TruncationReport apply_mpo(const Mpo& op, TensorTrain& t, long chi_max, double rel_floor);

Matrix mpo_to_dense(const Mpo& op);

}  // namespace nvt
