#pragma once

#include <vector>

#include "nvtensor/dtensor.hpp"

namespace nvt {

// One local term of a lattice operator: a dense matrix on the fused physical
// space of `sites` (ascending, lowest site slowest).  Supports of size 1 and
// 2 are what the builders below accept.
struct LocalTerm {
  std::vector<int> sites;
  Matrix op;
};
using LocalTermList = std::vector<LocalTerm>;

}  // namespace nvt
