#pragma once

#include "nvtensor/krylov.hpp"
#include "nvtensor/model.hpp"

namespace nvt {

struct EdOptions {
  KrylovOptions krylov{30, 1e-12};
  int max_sites = 6;  // 9^n amplitudes; the guard keeps memory and time sane
};

// Dense integrator for the vectorized master equation.  The generator is
// never materialized as a full matrix; each term is applied through strided
// block GEMVs, and steps go through the Arnoldi exponential.
class DenseLindblad {
 public:
  DenseLindblad(const ModelSpec& m, EdOptions opt = {});

  int n() const { return nsites_; }
  long dim() const { return dim_; }

  Vector matvec(const Vector& v) const;
  void step(Vector& v, double dt) const;

  Vector product_vec(const std::vector<Matrix>& local_rho) const;
  cd trace(const Vector& v) const;
  cd site_expectation(const Vector& v, int site, const Matrix3& o) const;
  cd mean_site_expectation(const Vector& v, const Matrix3& o) const;
  double middle_cut_operator_entropy(const Vector& v) const;

 private:
  struct DenseTerm {
    std::vector<int> sites;
    RMatrix op;
  };

  int nsites_;
  long dim_;
  EdOptions opt_;
  std::vector<DenseTerm> terms_;
  std::vector<long> site_stride_;  // stride of each site's paired digit
};

}  // namespace nvt
