#pragma once

#include <vector>

#include <Eigen/Dense>

#include "nvtensor/dtensor.hpp"
#include "nvtensor/terms.hpp"

namespace nvt {

inline constexpr double two_pi = 6.283185307179586476925286766559;

using Eigen::Vector3d;

// All frequencies and rates are angular, in rad/us.  Lengths are in nm.
struct PhysicalConstants {
  double zero_field_splitting = two_pi * 2870.0;  // ground-state splitting D
  double dipolar_strength = two_pi * 52.0;        // J0, rad/us * nm^3
};

// Per-site drive and field parameters in the frame rotating at the drive
// frequency.  zeeman is the product g_s * mu_B * B_z.
struct NvSiteParams {
  double zeeman = 0.0;
  double rabi = 0.0;
  double drive_frequency = 0.0;
};

struct Geometry {
  std::vector<Vector3d> positions_nm;
  std::vector<Vector3d> axes;  // NV symmetry axes, unit vectors
};

enum class InteractionForm { Effective, LabFrame };

enum class LindbladOperator { DephasingSz };

struct DissipatorSpec {
  int site = 0;
  LindbladOperator op = LindbladOperator::DephasingSz;
  double rate = 0.0;  // 1/us
};

struct ModelSpec {
  PhysicalConstants constants;
  std::vector<NvSiteParams> sites;
  Geometry geometry;
  InteractionForm interaction = InteractionForm::Effective;
  std::vector<DissipatorSpec> dissipators;

  int n() const { return static_cast<int>(sites.size()); }
  void validate() const;
};

// Spin-1 matrices in the basis {|+1>, |0>, |-1>} (row/column 0 is m = +1).
struct Spin1 {
  Matrix3 sx, sy, sz;
};
const Spin1& spin1_operators();
Matrix3 spin1_identity();

// Drive frequency that puts the |0> <-> |-1> transition on resonance for the
// given Zeeman shift (lower-frequency branch of the two ESR lines); |+1> is
// left detuned by twice the Zeeman shift.
double resonant_drive_frequency(const PhysicalConstants& c, double zeeman);

// (D - omega) Sz^2 + zeeman Sz + (rabi/2) Sx, in the rotating frame.
Matrix3 single_site_hamiltonian(const NvSiteParams& p, const PhysicalConstants& c);

struct DipoleCoupling {
  double c_dip = 0.0;    // rad/us
  double q = 0.0;        // angular factor 3 cos(ti) cos(tj) - zi.zj
  double distance = 0.0; // nm
};
DipoleCoupling dipole_coupling(const Geometry& g, int i, int j, const PhysicalConstants& c);

// Two-site interaction Hamiltonians on the 9-dimensional ket space of sites
// (i, j), with the lower site index as the slower tensor factor.
Matrix effective_pair_term(const Geometry& g, int i, int j, const PhysicalConstants& c);
Matrix lab_frame_pair_term(const Geometry& g, int i, int j, const PhysicalConstants& c);
Matrix pair_term(const ModelSpec& m, int i, int j);

Matrix3 lindblad_matrix(LindbladOperator op);

// --- vectorization helpers -------------------------------------------------
//
// Density matrices are vectorized site by site: each site carries a paired
// index j = ket + 3*bra, and multi-site indices compose with the leftmost
// site slowest.  Superoperators below act on that layout.

// S[(i,i'),(k,k')] = A[i,k] * B[i',k'] for n sites (A on kets, B on bras).
Matrix super_ab(const Matrix& a, const Matrix& b, int nsites);
// -i (H . - . H) as a superoperator.
Matrix hamiltonian_superop(const Matrix& h, int nsites);
// rate * (L . L^dag - 1/2 {L^dag L, .}) for a single site.
Matrix dissipator_superop(const Matrix3& l, double rate);

// A generator term acting on the vectorized paired space of its sites.
using SuperOpTerm = LocalTerm;
using SuperOpTermList = LocalTermList;

// All Lindbladian terms of the model: one single-site term per site
// (Hamiltonian plus its dissipators) and one term per interacting pair.
// Pair terms with exactly zero coupling are omitted.
SuperOpTermList build_superop_terms(const ModelSpec& m);

// Convenience: the standard chain used throughout, sites at spacing * k along
// (1,1,0)/sqrt(2) with all axes along (1,1,1)/sqrt(3), resonant drive, and a
// uniform Sz dephasing rate on every site.
ModelSpec standard_chain_model(int n, double spacing_nm, double gamma,
                               double rabi = two_pi * 2.0,
                               double zeeman = two_pi * 407.0 / 2.0);

// Same model with every site's zeeman shifted while the drive frequency stays
// fixed; this is the parameter direction probed by the sensing metrics.
ModelSpec with_zeeman_shift(const ModelSpec& m, double delta);

}  // namespace nvt
