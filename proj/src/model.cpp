#include "nvtensor/model.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

namespace nvt {

namespace {

constexpr cd I_unit(0.0, 1.0);

long pow3(int n) {
  long p = 1;
  for (int k = 0; k < n; ++k) p *= 3;
  return p;
}

// Composite paired index from separate ket/bra composite indices (both with
// the leftmost site slowest).
long paired_index(long ket, long bra, int nsites) {
  long digits_k[8], digits_b[8];
  for (int s = nsites - 1; s >= 0; --s) {
    digits_k[s] = ket % 3;
    ket /= 3;
    digits_b[s] = bra % 3;
    bra /= 3;
  }
  long j = 0;
  for (int s = 0; s < nsites; ++s) j = j * 9 + (digits_k[s] + 3 * digits_b[s]);
  return j;
}

// Orthonormal completion of a unit axis into a right-handed frame.
void local_frame(const Vector3d& zhat, Vector3d& xhat, Vector3d& yhat) {
  Vector3d a = std::abs(zhat.z()) < 0.9 ? Vector3d(0, 0, 1) : Vector3d(1, 0, 0);
  xhat = (a - a.dot(zhat) * zhat).normalized();
  yhat = zhat.cross(xhat);
}

}  // namespace

void ModelSpec::validate() const {
  const int nn = n();
  if (nn < 1) throw std::invalid_argument("ModelSpec: need at least one site");
  if (static_cast<int>(geometry.positions_nm.size()) != nn ||
      static_cast<int>(geometry.axes.size()) != nn)
    throw std::invalid_argument("ModelSpec: geometry size mismatch");
  for (const auto& z : geometry.axes)
    if (std::abs(z.norm() - 1.0) > 1e-10)
      throw std::invalid_argument("ModelSpec: axes must be unit vectors");
  for (int i = 0; i < nn; ++i)
    for (int j = i + 1; j < nn; ++j)
      if ((geometry.positions_nm[i] - geometry.positions_nm[j]).norm() < 1e-9)
        throw std::invalid_argument("ModelSpec: coincident sites");
  for (const auto& d : dissipators) {
    if (d.site < 0 || d.site >= nn) throw std::invalid_argument("ModelSpec: dissipator site");
    if (d.rate < 0.0) throw std::invalid_argument("ModelSpec: negative rate");
  }
  for (const auto& s : sites)
    if (s.rabi < 0.0) throw std::invalid_argument("ModelSpec: negative Rabi frequency");
}

const Spin1& spin1_operators() {
  static const Spin1 ops = [] {
    Spin1 o;
    const double r = 1.0 / std::sqrt(2.0);
    o.sx.setZero();
    o.sx(0, 1) = r; o.sx(1, 0) = r; o.sx(1, 2) = r; o.sx(2, 1) = r;
    o.sy.setZero();
    o.sy(0, 1) = -I_unit * r; o.sy(1, 0) = I_unit * r;
    o.sy(1, 2) = -I_unit * r; o.sy(2, 1) = I_unit * r;
    o.sz.setZero();
    o.sz(0, 0) = 1.0; o.sz(2, 2) = -1.0;
    return o;
  }();
  return ops;
}

Matrix3 spin1_identity() { return Matrix3::Identity(); }

double resonant_drive_frequency(const PhysicalConstants& c, double zeeman) {
  return c.zero_field_splitting - zeeman;
}

Matrix3 single_site_hamiltonian(const NvSiteParams& p, const PhysicalConstants& c) {
  const Spin1& s = spin1_operators();
  const double detuning = c.zero_field_splitting - p.drive_frequency;
  return detuning * (s.sz * s.sz) + p.zeeman * s.sz + 0.5 * p.rabi * s.sx;
}

DipoleCoupling dipole_coupling(const Geometry& g, int i, int j, const PhysicalConstants& c) {
  if (i == j) throw std::invalid_argument("dipole_coupling: i == j");
  const Vector3d rvec = g.positions_nm[j] - g.positions_nm[i];
  const double r = rvec.norm();
  const Vector3d rhat = rvec / r;
  const Vector3d& zi = g.axes[i];
  const Vector3d& zj = g.axes[j];
  DipoleCoupling out;
  out.distance = r;
  out.q = 3.0 * zi.dot(rhat) * zj.dot(rhat) - zi.dot(zj);
  out.c_dip = c.dipolar_strength * out.q / (r * r * r);
  return out;
}

Matrix effective_pair_term(const Geometry& g, int i, int j, const PhysicalConstants& c) {
  const DipoleCoupling d = dipole_coupling(g, i, j, c);
  const Spin1& s = spin1_operators();
  auto two = [&](const Matrix3& a, const Matrix3& b) {
    return Matrix(Eigen::kroneckerProduct(a, b));
  };
  return d.c_dip * (0.5 * (two(s.sx, s.sx) + two(s.sy, s.sy)) - two(s.sz, s.sz));
}

Matrix lab_frame_pair_term(const Geometry& g, int i, int j, const PhysicalConstants& c) {
  if (i == j) throw std::invalid_argument("lab_frame_pair_term: i == j");
  const Vector3d rvec = g.positions_nm[j] - g.positions_nm[i];
  const double r = rvec.norm();
  const Vector3d rhat = rvec / r;
  const double k0 = c.dipolar_strength / (r * r * r);

  const Spin1& s = spin1_operators();
  const Matrix3 comps[3] = {s.sx, s.sy, s.sz};

  // Spin components of each site expressed in its own frame; the geometric
  // vector operators S.rhat and S_i.S_j are frame-completion independent.
  Vector3d xi, yi, xj, yj;
  local_frame(g.axes[i], xi, yi);
  local_frame(g.axes[j], xj, yj);
  const Vector3d frame_i[3] = {xi, yi, g.axes[i]};
  const Vector3d frame_j[3] = {xj, yj, g.axes[j]};

  Matrix3 si_r = Matrix3::Zero(), sj_r = Matrix3::Zero();
  for (int m = 0; m < 3; ++m) {
    si_r += frame_i[m].dot(rhat) * comps[m];
    sj_r += frame_j[m].dot(rhat) * comps[m];
  }

  Matrix h = Matrix::Zero(9, 9);
  h += 3.0 * Eigen::kroneckerProduct(si_r, sj_r);
  for (int m = 0; m < 3; ++m)
    for (int p = 0; p < 3; ++p)
      h -= frame_i[m].dot(frame_j[p]) * Eigen::kroneckerProduct(comps[m], comps[p]);
  return -k0 * h;
}

Matrix pair_term(const ModelSpec& m, int i, int j) {
  return m.interaction == InteractionForm::Effective
             ? effective_pair_term(m.geometry, i, j, m.constants)
             : lab_frame_pair_term(m.geometry, i, j, m.constants);
}

Matrix3 lindblad_matrix(LindbladOperator op) {
  switch (op) {
    case LindbladOperator::DephasingSz:
      return spin1_operators().sz;
  }
  throw std::invalid_argument("lindblad_matrix: unknown operator");
}

Matrix super_ab(const Matrix& a, const Matrix& b, int nsites) {
  const long d = pow3(nsites);
  if (a.rows() != d || a.cols() != d || b.rows() != d || b.cols() != d)
    throw std::invalid_argument("super_ab: dimension mismatch");
  const long dd = d * d;
  Matrix s = Matrix::Zero(dd, dd);
  for (long i = 0; i < d; ++i)
    for (long ip = 0; ip < d; ++ip) {
      const long row = paired_index(i, ip, nsites);
      for (long k = 0; k < d; ++k) {
        if (a(i, k) == cd(0.0, 0.0)) continue;
        for (long kp = 0; kp < d; ++kp) {
          const cd v = a(i, k) * b(ip, kp);
          if (v != cd(0.0, 0.0)) s(row, paired_index(k, kp, nsites)) = v;
        }
      }
    }
  return s;
}

Matrix hamiltonian_superop(const Matrix& h, int nsites) {
  const long d = h.rows();
  const Matrix id = Matrix::Identity(d, d);
  return -I_unit * (super_ab(h, id, nsites) - super_ab(id, h.transpose(), nsites));
}

Matrix dissipator_superop(const Matrix3& l, double rate) {
  const Matrix id = Matrix::Identity(3, 3);
  const Matrix ldl = l.adjoint() * l;
  Matrix lm = l, lc = l.conjugate();
  return rate * (super_ab(lm, lc, 1) -
                 0.5 * super_ab(ldl, id, 1) -
                 0.5 * super_ab(id, ldl.transpose(), 1));
}

SuperOpTermList build_superop_terms(const ModelSpec& m) {
  m.validate();
  SuperOpTermList terms;
  const int nn = m.n();

  for (int s = 0; s < nn; ++s) {
    Matrix local = hamiltonian_superop(single_site_hamiltonian(m.sites[s], m.constants), 1);
    for (const auto& d : m.dissipators)
      if (d.site == s && d.rate > 0.0)
        local += dissipator_superop(lindblad_matrix(d.op), d.rate);
    terms.push_back({{s}, std::move(local)});
  }

  for (int i = 0; i < nn; ++i)
    for (int j = i + 1; j < nn; ++j) {
      Matrix h = pair_term(m, i, j);
      if (h.norm() == 0.0) continue;
      terms.push_back({{i, j}, hamiltonian_superop(h, 2)});
    }
  return terms;
}

ModelSpec standard_chain_model(int n, double spacing_nm, double gamma, double rabi,
                               double zeeman) {
  ModelSpec m;
  const Vector3d dir = Vector3d(1, 1, 0) / std::sqrt(2.0);
  const Vector3d axis = Vector3d(1, 1, 1) / std::sqrt(3.0);
  for (int k = 0; k < n; ++k) {
    NvSiteParams p;
    p.zeeman = zeeman;
    p.rabi = rabi;
    p.drive_frequency = resonant_drive_frequency(m.constants, zeeman);
    m.sites.push_back(p);
    m.geometry.positions_nm.push_back(spacing_nm * k * dir);
    m.geometry.axes.push_back(axis);
    m.dissipators.push_back({k, LindbladOperator::DephasingSz, gamma});
  }
  m.validate();
  return m;
}

ModelSpec with_zeeman_shift(const ModelSpec& m, double delta) {
  ModelSpec out = m;
  for (auto& s : out.sites) s.zeeman += delta;
  return out;
}

}  // namespace nvt
