#include "nvtensor/tensor_train.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/QR>

namespace nvt {

namespace {

// Thin QR: M (m x n) = Q (m x k) R (k x n), k = min(m, n).
void thin_qr(const Matrix& m, Matrix& q, Matrix& r) {
  const long k = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<Matrix> qr(m);
  q = qr.householderQ() * Matrix::Identity(m.rows(), k);
  r = Matrix(qr.matrixQR().topRows(k).triangularView<Eigen::Upper>());
}

// Push orthogonality from site k to site k+1.
void shift_right(TensorTrain& t, int k) {
  DTensor& a = t.sites[static_cast<std::size_t>(k)];
  const long l = a.dim(0), d = a.dim(1);
  Matrix q, rm;
  thin_qr(a.to_matrix(2), q, rm);
  const long kk = q.cols();
  DTensor qa({l, d, kk});
  Eigen::Map<RMatrix>(qa.data(), l * d, kk) = q;
  a = std::move(qa);
  DTensor rt = DTensor::from_matrix(rm);
  t.sites[static_cast<std::size_t>(k + 1)] =
      DTensor::contract(rt, {1}, t.sites[static_cast<std::size_t>(k + 1)], {0});
}

// Push orthogonality from site k to site k-1.
void shift_left(TensorTrain& t, int k) {
  DTensor& a = t.sites[static_cast<std::size_t>(k)];
  const long d = a.dim(1), r = a.dim(2);
  // M = L Q with Q row-orthonormal, via QR of the adjoint.
  Matrix m = a.to_matrix(1);
  Matrix q, rm;
  thin_qr(m.adjoint(), q, rm);
  const long kk = q.cols();
  DTensor qa({kk, d, r});
  Eigen::Map<RMatrix>(qa.data(), kk, d * r) = q.adjoint();
  a = std::move(qa);
  DTensor lt = DTensor::from_matrix(rm.adjoint());  // (l, kk)
  t.sites[static_cast<std::size_t>(k - 1)] =
      DTensor::contract(t.sites[static_cast<std::size_t>(k - 1)], {2}, lt, {0});
}

long paired(long ket, long bra) { return ket + 3 * bra; }

}  // namespace

long TensorTrain::max_bond_dim() const {
  long m = 1;
  for (const auto& s : sites) m = std::max({m, s.dim(0), s.dim(2)});
  return m;
}

void TensorTrain::check_consistent() const {
  if (sites.empty()) throw std::invalid_argument("TensorTrain: empty");
  if (sites.front().dim(0) != 1 || sites.back().dim(2) != 1)
    throw std::invalid_argument("TensorTrain: boundary bonds must have dimension 1");
  for (int k = 0; k + 1 < n(); ++k)
    if (sites[static_cast<std::size_t>(k)].dim(2) != sites[static_cast<std::size_t>(k + 1)].dim(0))
      throw std::invalid_argument("TensorTrain: bond mismatch");
}

TensorTrain product_state_mps(const std::vector<Vector>& local_kets) {
  if (local_kets.empty()) throw std::invalid_argument("product_state_mps: empty");
  TensorTrain t;
  for (const auto& v : local_kets) {
    DTensor s({1, v.size(), 1});
    for (long k = 0; k < v.size(); ++k) s.data()[k] = v(k);
    t.sites.push_back(std::move(s));
  }
  t.center = 0;
  return t;
}

TensorTrain product_mpdo(const std::vector<Matrix>& local_rho) {
  if (local_rho.empty()) throw std::invalid_argument("product_mpdo: empty");
  TensorTrain t;
  for (const auto& rho : local_rho) {
    if (rho.rows() != 3 || rho.cols() != 3)
      throw std::invalid_argument("product_mpdo: local factors must be 3x3");
    if ((rho - rho.adjoint()).norm() > 1e-10)
      throw std::invalid_argument("product_mpdo: non-Hermitian factor");
    if (std::abs(rho.trace() - cd(1.0, 0.0)) > 1e-10)
      throw std::invalid_argument("product_mpdo: factor trace != 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw std::invalid_argument("product_mpdo: negative factor");
    DTensor s({1, 9, 1});
    for (long i = 0; i < 3; ++i)
      for (long ip = 0; ip < 3; ++ip) s.data()[paired(i, ip)] = rho(i, ip);
    t.sites.push_back(std::move(s));
  }
  t.center = 0;
  return t;
}

TensorTrain mpdo_from_mps(const TensorTrain& mps) {
  TensorTrain t;
  for (const auto& a : mps.sites) {
    const long l = a.dim(0), d = a.dim(1), r = a.dim(2);
    DTensor outer = DTensor::contract(a, {}, a.conjugated(), {});
    // (l, d, r, l', d', r') -> (l, l', d', d, r, r'); the paired physical
    // index is ket-fastest, so the bra digit is the slower one.
    DTensor p = outer.permuted({0, 3, 4, 1, 2, 5});
    p.reshape({l * l, d * d, r * r});
    t.sites.push_back(std::move(p));
  }
  t.center = -1;
  return t;
}

Vector train_to_dense(const TensorTrain& t) {
  t.check_consistent();
  DTensor acc = t.sites[0];
  long d_total = acc.dim(1);
  acc.reshape({d_total, acc.dim(2)});
  for (int k = 1; k < t.n(); ++k) {
    const DTensor& s = t.sites[static_cast<std::size_t>(k)];
    acc = DTensor::contract(acc, {1}, s, {0});  // (D, d, r)
    d_total *= s.dim(1);
    acc.reshape({d_total, s.dim(2)});
  }
  return acc.to_vector();
}

Matrix mpdo_to_density_matrix(const TensorTrain& t) {
  const int nn = t.n();
  for (int k = 0; k < nn; ++k)
    if (t.phys_dim(k) != 9)
      throw std::invalid_argument("mpdo_to_density_matrix: physical dimension must be 9");
  return paired_vec_to_density_matrix(train_to_dense(t), nn);
}

Vector density_matrix_to_paired_vec(const Matrix& rho, int nsites) {
  long d = 1;
  for (int k = 0; k < nsites; ++k) d *= 3;
  if (rho.rows() != d || rho.cols() != d)
    throw std::invalid_argument("density_matrix_to_paired_vec: size mismatch");
  Vector v(d * d);
  std::vector<long> digits(static_cast<std::size_t>(nsites));
  for (long J = 0; J < d * d; ++J) {
    long rem = J, row = 0, col = 0;
    for (int s = nsites - 1; s >= 0; --s) {
      digits[static_cast<std::size_t>(s)] = rem % 9;
      rem /= 9;
    }
    for (int s = 0; s < nsites; ++s) {
      const long j = digits[static_cast<std::size_t>(s)];
      row = row * 3 + j % 3;
      col = col * 3 + j / 3;
    }
    v(J) = rho(row, col);
  }
  return v;
}

Matrix paired_vec_to_density_matrix(const Vector& v, int nsites) {
  long d = 1;
  for (int k = 0; k < nsites; ++k) d *= 3;
  if (v.size() != d * d)
    throw std::invalid_argument("paired_vec_to_density_matrix: size mismatch");
  Matrix rho(d, d);
  for (long J = 0; J < d * d; ++J) {
    long rem = J, row = 0, col = 0;
    std::vector<long> digits(static_cast<std::size_t>(nsites));
    for (int s = nsites - 1; s >= 0; --s) {
      digits[static_cast<std::size_t>(s)] = rem % 9;
      rem /= 9;
    }
    for (int s = 0; s < nsites; ++s) {
      const long j = digits[static_cast<std::size_t>(s)];
      row = row * 3 + j % 3;
      col = col * 3 + j / 3;
    }
    rho(row, col) = v(J);
  }
  return rho;
}

void canonicalize(TensorTrain& t, int center) {
  t.check_consistent();
  if (center < 0 || center >= t.n()) throw std::invalid_argument("canonicalize: bad center");
  for (int k = 0; k < center; ++k) shift_right(t, k);
  for (int k = t.n() - 1; k > center; --k) shift_left(t, k);
  t.center = center;
}

void move_center(TensorTrain& t, int to) {
  if (t.center < 0) {
    canonicalize(t, to);
    return;
  }
  while (t.center < to) {
    shift_right(t, t.center);
    ++t.center;
  }
  while (t.center > to) {
    shift_left(t, t.center);
    --t.center;
  }
}

Eigen::VectorXd bond_spectrum(const TensorTrain& t, int b) {
  if (b < 1 || b >= t.n()) throw std::invalid_argument("bond_spectrum: bond out of range");
  TensorTrain c = t;
  canonicalize(c, b - 1);
  const DTensor& a = c.sites[static_cast<std::size_t>(b - 1)];
  Eigen::BDCSVD<Matrix> svd(a.to_matrix(2));
  return svd.singularValues();
}

double entanglement_entropy(const TensorTrain& t, int b) {
  return entropy_from_spectrum(bond_spectrum(t, b));
}

double operator_entanglement_entropy(const TensorTrain& t, int b) {
  return entanglement_entropy(t, b);
}

namespace {

// Row transfer of an MPDO site against a paired-space weight vector.
DTensor site_transfer(const DTensor& site, const Vector& w) {
  DTensor wt = DTensor::from_vector(w);
  return DTensor::contract(site, {1}, wt, {0});  // (l, r)
}

Vector trace_weights() {
  Vector w = Vector::Zero(9);
  for (long i = 0; i < 3; ++i) w(paired(i, i)) = 1.0;
  return w;
}

Vector operator_weights(const Matrix3& o) {
  Vector w(9);
  for (long i = 0; i < 3; ++i)
    for (long ip = 0; ip < 3; ++ip) w(paired(i, ip)) = o(ip, i);
  return w;
}

}  // namespace

cd mpdo_trace(const TensorTrain& t) {
  t.check_consistent();
  const Vector w = trace_weights();
  DTensor e = DTensor::ones({1});
  for (const auto& s : t.sites) e = DTensor::contract(e, {0}, site_transfer(s, w), {0});
  return e.data()[0];
}

SiteSums mpdo_site_sums(const TensorTrain& t, const Matrix3& o) {
  t.check_consistent();
  const int nn = t.n();
  const Vector wi = trace_weights();
  const Vector wo = operator_weights(o);

  std::vector<DTensor> ti(static_cast<std::size_t>(nn));
  for (int k = 0; k < nn; ++k) ti[static_cast<std::size_t>(k)] =
      site_transfer(t.sites[static_cast<std::size_t>(k)], wi);

  // prefix[k]: identity-contracted row up to (excluding) site k
  std::vector<DTensor> prefix(static_cast<std::size_t>(nn) + 1);
  prefix[0] = DTensor::ones({1});
  for (int k = 0; k < nn; ++k)
    prefix[static_cast<std::size_t>(k + 1)] =
        DTensor::contract(prefix[static_cast<std::size_t>(k)], {0}, ti[static_cast<std::size_t>(k)], {0});
  std::vector<DTensor> suffix(static_cast<std::size_t>(nn) + 1);
  suffix[static_cast<std::size_t>(nn)] = DTensor::ones({1});
  for (int k = nn - 1; k >= 0; --k)
    suffix[static_cast<std::size_t>(k)] =
        DTensor::contract(ti[static_cast<std::size_t>(k)], {1}, suffix[static_cast<std::size_t>(k + 1)], {0});

  SiteSums out;
  out.trace = prefix[static_cast<std::size_t>(nn)].data()[0];
  out.per_site.resize(static_cast<std::size_t>(nn));
  for (int k = 0; k < nn; ++k) {
    DTensor to = site_transfer(t.sites[static_cast<std::size_t>(k)], wo);
    DTensor left = DTensor::contract(prefix[static_cast<std::size_t>(k)], {0}, to, {0});
    DTensor full = DTensor::contract(left, {0}, suffix[static_cast<std::size_t>(k + 1)], {0});
    out.per_site[static_cast<std::size_t>(k)] = full.data()[0];
  }
  return out;
}

cd mpdo_mean_site_expectation(const TensorTrain& t, const Matrix3& o) {
  const SiteSums s = mpdo_site_sums(t, o);
  if (s.trace == cd(0.0, 0.0)) throw std::runtime_error("mpdo_mean_site_expectation: zero trace");
  cd total(0.0, 0.0);
  for (const cd& v : s.per_site) total += v;
  return total / (s.trace * static_cast<double>(t.n()));
}

cd mpdo_renormalize(TensorTrain& t) {
  const cd tr = mpdo_trace(t);
  const double mag = std::abs(tr);
  if (!(mag > 0.0) || !std::isfinite(mag))
    throw std::runtime_error("mpdo_renormalize: degenerate trace");
  const int target = t.center >= 0 ? t.center : 0;
  t.sites[static_cast<std::size_t>(target)] *= cd(1.0, 0.0) / tr;
  t.log_norm += std::log(mag);
  return tr;
}

TensorTrain train_add(const TensorTrain& a, cd ca, const TensorTrain& b, cd cb) {
  a.check_consistent();
  b.check_consistent();
  if (a.n() != b.n()) throw std::invalid_argument("train_add: length mismatch");
  const int nn = a.n();
  TensorTrain out;
  out.center = -1;
  if (nn == 1) {
    DTensor s = a.sites[0];
    s *= ca;
    DTensor sb = b.sites[0];
    sb *= cb;
    if (s.dims() != sb.dims()) throw std::invalid_argument("train_add: physical mismatch");
    s += sb;
    out.sites.push_back(std::move(s));
    return out;
  }
  for (int k = 0; k < nn; ++k) {
    const DTensor& sa = a.sites[static_cast<std::size_t>(k)];
    const DTensor& sb = b.sites[static_cast<std::size_t>(k)];
    if (sa.dim(1) != sb.dim(1)) throw std::invalid_argument("train_add: physical mismatch");
    const long d = sa.dim(1);
    const long la = sa.dim(0), ra = sa.dim(2), lb = sb.dim(0), rb = sb.dim(2);
    const long l = k == 0 ? 1 : la + lb;
    const long r = k == nn - 1 ? 1 : ra + rb;
    DTensor s({l, d, r});
    auto put = [&](const DTensor& src, long loff, long roff, cd scale) {
      for (long il = 0; il < src.dim(0); ++il)
        for (long id = 0; id < d; ++id)
          for (long ir = 0; ir < src.dim(2); ++ir)
            s({k == 0 ? 0 : il + loff, id, k == nn - 1 ? 0 : ir + roff}) =
                scale * src({il, id, ir});
    };
    put(sa, 0, 0, k == 0 ? ca : cd(1.0, 0.0));
    put(sb, la, ra, k == 0 ? cb : cd(1.0, 0.0));
    out.sites.push_back(std::move(s));
  }
  return out;
}

void train_scale(TensorTrain& t, cd c) {
  if (t.sites.empty()) return;
  const int target = t.center >= 0 ? t.center : 0;
  t.sites[static_cast<std::size_t>(target)] *= c;
}

void apply_single_site(TensorTrain& t, int site, const Matrix& op) {
  DTensor& s = t.sites[static_cast<std::size_t>(site)];
  if (op.rows() != s.dim(1) || op.cols() != s.dim(1))
    throw std::invalid_argument("apply_single_site: dimension mismatch");
  DTensor o = DTensor::from_matrix(op);
  s = DTensor::contract(o, {1}, s, {1}).permuted({1, 0, 2});
  if (t.center != site) t.center = -1;
}

TruncationReport train_compress(TensorTrain& t, long chi_max, double rel_floor) {
  t.check_consistent();
  canonicalize(t, t.n() - 1);
  TruncationReport total;
  for (int k = t.n() - 1; k > 0; --k) {
    DTensor& s = t.sites[static_cast<std::size_t>(k)];
    SvdSplitResult split = svd_split(s, 1, chi_max, rel_floor);
    total.absorb(split.report);
    s = std::move(split.vh);
    DTensor us = std::move(split.u);  // (l, kk)
    for (long row = 0; row < us.dim(0); ++row)
      for (long col = 0; col < us.dim(1); ++col) us({row, col}) *= split.s(col);
    t.sites[static_cast<std::size_t>(k - 1)] =
        DTensor::contract(t.sites[static_cast<std::size_t>(k - 1)], {2}, us, {0});
  }
  t.center = 0;
  return total;
}

double train_overlap_norm(const TensorTrain& a) {
  a.check_consistent();
  DTensor e = DTensor::ones({1, 1});
  for (const auto& s : a.sites) {
    DTensor tmp = DTensor::contract(e, {1}, s, {0});          // (lb, d, rk)
    e = DTensor::contract(s.conjugated(), {0, 1}, tmp, {0, 1});  // (rb, rk)
  }
  return std::sqrt(std::abs(e.data()[0].real()));
}

TensorTrain train_from_dense(const Vector& v, const std::vector<long>& phys_dims,
                             long chi_max, double rel_floor) {
  if (phys_dims.empty()) throw std::invalid_argument("train_from_dense: no sites");
  long total = 1;
  for (long d : phys_dims) {
    if (d < 1) throw std::invalid_argument("train_from_dense: bad physical dimension");
    total *= d;
  }
  if (v.size() != total) throw std::invalid_argument("train_from_dense: size mismatch");

  TensorTrain out;
  const int nn = static_cast<int>(phys_dims.size());
  DTensor cur = DTensor::from_vector(v).reshaped({1, total});
  for (int k = 0; k + 1 < nn; ++k) {
    const long d = phys_dims[static_cast<std::size_t>(k)];
    DTensor theta = cur.reshaped({cur.dim(0), d, cur.dim(1) / d});
    SvdSplitResult res = svd_split(theta, 2, chi_max, rel_floor);
    out.sites.push_back(std::move(res.u));  // (l, d, kept), left-orthonormal
    Matrix m = res.vh.to_matrix(1);
    for (long r = 0; r < res.s.size(); ++r) m.row(r) *= res.s(r);
    cur = DTensor::from_matrix(m);
  }
  out.sites.push_back(cur.reshaped({cur.dim(0), phys_dims.back(), 1}));
  out.center = nn - 1;
  return out;
}

}  // namespace nvt
