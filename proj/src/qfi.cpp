#include "nvtensor/qfi.hpp"

#include <array>
#include <cmath>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "nvtensor/errors.hpp"
#include "nvtensor/util.hpp"

namespace nvt {

const std::array<Matrix3, 9>& hermitian_basis() {
  static const std::array<Matrix3, 9> basis = [] {
    std::array<Matrix3, 9> g;
    int k = 0;
    for (int i = 0; i < 3; ++i) {
      g[static_cast<std::size_t>(k)] = Matrix3::Zero();
      g[static_cast<std::size_t>(k)](i, i) = 1.0;
      ++k;
    }
    const double r = 1.0 / std::sqrt(2.0);
    const cd im(0.0, 1.0);
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        g[static_cast<std::size_t>(k)] = Matrix3::Zero();
        g[static_cast<std::size_t>(k)](i, j) = r;
        g[static_cast<std::size_t>(k)](j, i) = r;
        ++k;
        g[static_cast<std::size_t>(k)] = Matrix3::Zero();
        g[static_cast<std::size_t>(k)](i, j) = im * r;
        g[static_cast<std::size_t>(k)](j, i) = -im * r;
        ++k;
      }
    return g;
  }();
  return basis;
}

namespace {

// Basis matrices packed as a (9, 3, 3) tensor for contractions.
const DTensor& basis_tensor() {
  static const DTensor g = [] {
    DTensor t({9, 3, 3});
    const auto& basis = hermitian_basis();
    for (long m = 0; m < 9; ++m)
      for (long a = 0; a < 3; ++a)
        for (long b = 0; b < 3; ++b) t({m, a, b}) = basis[static_cast<std::size_t>(m)](a, b);
    return t;
  }();
  return g;
}

// Paired physical axis split into (bra, ket) digits: j = ket + 3 * bra.
DTensor split_phys(const DTensor& site) {
  return site.reshaped({site.dim(0), 3, 3, site.dim(2)});  // (b, y, x, b')
}

// --- network transfers ------------------------------------------------
// Linear network Tr(drho L): environments carry (state bond, sld bond).

DTensor lin_left_update(const DTensor& e, const DTensor& dsite, const DTensor& msite) {
  DTensor t = DTensor::contract(e, {0}, split_phys(dsite), {0});  // (a, y, x, b')
  return DTensor::contract(t, {0, 1, 2}, msite, {0, 1, 2});       // (b', a')
}

DTensor lin_right_update(const DTensor& e, const DTensor& dsite, const DTensor& msite) {
  DTensor t = DTensor::contract(split_phys(dsite), {3}, e, {0});  // (b, y, x, a')
  return DTensor::contract(t, {1, 2, 3}, msite, {1, 2, 3});       // (b, a)
}

// Quadratic network Tr(rho L L): environments carry
// (state bond, layer-1 bond, layer-2 bond).

DTensor quad_left_update(const DTensor& e, const DTensor& rsite, const DTensor& msite) {
  DTensor t = DTensor::contract(e, {0}, split_phys(rsite), {0});  // (a, c, y, x, b')
  DTensor t2 = DTensor::contract(t, {0, 2}, msite, {0, 1});       // (c, x, b', z, a')
  return DTensor::contract(t2, {0, 3, 1}, msite, {0, 1, 2});      // (b', a', c')
}

DTensor quad_right_update(const DTensor& e, const DTensor& rsite, const DTensor& msite) {
  DTensor t = DTensor::contract(split_phys(rsite), {3}, e, {0});  // (b, y, x, a', c')
  DTensor t2 = DTensor::contract(t, {1, 3}, msite, {1, 3});       // (b, x, c', a, z)
  return DTensor::contract(t2, {4, 1, 2}, msite, {1, 2, 3});      // (b, a, c)
}

cd full_linear(const TensorTrain& drho, const Mpo& sld) {
  DTensor e = DTensor::ones({1, 1});
  for (int k = 0; k < drho.n(); ++k)
    e = lin_left_update(e, drho.sites[static_cast<std::size_t>(k)],
                        sld.sites[static_cast<std::size_t>(k)]);
  return e.data()[0];
}

cd full_quadratic(const TensorTrain& rho, const Mpo& sld) {
  DTensor e = DTensor::ones({1, 1, 1});
  for (int k = 0; k < rho.n(); ++k)
    e = quad_left_update(e, rho.sites[static_cast<std::size_t>(k)],
                         sld.sites[static_cast<std::size_t>(k)]);
  return e.data()[0];
}

// --- local problem -----------------------------------------------------

Eigen::VectorXd local_gradient(const DTensor& el, const DTensor& er, const DTensor& dsite) {
  DTensor t = DTensor::contract(el, {0}, split_phys(dsite), {0});  // (aL, y, x, br)
  DTensor t2 = DTensor::contract(t, {1, 2}, basis_tensor(), {1, 2});  // (aL, br, m)
  DTensor t3 = DTensor::contract(t2, {1}, er, {0});                // (aL, m, aR)
  t3 = t3.permuted({0, 2, 1});                                     // (aL, aR, m)
  Eigen::VectorXd b(t3.size());
  for (long p = 0; p < t3.size(); ++p) b(p) = t3.data()[p].real();
  return b;
}

Eigen::MatrixXd local_quadratic(const DTensor& el, const DTensor& er, const DTensor& rsite) {
  DTensor t = DTensor::contract(el, {0}, split_phys(rsite), {0});   // (aL, cL, y, x, br)
  DTensor t2 = DTensor::contract(t, {2}, basis_tensor(), {1});      // (aL, cL, x, br, m, z)
  DTensor t3 = DTensor::contract(t2, {5, 2}, basis_tensor(), {1, 2});  // (aL, cL, br, m, mm)
  DTensor t4 = DTensor::contract(t3, {2}, er, {0});                 // (aL, cL, m, mm, aR, cR)
  t4 = t4.permuted({0, 4, 2, 1, 5, 3});                             // (aL, aR, m, cL, cR, mm)
  const long p = t4.dim(0) * t4.dim(1) * t4.dim(2);
  Eigen::MatrixXd k(p, p);
  for (long r = 0; r < p; ++r)
    for (long c = 0; c < p; ++c) k(r, c) = t4.data()[r * p + c].real();
  return k;
}

DTensor block_from_coords(const Eigen::VectorXd& s, long al, long ar) {
  DTensor m({al, 3, 3, ar});
  const auto& basis = hermitian_basis();
  long p = 0;
  for (long a = 0; a < al; ++a)
    for (long b = 0; b < ar; ++b)
      for (long g = 0; g < 9; ++g, ++p)
        for (long y = 0; y < 3; ++y)
          for (long x = 0; x < 3; ++x)
            m({a, y, x, b}) += s(p) * basis[static_cast<std::size_t>(g)](y, x);
  return m;
}

// (aL, aR, m) flattening used by the local solver; the site tensor layout is
// (aL, y, x, aR), so coordinates are regrouped accordingly.
Eigen::VectorXd coords_from_block(const DTensor& m) {
  const long al = m.dim(0), ar = m.dim(3);
  Eigen::VectorXd s(al * ar * 9);
  const auto& basis = hermitian_basis();
  long p = 0;
  for (long a = 0; a < al; ++a)
    for (long b = 0; b < ar; ++b)
      for (long g = 0; g < 9; ++g, ++p) {
        cd acc(0.0, 0.0);
        for (long y = 0; y < 3; ++y)
          for (long x = 0; x < 3; ++x)
            acc += std::conj(basis[static_cast<std::size_t>(g)](y, x)) * m({a, y, x, b});
        s(p) = acc.real();
      }
  return s;
}

struct SweepState {
  Mpo sld;
  std::vector<DTensor> el1, er1, el2, er2;
};

void init_environments(SweepState& st, const TensorTrain& rho, const TensorTrain& drho) {
  const int nn = rho.n();
  st.el1.assign(static_cast<std::size_t>(nn) + 1, DTensor());
  st.er1.assign(static_cast<std::size_t>(nn) + 1, DTensor());
  st.el2.assign(static_cast<std::size_t>(nn) + 1, DTensor());
  st.er2.assign(static_cast<std::size_t>(nn) + 1, DTensor());
  st.el1[0] = DTensor::ones({1, 1});
  st.el2[0] = DTensor::ones({1, 1, 1});
  st.er1[static_cast<std::size_t>(nn)] = DTensor::ones({1, 1});
  st.er2[static_cast<std::size_t>(nn)] = DTensor::ones({1, 1, 1});
  for (int k = nn - 1; k >= 1; --k) {
    st.er1[static_cast<std::size_t>(k)] =
        lin_right_update(st.er1[static_cast<std::size_t>(k + 1)],
                         drho.sites[static_cast<std::size_t>(k)],
                         st.sld.sites[static_cast<std::size_t>(k)]);
    st.er2[static_cast<std::size_t>(k)] =
        quad_right_update(st.er2[static_cast<std::size_t>(k + 1)],
                          rho.sites[static_cast<std::size_t>(k)],
                          st.sld.sites[static_cast<std::size_t>(k)]);
  }
}

// Maximize at one site; returns the functional value at the new optimum.
double solve_site(SweepState& st, const TensorTrain& rho, const TensorTrain& drho, int l,
                  double ridge) {
  const std::size_t lu = static_cast<std::size_t>(l);
  const Eigen::VectorXd b =
      local_gradient(st.el1[lu], st.er1[lu + 1], drho.sites[lu]);
  Eigen::MatrixXd k = local_quadratic(st.el2[lu], st.er2[lu + 1], rho.sites[lu]);
  Eigen::MatrixXd a = 0.5 * (k + k.transpose());

  const double mean_diag = std::max(a.diagonal().mean(), 0.0) + 1e-300;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  auto usable = [&] {
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
    const auto d = ldlt.vectorD();
    const double dmax = d.maxCoeff(), dmin = d.minCoeff();
    return dmin > 0.0 && dmax / dmin <= 1e12;
  };
  bool ok = usable();
  // Near-pure states leave the quadratic form with a large null space; a
  // fixed shift is not always enough, so escalate before giving up on LDLT.
  double shift = ridge * mean_diag;
  for (int attempt = 0; !ok && attempt < 8; ++attempt, shift *= 100.0) {
    Eigen::MatrixXd as = a;
    as.diagonal().array() += shift;
    ldlt.compute(as);
    ok = usable();
  }
  Eigen::VectorXd s;
  if (ok) {
    s = ldlt.solve(b);
  } else {
    // Last resort: spectral pseudoinverse, the minimal-norm stationary point.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success) throw EngineError("qfi sweep: local solve failed");
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double floor = std::max(1e-12 * std::max(lam.maxCoeff(), 0.0), 1e-300);
    Eigen::VectorXd w = es.eigenvectors().transpose() * b;
    for (long i = 0; i < w.size(); ++i) w(i) = lam(i) > floor ? w(i) / lam(i) : 0.0;
    s = es.eigenvectors() * w;
  }

  const DTensor& old_site = st.sld.sites[lu];
  st.sld.sites[lu] = block_from_coords(s, old_site.dim(0), old_site.dim(3));
  // At the stationary point F = 2 b.s - s.A.s = b.s (+ ridge correction noise).
  return b.dot(s);
}

std::vector<long> sld_bond_profile(int n, long chi) {
  std::vector<long> bonds(static_cast<std::size_t>(n) + 1, 1);
  for (int k = 1; k < n; ++k) {
    long cap = 1;
    const int side = std::min(k, n - k);
    for (int i = 0; i < side && cap < chi; ++i) cap *= 9;
    bonds[static_cast<std::size_t>(k)] = std::min(chi, cap);
  }
  return bonds;
}

Mpo random_sld(int n, long chi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::vector<long> bonds = sld_bond_profile(n, chi);
  Mpo out;
  for (int k = 0; k < n; ++k) {
    const long al = bonds[static_cast<std::size_t>(k)];
    const long ar = bonds[static_cast<std::size_t>(k) + 1];
    Eigen::VectorXd s(al * ar * 9);
    for (long p = 0; p < s.size(); ++p) s(p) = normal(rng);
    DTensor site = block_from_coords(s, al, ar);
    // scale to unit spectral norm of the fused (al*out, in*ar) matrix
    Eigen::JacobiSVD<Matrix> svd(site.to_matrix(2));
    const double top = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    if (top > 0.0) site *= cd(1.0 / top, 0.0);
    out.sites.push_back(std::move(site));
  }
  return out;
}

struct CandidateOutcome {
  double value = -std::numeric_limits<double>::infinity();
  Mpo sld;
  bool converged = false;
  int sweeps = 0;
};

CandidateOutcome run_candidate(Mpo start, const TensorTrain& rho, const TensorTrain& drho,
                               const QfiOptions& opt, std::vector<double>* trace) {
  const int nn = rho.n();
  SweepState st;
  st.sld = std::move(start);
  init_environments(st, rho, drho);

  CandidateOutcome out;
  double prev = -std::numeric_limits<double>::infinity();
  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    double value = 0.0;
    for (int l = 0; l < nn; ++l) {
      value = solve_site(st, rho, drho, l, opt.ridge);
      if (trace) trace->push_back(value);
      if (l + 1 < nn) {
        st.el1[static_cast<std::size_t>(l) + 1] =
            lin_left_update(st.el1[static_cast<std::size_t>(l)],
                            drho.sites[static_cast<std::size_t>(l)],
                            st.sld.sites[static_cast<std::size_t>(l)]);
        st.el2[static_cast<std::size_t>(l) + 1] =
            quad_left_update(st.el2[static_cast<std::size_t>(l)],
                             rho.sites[static_cast<std::size_t>(l)],
                             st.sld.sites[static_cast<std::size_t>(l)]);
      }
    }
    for (int l = nn - 1; l >= 0; --l) {
      value = solve_site(st, rho, drho, l, opt.ridge);
      if (trace) trace->push_back(value);
      if (l > 0) {
        st.er1[static_cast<std::size_t>(l)] =
            lin_right_update(st.er1[static_cast<std::size_t>(l) + 1],
                             drho.sites[static_cast<std::size_t>(l)],
                             st.sld.sites[static_cast<std::size_t>(l)]);
        st.er2[static_cast<std::size_t>(l)] =
            quad_right_update(st.er2[static_cast<std::size_t>(l) + 1],
                              rho.sites[static_cast<std::size_t>(l)],
                              st.sld.sites[static_cast<std::size_t>(l)]);
      }
    }
    out.sweeps = sweep;
    if (!std::isfinite(value)) throw EngineError("qfi sweep: non-finite functional");
    if (std::abs(value - prev) <= opt.rel_tol * std::max(1.0, std::abs(value))) {
      out.converged = true;
      out.value = value;
      break;
    }
    prev = value;
    out.value = value;
  }
  out.sld = std::move(st.sld);
  return out;
}

}  // namespace

QfiResult qfi_local_sweep(const TensorTrain& rho, const TensorTrain& drho,
                          const QfiOptions& opt, const Mpo* warm_start,
                          std::vector<double>* functional_trace) {
  rho.check_consistent();
  drho.check_consistent();
  if (rho.n() != drho.n()) throw std::invalid_argument("qfi: length mismatch");
  for (int k = 0; k < rho.n(); ++k)
    if (rho.phys_dim(k) != 9 || drho.phys_dim(k) != 9)
      throw std::invalid_argument("qfi: states must be vectorized density matrices");
  if (std::abs(mpdo_trace(rho) - cd(1.0, 0.0)) > 1e-8)
    throw std::invalid_argument("qfi: rho must have unit trace");
  if (std::abs(mpdo_trace(drho)) > 1e-8)
    throw std::invalid_argument("qfi: drho must be traceless");

  QfiResult best;
  best.value = -std::numeric_limits<double>::infinity();
  auto consider = [&](const CandidateOutcome& c) {
    best.restart_values.push_back(c.value);
    if (c.value > best.value) {
      best.value = c.value;
      best.sld = c.sld;
      best.converged = c.converged;
      best.sweeps = c.sweeps;
    }
  };

  long chi = opt.chi_sld;
  if (chi <= 0) chi = std::min<long>(64, 2 * std::max<long>(1, rho.max_bond_dim()));

  if (warm_start) consider(run_candidate(*warm_start, rho, drho, opt, functional_trace));
  for (int r = 0; r < opt.restarts; ++r) {
    Mpo start = random_sld(rho.n(), chi, derive_seed(opt.seed, 0x51d0ull, static_cast<std::uint64_t>(r)));
    consider(run_candidate(std::move(start), rho, drho, opt, functional_trace));
  }
  return best;
}

double qfi_functional(const TensorTrain& rho, const TensorTrain& drho, const Mpo& sld) {
  return 2.0 * full_linear(drho, sld).real() - full_quadratic(rho, sld).real();
}

double qfi_exact(const Matrix& rho, const Matrix& drho, Matrix* sld_out, double cutoff) {
  const Matrix rh = 0.5 * (rho + rho.adjoint());
  const Matrix dh = 0.5 * (drho + drho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(rh);
  const Eigen::VectorXd lam = es.eigenvalues();
  const Matrix& u = es.eigenvectors();
  const Matrix dmat = u.adjoint() * dh * u;

  const long d = rho.rows();
  double f = 0.0;
  Matrix l = Matrix::Zero(d, d);
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j) {
      const double denom = lam(i) + lam(j);
      if (denom <= cutoff) continue;
      f += 2.0 * std::norm(dmat(i, j)) / denom;
      l(i, j) = 2.0 * dmat(i, j) / denom;
    }
  if (sld_out) *sld_out = u * l * u.adjoint();
  return f;
}

std::pair<TensorTrain, TensorTrain> derivative_mpdo(const ModelSpec& m,
                                                    const EngineOptions& engine, double dt,
                                                    int n_steps,
                                                    const DerivativeOptions& dopt,
                                                    const InitialState& init) {
  if (engine.kind == EngineKind::DenseReference)
    throw std::invalid_argument("derivative_mpdo: needs a tensor-network engine");
  const double delta = dopt.delta;
  if (!(delta > 0.0)) throw std::invalid_argument("derivative_mpdo: delta must be positive");

  TrajectoryRunner minus(with_zeeman_shift(m, -0.5 * delta), engine, dt, init);
  TrajectoryRunner center(m, engine, dt, init);
  TrajectoryRunner plus(with_zeeman_shift(m, 0.5 * delta), engine, dt, init);
  for (int k = 0; k < n_steps; ++k) {
    minus.advance();
    center.advance();
    plus.advance();
  }
  TensorTrain drho = train_add(plus.state(), cd(1.0 / delta, 0.0), minus.state(),
                               cd(-1.0 / delta, 0.0));
  train_compress(drho, 0, 1e-13);
  return {center.state(), std::move(drho)};
}

QfiSeries qfi_dynamics(const ModelSpec& m, const QfiDynamicsOptions& opt) {
  if (opt.engine.kind == EngineKind::DenseReference)
    throw std::invalid_argument("qfi_dynamics: needs a tensor-network engine");
  if (opt.cadence < 1) throw std::invalid_argument("qfi_dynamics: cadence must be >= 1");
  const double delta = opt.derivative.delta;

  TrajectoryRunner minus(with_zeeman_shift(m, -0.5 * delta), opt.engine, opt.dt, opt.init);
  TrajectoryRunner center(m, opt.engine, opt.dt, opt.init);
  TrajectoryRunner plus(with_zeeman_shift(m, 0.5 * delta), opt.engine, opt.dt, opt.init);

  QfiSeries out;
  out.points.push_back({0.0, 0.0, 0.0, true, 0});

  Mpo warm;
  bool have_warm = false;
  for (int k = 1; k <= opt.n_steps; ++k) {
    minus.advance();
    center.advance();
    plus.advance();
    if (k % opt.cadence != 0) continue;

    TensorTrain drho = train_add(plus.state(), cd(1.0 / delta, 0.0), minus.state(),
                                 cd(-1.0 / delta, 0.0));
    train_compress(drho, 0, 1e-13);
    QfiResult res = qfi_local_sweep(center.state(), drho, opt.qfi,
                                    have_warm ? &warm : nullptr);
    const double t = center.time();
    if (!std::isfinite(res.value)) throw EngineError("qfi_dynamics: non-finite value");
    out.points.push_back({t, res.value, res.value / (t * t), res.converged, res.sweeps});
    warm = std::move(res.sld);
    have_warm = true;
  }

  const int w = std::max(1, opt.smoothing_window);
  out.f_phase_smooth.resize(out.points.size());
  for (std::size_t k = 0; k < out.points.size(); ++k) {
    const std::size_t lo = k + 1 >= static_cast<std::size_t>(w) ? k + 1 - static_cast<std::size_t>(w) : 0;
    double acc = 0.0;
    for (std::size_t i = lo; i <= k; ++i) acc += out.points[i].f_phase;
    out.f_phase_smooth[k] = acc / static_cast<double>(k - lo + 1);
  }
  return out;
}

}  // namespace nvt
