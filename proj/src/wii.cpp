#include "nvtensor/wii.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace nvt {

namespace {

// Blocks of one site of the triangular generator MPO, layout
// [start, channels..., done] on interior bonds.
struct SiteBlocks {
  Matrix d;                         // start -> done
  std::vector<Matrix> c;            // start -> channel (openings)
  std::vector<Matrix> b;            // channel -> done (closings)
  std::vector<std::vector<Matrix>> a;  // channel -> channel (pass-through)
};

SiteBlocks extract_blocks(const DTensor& w, bool left_boundary, bool right_boundary) {
  const long wl = w.dim(0), d = w.dim(1), wr = w.dim(3);
  const long ml = left_boundary ? 0 : wl - 2;
  const long mr = right_boundary ? 0 : wr - 2;
  const long done_r = right_boundary ? 0 : wr - 1;

  SiteBlocks out;
  auto grab = [&](long row, long col) {
    Matrix m(d, d);
    for (long p = 0; p < d; ++p)
      for (long q = 0; q < d; ++q) m(p, q) = w({row, p, q, col});
    return m;
  };
  out.d = grab(0, done_r);
  for (long bcol = 0; bcol < mr; ++bcol) out.c.push_back(grab(0, 1 + bcol));
  for (long arow = 0; arow < ml; ++arow) out.b.push_back(grab(1 + arow, done_r));
  out.a.resize(static_cast<std::size_t>(ml));
  for (long arow = 0; arow < ml; ++arow)
    for (long bcol = 0; bcol < mr; ++bcol)
      out.a[static_cast<std::size_t>(arow)].push_back(grab(1 + arow, 1 + bcol));
  return out;
}

// exp on (physical x auxiliary) with the auxiliary flow encoded as
// lower-triangular creation blocks; returns the (to, from) physical block.
Matrix aux_exp_block(const std::vector<std::vector<Matrix>>& blocks, long d, long naux,
                     long to, long from) {
  Matrix e = Matrix::Zero(naux * d, naux * d);
  for (long r = 0; r < naux; ++r)
    for (long c = 0; c < naux; ++c)
      if (blocks[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].size() > 0)
        e.block(r * d, c * d, d, d) = blocks[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  const Matrix f = e.exp();
  return f.block(to * d, from * d, d, d);
}

}  // namespace

Mpo wii_propagator(const Mpo& gen, cd tau) {
  gen.check_consistent();
  const int nn = gen.n();
  const cd root = std::sqrt(tau);

  Mpo out;
  for (int k = 0; k < nn; ++k) {
    const DTensor& w = gen.sites[static_cast<std::size_t>(k)];
    if (!w.all_finite()) throw EngineError("wii_propagator: non-finite generator");
    const bool lb = (k == 0), rb = (k == nn - 1);
    const long d = w.dim(1);
    const SiteBlocks blk = extract_blocks(w, lb, rb);
    const long ml = static_cast<long>(blk.b.size());
    const long mr = static_cast<long>(blk.c.size());
    const Matrix none;  // empty marks an absent block
    const Matrix taud = tau * blk.d;

    DTensor site({1 + ml, d, d, 1 + mr});
    auto put = [&](long row, long col, const Matrix& m) {
      for (long p = 0; p < d; ++p)
        for (long q = 0; q < d; ++q) site({row, p, q, col}) = m(p, q);
    };

    // vacuum -> vacuum: exact on-site propagator
    put(0, 0, taud.exp());

    // closing channels: two-state auxiliary {vacuum, left-excited}
    for (long a = 0; a < ml; ++a) {
      std::vector<std::vector<Matrix>> g = {{taud, none}, {root * blk.b[static_cast<std::size_t>(a)], taud}};
      put(1 + a, 0, aux_exp_block(g, d, 2, 1, 0));
    }
    // opening channels
    for (long b = 0; b < mr; ++b) {
      std::vector<std::vector<Matrix>> g = {{taud, none}, {root * blk.c[static_cast<std::size_t>(b)], taud}};
      put(0, 1 + b, aux_exp_block(g, d, 2, 1, 0));
    }
    // both: four-state auxiliary {vac, right, left, both}; pass-through
    // blocks enter unscaled so open strings cross the site at order one.
    for (long a = 0; a < ml; ++a)
      for (long b = 0; b < mr; ++b) {
        const Matrix& sb = blk.b[static_cast<std::size_t>(a)];
        const Matrix& sc = blk.c[static_cast<std::size_t>(b)];
        const Matrix& sa = blk.a[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        std::vector<std::vector<Matrix>> g = {
            {taud, none, none, none},
            {root * sc, taud, none, none},
            {root * sb, none, taud, none},
            {sa, root * sb, root * sc, taud}};
        put(1 + a, 1 + b, aux_exp_block(g, d, 4, 3, 0));
      }
    if (!site.all_finite()) throw EngineError("wii_propagator: non-finite site block");
    out.sites.push_back(std::move(site));
  }
  out.check_consistent();
  return out;
}

WiiPropagator::WiiPropagator(const ModelSpec& m, double dt, const WiiOptions& opt)
    : opt_(opt) {
  const SuperOpTermList terms = build_superop_terms(m);
  build(triangular_mpo_from_terms(terms, m.n(), 9), dt);
}

WiiPropagator::WiiPropagator(const Mpo& gen, double dt, const WiiOptions& opt) : opt_(opt) {
  build(gen, dt);
}

void WiiPropagator::build(const Mpo& gen, double dt) {
  if (opt_.complex_substeps) {
    const cd half_minus(0.5 * dt, -0.5 * dt);
    const cd half_plus(0.5 * dt, 0.5 * dt);
    factors_.push_back(wii_propagator(gen, half_minus));
    factors_.push_back(wii_propagator(gen, half_plus));
  } else {
    factors_.push_back(wii_propagator(gen, cd(dt, 0.0)));
  }
}

StepDiagnostics WiiPropagator::step(TensorTrain& state) const {
  StepDiagnostics diag;
  for (const Mpo& f : factors_)
    diag.trunc.absorb(apply_mpo(f, state, opt_.chi_max, opt_.rel_floor));
  const cd tr = mpdo_trace(state);
  diag.trace_drift = std::abs(tr - cd(1.0, 0.0));
  if (!(std::abs(tr) > 0.0)) throw EngineError("wii step: state lost its trace");
  mpdo_renormalize(state);
  return diag;
}

StepDiagnostics wii_step(TensorTrain& state, const ModelSpec& m, double dt,
                         const WiiOptions& opt) {
  WiiPropagator prop(m, dt, opt);
  return prop.step(state);
}

}  // namespace nvt
