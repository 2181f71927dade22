#include "nvtensor/tdvp.hpp"

#include <stdexcept>

namespace nvt {

namespace {

// Environment tensors are (bra bond, mpo bond, ket bond).

DTensor left_env_update(const DTensor& le, const DTensor& a, const DTensor& w) {
  DTensor t1 = DTensor::contract(le, {2}, a, {0});           // (lb, wb, p, rk)
  DTensor t2 = DTensor::contract(t1, {1, 2}, w, {0, 2});     // (lb, rk, po, wr)
  DTensor t3 = DTensor::contract(a.conjugated(), {0, 1}, t2, {0, 2});  // (rb, rk, wr)
  return t3.permuted({0, 2, 1});
}

DTensor right_env_update(const DTensor& re, const DTensor& a, const DTensor& w) {
  DTensor t1 = DTensor::contract(a, {2}, re, {2});           // (l, p, rb, wb)
  DTensor t2 = DTensor::contract(t1, {1, 3}, w, {2, 3});     // (l, rb, wl, po)
  DTensor t3 = DTensor::contract(a.conjugated(), {1, 2}, t2, {3, 1});  // (lb, l, wl)
  return t3.permuted({0, 2, 1});
}

DTensor apply_two_site(const DTensor& le, const DTensor& w1, const DTensor& w2,
                       const DTensor& re, const DTensor& theta) {
  DTensor x = DTensor::contract(le, {2}, theta, {0});     // (lb, w0, p1, p2, r)
  x = DTensor::contract(x, {1, 2}, w1, {0, 2});           // (lb, p2, r, o1, w1)
  x = DTensor::contract(x, {4, 1}, w2, {0, 2});           // (lb, r, o1, o2, w2)
  x = DTensor::contract(x, {4, 1}, re, {1, 2});           // (lb, o1, o2, rb)
  return x;
}

DTensor apply_one_site(const DTensor& le, const DTensor& w, const DTensor& re,
                       const DTensor& c) {
  DTensor x = DTensor::contract(le, {2}, c, {0});         // (lb, w0, p, r)
  x = DTensor::contract(x, {1, 2}, w, {0, 2});            // (lb, r, o, w1)
  x = DTensor::contract(x, {3, 1}, re, {1, 2});           // (lb, o, rb)
  return x;
}

DTensor krylov_evolve(const DTensor& theta,
                      const std::function<DTensor(const DTensor&)>& op, cd tau,
                      const KrylovOptions& kopt, int& kdim_max) {
  const std::vector<long> dims = theta.dims();
  auto wrap = [&](const Vector& x) {
    DTensor t(dims);
    Eigen::Map<Vector>(t.data(), t.size()) = x;
    return op(t).to_vector();
  };
  KrylovInfo info;
  Vector out = krylov_expv(wrap, theta.to_vector(), tau, kopt, &info);
  kdim_max = std::max(kdim_max, info.dim_used);
  DTensor t(dims);
  Eigen::Map<Vector>(t.data(), t.size()) = out;
  return t;
}

}  // namespace

TdvpEngine::TdvpEngine(Mpo generator, TdvpOptions opt) : w_(std::move(generator)), opt_(opt) {
  w_.check_consistent();
}

StepDiagnostics TdvpEngine::step(TensorTrain& state, double dt) const {
  state.check_consistent();
  const int nn = state.n();
  if (w_.n() != nn) throw std::invalid_argument("TdvpEngine: length mismatch");
  StepDiagnostics diag;

  if (state.center != 0) canonicalize(state, 0);

  if (nn == 1) {
    const DTensor le = DTensor::ones({1, 1, 1});
    const DTensor re = DTensor::ones({1, 1, 1});
    auto op = [&](const DTensor& t) { return apply_one_site(le, w_.sites[0], re, t); };
    state.sites[0] = krylov_evolve(state.sites[0], op, cd(dt, 0.0), opt_.krylov,
                                   diag.krylov_dim_max);
    return diag;
  }

  auto site = [&](int k) -> DTensor& { return state.sites[static_cast<std::size_t>(k)]; };
  auto wsite = [&](int k) -> const DTensor& { return w_.sites[static_cast<std::size_t>(k)]; };

  std::vector<DTensor> le(static_cast<std::size_t>(nn) + 1);
  std::vector<DTensor> re(static_cast<std::size_t>(nn) + 1);
  le[0] = DTensor::ones({1, 1, 1});
  re[static_cast<std::size_t>(nn)] = DTensor::ones({1, 1, 1});
  // re[k] spans sites [k, n); needed down to re[2] on the forward sweep
  for (int k = nn - 1; k >= 1; --k)
    re[static_cast<std::size_t>(k)] =
        right_env_update(re[static_cast<std::size_t>(k + 1)], site(k), wsite(k));

  const cd half(0.5 * dt, 0.0);

  auto split_theta = [&](DTensor& theta, bool sv_right) {
    SvdSplitResult s = svd_split(theta, 2, opt_.chi_max, opt_.rel_floor);
    diag.trunc.absorb(s.report);
    if (sv_right) {
      for (long r = 0; r < s.vh.dim(0); ++r) {
        const cd sc(s.s(r), 0.0);
        for (long b = 0; b < s.vh.dim(1); ++b)
          for (long c = 0; c < s.vh.dim(2); ++c) s.vh({r, b, c}) *= sc;
      }
    } else {
      for (long a = 0; a < s.u.dim(0); ++a)
        for (long b = 0; b < s.u.dim(1); ++b)
          for (long r = 0; r < s.u.dim(2); ++r) s.u({a, b, r}) *= cd(s.s(r), 0.0);
    }
    return s;
  };

  // forward half-sweep
  for (int i = 0; i <= nn - 2; ++i) {
    DTensor theta = DTensor::contract(site(i), {2}, site(i + 1), {0});
    auto op2 = [&](const DTensor& t) {
      return apply_two_site(le[static_cast<std::size_t>(i)], wsite(i), wsite(i + 1),
                            re[static_cast<std::size_t>(i + 2)], t);
    };
    theta = krylov_evolve(theta, op2, half, opt_.krylov, diag.krylov_dim_max);
    SvdSplitResult s = split_theta(theta, true);
    site(i) = std::move(s.u);
    le[static_cast<std::size_t>(i + 1)] =
        left_env_update(le[static_cast<std::size_t>(i)], site(i), wsite(i));
    if (i < nn - 2) {
      auto op1 = [&](const DTensor& t) {
        return apply_one_site(le[static_cast<std::size_t>(i + 1)], wsite(i + 1),
                              re[static_cast<std::size_t>(i + 2)], t);
      };
      site(i + 1) = krylov_evolve(s.vh, op1, -half, opt_.krylov, diag.krylov_dim_max);
    } else {
      site(i + 1) = std::move(s.vh);
    }
    state.center = i + 1;
  }

  // backward half-sweep
  for (int i = nn - 2; i >= 0; --i) {
    DTensor theta = DTensor::contract(site(i), {2}, site(i + 1), {0});
    auto op2 = [&](const DTensor& t) {
      return apply_two_site(le[static_cast<std::size_t>(i)], wsite(i), wsite(i + 1),
                            re[static_cast<std::size_t>(i + 2)], t);
    };
    theta = krylov_evolve(theta, op2, half, opt_.krylov, diag.krylov_dim_max);
    SvdSplitResult s = split_theta(theta, false);
    site(i + 1) = std::move(s.vh);
    re[static_cast<std::size_t>(i + 1)] =
        right_env_update(re[static_cast<std::size_t>(i + 2)], site(i + 1), wsite(i + 1));
    if (i > 0) {
      auto op1 = [&](const DTensor& t) {
        return apply_one_site(le[static_cast<std::size_t>(i)], wsite(i),
                              re[static_cast<std::size_t>(i + 1)], t);
      };
      site(i) = krylov_evolve(s.u, op1, -half, opt_.krylov, diag.krylov_dim_max);
    } else {
      site(i) = std::move(s.u);
    }
    state.center = i;
  }

  if (!state.sites[0].all_finite())
    throw EngineError("tdvp: non-finite state after step");
  return diag;
}

StepDiagnostics tdvp_step(TensorTrain& state, const Mpo& generator, double dt,
                          const TdvpOptions& opt) {
  TdvpEngine engine(generator, opt);
  return engine.step(state, dt);
}

}  // namespace nvt
