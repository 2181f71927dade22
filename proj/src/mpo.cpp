#include "nvtensor/mpo.hpp"

#include <algorithm>
#include <stdexcept>

namespace nvt {

long Mpo::max_bond_dim() const {
  long m = 1;
  for (const auto& s : sites) m = std::max({m, s.dim(0), s.dim(3)});
  return m;
}

void Mpo::check_consistent() const {
  if (sites.empty()) throw std::invalid_argument("Mpo: empty");
  if (sites.front().dim(0) != 1 || sites.back().dim(3) != 1)
    throw std::invalid_argument("Mpo: boundary bonds must have dimension 1");
  for (int k = 0; k + 1 < n(); ++k)
    if (sites[static_cast<std::size_t>(k)].dim(3) != sites[static_cast<std::size_t>(k + 1)].dim(0))
      throw std::invalid_argument("Mpo: bond mismatch");
  for (const auto& s : sites)
    if (s.dim(1) != s.dim(2)) throw std::invalid_argument("Mpo: physical dims must match");
}

Mpo mpo_identity(int n, long d) {
  Mpo op;
  for (int k = 0; k < n; ++k) {
    DTensor w({1, d, d, 1});
    for (long p = 0; p < d; ++p) w({0, p, p, 0}) = 1.0;
    op.sites.push_back(std::move(w));
  }
  return op;
}

namespace {

// Channel factors of one pair term: op = sum_c X_c (site i) x Y_c (site j).
struct PairChannels {
  std::vector<Matrix> x, y;
};

PairChannels factor_pair_term(const Matrix& op, long d) {
  if (op.rows() != d * d || op.cols() != d * d)
    throw std::invalid_argument("mpo terms: pair term dimension mismatch");
  DTensor t = DTensor::from_matrix(op);
  t.reshape({d, d, d, d});               // (oi, oj, ii, ij)
  t = t.permuted({0, 2, 1, 3});          // (oi, ii, oj, ij)
  SvdSplitResult split = svd_split(t, 2, 0, 1e-14);
  PairChannels ch;
  const long m = split.s.size();
  for (long c = 0; c < m; ++c) {
    Matrix x(d, d), y(d, d);
    for (long a = 0; a < d; ++a)
      for (long b = 0; b < d; ++b) {
        x(a, b) = split.u({a, b, c}) * split.s(c);
        y(a, b) = split.vh({c, a, b});
      }
    ch.x.push_back(std::move(x));
    ch.y.push_back(std::move(y));
  }
  return ch;
}

}  // namespace

Mpo triangular_mpo_from_terms(const LocalTermList& terms, int n, long d) {
  if (n < 1) throw std::invalid_argument("mpo terms: need at least one site");

  std::vector<Matrix> single(static_cast<std::size_t>(n), Matrix::Zero(d, d));
  struct PairEntry {
    int i, j;
    PairChannels ch;
  };
  std::vector<PairEntry> pairs;

  for (const auto& term : terms) {
    if (term.sites.size() == 1) {
      const int s = term.sites[0];
      if (s < 0 || s >= n) throw std::invalid_argument("mpo terms: site out of range");
      if (term.op.rows() != d || term.op.cols() != d)
        throw std::invalid_argument("mpo terms: single-site dimension mismatch");
      single[static_cast<std::size_t>(s)] += term.op;
    } else if (term.sites.size() == 2) {
      const int i = term.sites[0], j = term.sites[1];
      if (i < 0 || j <= i || j >= n) throw std::invalid_argument("mpo terms: bad pair support");
      pairs.push_back({i, j, factor_pair_term(term.op, d)});
    } else {
      throw std::invalid_argument("mpo terms: only 1- and 2-site terms supported");
    }
  }

  // Channel slots crossing bond b (between sites b-1 and b): one block per
  // pair with i < b <= j - 1... i.e. i <= b-1 and j >= b.
  auto channels_at = [&](int b) {
    std::vector<std::pair<int, int>> out;  // (pair index, channel)
    if (b <= 0 || b >= n) return out;
    for (int p = 0; p < static_cast<int>(pairs.size()); ++p)
      if (pairs[static_cast<std::size_t>(p)].i <= b - 1 && pairs[static_cast<std::size_t>(p)].j >= b)
        for (int c = 0; c < static_cast<int>(pairs[static_cast<std::size_t>(p)].ch.x.size()); ++c)
          out.push_back({p, c});
    return out;
  };

  Mpo op;
  for (int k = 0; k < n; ++k) {
    const auto chl = channels_at(k);
    const auto chr = channels_at(k + 1);
    const bool left_boundary = (k == 0);
    const bool right_boundary = (k == n - 1);
    const long wl = left_boundary ? 1 : static_cast<long>(chl.size()) + 2;
    const long wr = right_boundary ? 1 : static_cast<long>(chr.size()) + 2;
    // index helpers for the layout [start, channels..., done]
    const long start_l = 0;
    const long done_l = left_boundary ? 0 : wl - 1;
    const long start_r = 0;
    const long done_r = right_boundary ? 0 : wr - 1;

    DTensor w({wl, d, d, wr});
    auto put = [&](long a, long b, const Matrix& m) {
      for (long po = 0; po < d; ++po)
        for (long pi = 0; pi < d; ++pi) w({a, po, pi, b}) += m(po, pi);
    };
    const Matrix id = Matrix::Identity(d, d);

    if (!right_boundary) put(start_l, start_r, id);  // nothing started yet
    if (!left_boundary) put(done_l, done_r, id);     // term already finished
    put(start_l, done_r, single[static_cast<std::size_t>(k)]);

    for (std::size_t slot = 0; slot < chr.size(); ++slot) {
      const auto [p, c] = chr[slot];
      const auto& pe = pairs[static_cast<std::size_t>(p)];
      if (pe.i == k) put(start_l, 1 + static_cast<long>(slot), pe.ch.x[static_cast<std::size_t>(c)]);
    }
    for (std::size_t slot = 0; slot < chl.size(); ++slot) {
      const auto [p, c] = chl[slot];
      const auto& pe = pairs[static_cast<std::size_t>(p)];
      if (pe.j == k) {
        put(1 + static_cast<long>(slot), done_r, pe.ch.y[static_cast<std::size_t>(c)]);
      } else {
        // still open: find the matching slot on the right bond
        for (std::size_t rs = 0; rs < chr.size(); ++rs)
          if (chr[rs] == chl[slot]) {
            put(1 + static_cast<long>(slot), 1 + static_cast<long>(rs), id);
            break;
          }
      }
    }
    op.sites.push_back(std::move(w));
  }
  op.check_consistent();
  return op;
}

Mpo mpo_from_terms(const LocalTermList& terms, int n, long d, double rel_floor) {
  Mpo op = triangular_mpo_from_terms(terms, n, d);
  mpo_compress(op, 0, rel_floor);
  return op;
}

TruncationReport mpo_compress(Mpo& op, long chi_max, double rel_floor) {
  op.check_consistent();
  TensorTrain t;
  std::vector<long> phys;
  for (auto& s : op.sites) {
    phys.push_back(s.dim(1));
    const long wl = s.dim(0), po = s.dim(1), pi = s.dim(2), wr = s.dim(3);
    t.sites.push_back(s.reshaped({wl, po * pi, wr}));
  }
  TruncationReport rep = train_compress(t, chi_max, rel_floor);
  for (int k = 0; k < op.n(); ++k) {
    DTensor s = std::move(t.sites[static_cast<std::size_t>(k)]);
    const long wl = s.dim(0), wr = s.dim(2), p = phys[static_cast<std::size_t>(k)];
    s.reshape({wl, p, p, wr});
    op.sites[static_cast<std::size_t>(k)] = std::move(s);
  }
  return rep;
}

TruncationReport apply_mpo(const Mpo& op, TensorTrain& t, long chi_max, double rel_floor) {
  op.check_consistent();
  t.check_consistent();
  if (op.n() != t.n()) throw std::invalid_argument("apply_mpo: length mismatch");
  const int nn = t.n();
  // Zip headroom: truncating mid-zip is not gauge-exact, so allow a wider
  // bond during the sweep and do the tight cut in the final exact pass.
  const long chi_zip = chi_max > 0 ? chi_max + std::max<long>(chi_max / 2, 8) : 0;
  const double floor_zip = rel_floor * 0.1;

  TruncationReport total;
  DTensor m = DTensor::ones({1, 1, 1});  // (new bond, mpo bond, state bond)
  for (int k = 0; k < nn; ++k) {
    const DTensor& a = t.sites[static_cast<std::size_t>(k)];
    const DTensor& w = op.sites[static_cast<std::size_t>(k)];
    if (w.dim(2) != a.dim(1)) throw std::invalid_argument("apply_mpo: physical mismatch");
    DTensor t1 = DTensor::contract(m, {2}, a, {0});        // (c, wb, pi, r)
    DTensor t2 = DTensor::contract(t1, {1, 2}, w, {0, 2}); // (c, r, po, wr)
    t2 = t2.permuted({0, 2, 3, 1});                        // (c, po, wr, r)
    if (k < nn - 1) {
      SvdSplitResult split = svd_split(t2, 2, chi_zip, floor_zip);
      total.absorb(split.report);
      t.sites[static_cast<std::size_t>(k)] = std::move(split.u);
      for (long row = 0; row < split.vh.dim(0); ++row) {
        const cd sc(split.s(row), 0.0);
        for (long c2 = 0; c2 < split.vh.dim(1); ++c2)
          for (long c3 = 0; c3 < split.vh.dim(2); ++c3) split.vh({row, c2, c3}) *= sc;
      }
      m = std::move(split.vh);  // (c', wr, r)
    } else {
      t2.reshape({t2.dim(0), t2.dim(1), 1});
      t.sites[static_cast<std::size_t>(k)] = std::move(t2);
    }
  }
  t.center = -1;
  total.absorb(train_compress(t, chi_max, rel_floor));
  return total;
}

Matrix mpo_to_dense(const Mpo& op) {
  op.check_consistent();
  DTensor acc = op.sites[0].permuted({3, 1, 2, 0});
  acc.reshape({acc.dim(0), acc.dim(1), acc.dim(2)});  // (w, Do, Di); left bond 1 dropped
  long dout = acc.dim(1);
  for (int k = 1; k < op.n(); ++k) {
    const DTensor& w = op.sites[static_cast<std::size_t>(k)];
    DTensor nxt = DTensor::contract(acc, {0}, w, {0});  // (Do, Di, do, di, wr)
    nxt = nxt.permuted({4, 0, 2, 1, 3});                // (wr, Do, do, Di, di)
    dout *= w.dim(1);
    nxt.reshape({w.dim(3), dout, dout});
    acc = std::move(nxt);
  }
  acc.reshape({dout, dout});
  return acc.to_matrix(1);
}

}  // namespace nvt
