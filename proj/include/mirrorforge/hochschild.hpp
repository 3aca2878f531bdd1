#pragma once

#include <array>
#include <functional>

#include "mirrorforge/bimodule.hpp"

namespace mforge {

struct TruncationOverflow : std::runtime_error {
  explicit TruncationOverflow(const std::string& what)
      : std::runtime_error("length truncation would lose terms: " + what) {}
};

namespace detail {

/// Largest arity that can carry a nonzero category operation (units force 2).
inline int effective_arity(const AInfCategory& C) {
  int k = 2;
  for (const auto& [t, out] : C.mk)
    if (!out.empty()) k = std::max(k, static_cast<int>(t.size()));
  return k;
}

inline int effective_mu_arity(const Bimodule& M) {
  int k = 1;
  for (const auto& [key, out] : M.mu)
    if (!out.empty())
      k = std::max(k, static_cast<int>(key.vs.size() + key.ws.size()) + 1);
  return k;
}

inline NovScalar combo_scalar(const MPoly& p) {
  if (p.is_zero()) return NovScalar();
  if (!p.is_constant()) throw CoefficientNotField();
  return p.constant_term();
}

}  // namespace detail

/// Length-truncated Hochschild cochain on a category C with values in a
/// C-C-bimodule M.  Component of length 0 is an element of M(X, X) per object;
/// components of length k >= 1 are stored on composable basis tuples.  `sdeg`
/// is the shifted parity: every stored value satisfies
///   parity_M(output) = sdeg + sum of shifted input parities  (mod 2).
struct HochschildCochain {
  const AInfCategory* C = nullptr;
  const Bimodule* M = nullptr;
  int ell_max = 6;
  int sdeg = 0;
  std::map<int, Combo> c0;      // object -> value in M(X, X)
  std::map<Tuple, Combo> ck;    // length >= 1

  int deg() const { return (sdeg + 1) & 1; }
  int max_len() const {
    int m = c0.empty() ? -1 : 0;
    for (const auto& [t, c] : ck)
      if (!c.empty()) m = std::max(m, static_cast<int>(t.size()));
    return m;
  }
  bool is_zero() const {
    for (const auto& [o, c] : c0)
      if (!c.empty()) return false;
    for (const auto& [t, c] : ck)
      if (!c.empty()) return false;
    return true;
  }

  Combo eval_basis(const Tuple& t, int obj_if_empty) const {
    if (t.empty()) {
      auto it = c0.find(obj_if_empty);
      return it == c0.end() ? Combo{} : it->second;
    }
    auto it = ck.find(t);
    return it == ck.end() ? Combo{} : it->second;
  }

  /// Multilinear extension.  `obj` names the object when xs is empty.
  BElem apply(const std::vector<Elem>& xs, int obj) const {
    int v0 = xs.empty() ? obj : xs.front().a;
    int wN = xs.empty() ? obj : xs.back().b;
    BElem out = M->zero_elem(v0, wN);
    const RingCtx& R = M->ring();
    Tuple t(xs.size());
    std::function<void(std::size_t, MPoly)> rec = [&](std::size_t pos, MPoly factor) {
      if (pos == xs.size()) {
        combo_add(out.c, eval_basis(t, obj), factor, R);
        return;
      }
      for (const auto& [i, c] : xs[pos].c) {
        t[pos] = {xs[pos].a, xs[pos].b, i};
        rec(pos + 1, R.mul(factor, c));
      }
    };
    rec(0, R.one());
    return out;
  }

  void add0(int obj, int idx, const MPoly& coeff) { combo_add(c0[obj], idx, coeff); }
  void addk(const Tuple& t, int idx, const MPoly& coeff) { combo_add(ck[t], idx, coeff); }

  void prune() {
    for (auto it = c0.begin(); it != c0.end();)
      it = it->second.empty() ? c0.erase(it) : std::next(it);
    for (auto it = ck.begin(); it != ck.end();)
      it = it->second.empty() ? ck.erase(it) : std::next(it);
  }
};

inline HochschildCochain zero_cochain(const AInfCategory& C, const Bimodule& M, int ell_max,
                                      int sdeg) {
  HochschildCochain phi;
  phi.C = &C;
  phi.M = &M;
  phi.ell_max = ell_max;
  phi.sdeg = sdeg & 1;
  return phi;
}

inline void cochain_axpy(HochschildCochain& dst, const HochschildCochain& src, const MPoly& f) {
  const RingCtx& R = dst.M->ring();
  for (const auto& [o, c] : src.c0) combo_add(dst.c0[o], c, f, R);
  for (const auto& [t, c] : src.ck) combo_add(dst.ck[t], c, f, R);
  dst.prune();
}

inline bool cochain_equal(const HochschildCochain& a, const HochschildCochain& b) {
  HochschildCochain x = a, y = b;
  x.prune();
  y.prune();
  return x.c0 == y.c0 && x.ck == y.ck;
}

/// Coefficient bimodule produced by diagonal(C): same spaces as the homs, so a
/// module value can be re-read as a category element with the same indices.
inline bool has_diagonal_coefficients(const HochschildCochain& phi) {
  const Bimodule& M = *phi.M;
  if (M.left != phi.C || M.right != phi.C) return false;
  for (const auto& [key, basis] : M.spaces)
    if (phi.C->hom(key.first, key.second).size() != basis.size()) return false;
  return true;
}

inline Elem as_category_elem(const BElem& b) {
  Elem e;
  e.a = b.v;
  e.b = b.w;
  e.c = b.c;
  return e;
}

namespace detail {

/// Truncated Hochschild differential, projecting output lengths above
/// phi.ell_max away.  The public wrapper adds the no-loss window check.
inline HochschildCochain bstar_truncated(const HochschildCochain& phi) {
  const AInfCategory& C = *phi.C;
  const Bimodule& M = *phi.M;
  const RingCtx& R = M.ring();
  HochschildCochain out = zero_cochain(C, M, phi.ell_max, phi.sdeg + 1);

  auto accumulate = [&](int k, const Tuple& xs, int obj) {
    auto x_elems = [&](int from, int to) {
      std::vector<Elem> v;
      for (int j = from; j < to; ++j) v.push_back(C.basis_elem(xs[j]));
      return v;
    };
    Combo acc;
    // -(-1)^{|phi|'} phi o m-hat: insert one inner operation (arity >= 0) and
    // evaluate phi; the global factor makes the square vanish for both parities
    int flip = (phi.sdeg + 1) & 1;
    for (int l = 0; l <= k; ++l)
      for (int i = 0; i + l <= k; ++i) {
        if (k - l + 1 > phi.ell_max) continue;  // evaluation beyond the stored window
        Elem inner;
        if (l == 0) {
          int o = i < k ? xs[i].a : (k ? xs[k - 1].b : obj);
          inner = C.m0_elem(o);
        } else {
          inner = C.apply_m(x_elems(i, i + l));
        }
        std::vector<Elem> args = x_elems(0, i);
        args.push_back(std::move(inner));
        auto rest = x_elems(i + l, k);
        args.insert(args.end(), rest.begin(), rest.end());
        BElem term = phi.apply(args, obj);
        combo_add(acc, term.c, detail::sign_poly(R, flip + detail::tuple_sparity(C, xs, i)), R);
      }
    // mu_M(x.., phi(..), x..) with sign |phi|' * (shifted prefix)
    for (int p = 0; p <= k; ++p)
      for (int q = p; q <= k; ++q) {
        int arity = p + 1 + (k - q);
        if (arity > M.K_max) continue;  // beyond the stored bound: filtration
        int o = p < k ? xs[p].a : (k ? xs[k - 1].b : obj);
        BElem mid = phi.apply(x_elems(p, q), o);
        BElem term = M.apply_mu(x_elems(0, p), mid, x_elems(q, k));
        int sgn = phi.sdeg * detail::tuple_sparity(C, xs, p);
        combo_add(acc, term.c, detail::sign_poly(R, sgn), R);
      }
    if (acc.empty()) return;
    if (k == 0) out.c0[obj] = std::move(acc);
    else out.ck[xs] = std::move(acc);
  };

  for (int o = 0; o < static_cast<int>(C.objects.size()); ++o) accumulate(0, {}, o);
  for (int k = 1; k <= phi.ell_max; ++k)
    for (const Tuple& xs : C.basis_tuples(k)) accumulate(k, xs, -1);
  return out;
}

}  // namespace detail

/// The differential b* of the Hochschild cochain complex CH*(C, M).  Refuses
/// to drop terms: the support of phi must leave room for the arity growth.
inline HochschildCochain hochschild_diff(const HochschildCochain& phi) {
  int growth = std::max(detail::effective_arity(*phi.C), detail::effective_mu_arity(*phi.M)) - 1;
  int p = phi.max_len();
  if (p >= 0 && p + growth > phi.ell_max)
    throw TruncationOverflow("support " + std::to_string(p) + " with arity growth " +
                             std::to_string(growth) + " exceeds ell_max " +
                             std::to_string(phi.ell_max));
  return detail::bstar_truncated(phi);
}

/// Getzler operation M^k on CH*(C) (diagonal coefficients): the signed sum of
/// all interleavings of the cochain values inside one category operation.
/// M^0 = 0 and M^1 = b* by convention.
inline HochschildCochain gerstenhaber_Mk(const AInfCategory& C, const Bimodule& M, int ell_max,
                                         const std::vector<HochschildCochain>& phis) {
  int k = static_cast<int>(phis.size());
  int sdeg = 1;
  for (const HochschildCochain& p : phis) sdeg += p.sdeg;
  if (k == 0) return zero_cochain(C, M, ell_max, sdeg);
  if (k == 1) {
    HochschildCochain p = phis[0];
    p.ell_max = ell_max;
    return hochschild_diff(p);
  }
  for (const HochschildCochain& p : phis)
    if (!has_diagonal_coefficients(p))
      throw std::invalid_argument("Getzler operations need diagonal coefficients");
  const RingCtx& R = C.ring;
  HochschildCochain out = zero_cochain(C, M, ell_max, sdeg);
  int arity_cap = detail::effective_arity(C);

  auto accumulate = [&](int n, const Tuple& xs, int obj) {
    Combo acc;
    std::vector<Elem> margs;
    // walk positions 0..n; at each step either feed the next input to the
    // outer operation or insert the next cochain on a block
    std::function<void(int, int, int)> rec = [&](int pos, int l, int sgn) {
      if (pos == n && l == k) {
        if (static_cast<int>(margs.size()) > arity_cap) return;
        Elem term = C.apply_m(margs);
        combo_add(acc, term.c, detail::sign_poly(R, sgn), R);
        return;
      }
      if (l < k) {
        int eps = phis[l].sdeg * detail::tuple_sparity(C, xs, pos);
        for (int q = pos; q <= n; ++q) {
          std::vector<Elem> block;
          for (int j = pos; j < q; ++j) block.push_back(C.basis_elem(xs[j]));
          int o = pos < n ? xs[pos].a : (n ? xs[n - 1].b : obj);
          BElem val = phis[l].apply(block, o);
          if (!val.is_zero() || true) {
            margs.push_back(as_category_elem(val));
            rec(q, l + 1, sgn + eps);
            margs.pop_back();
          }
        }
      }
      if (pos < n) {
        margs.push_back(C.basis_elem(xs[pos]));
        rec(pos + 1, l, sgn);
        margs.pop_back();
      }
    };
    rec(0, 0, 0);
    if (acc.empty()) return;
    if (n == 0) out.c0[obj] = std::move(acc);
    else out.ck[xs] = std::move(acc);
  };

  for (int o = 0; o < static_cast<int>(C.objects.size()); ++o) accumulate(0, {}, o);
  for (int n = 1; n <= ell_max; ++n)
    for (const Tuple& xs : C.basis_tuples(n)) accumulate(n, xs, -1);
  return out;
}

/// Yoneda product representative on cochains.
inline HochschildCochain cup(const HochschildCochain& phi, const HochschildCochain& psi) {
  HochschildCochain m2 = gerstenhaber_Mk(*phi.C, *phi.M, std::min(phi.ell_max, psi.ell_max),
                                         {phi, psi});
  if (phi.deg() & 1) {
    HochschildCochain out = zero_cochain(*m2.C, *m2.M, m2.ell_max, m2.sdeg);
    cochain_axpy(out, m2, m2.M->ring().scalar(NovScalar(-1)));
    return out;
  }
  return m2;
}

// ---- cochain linear algebra -------------------------------------------------

struct CochainBasisEntry {
  int obj = -1;  // object for length 0
  Tuple xs;      // empty for length 0
  int out = 0;   // output basis index in M(X0, Xk)
};

inline std::vector<CochainBasisEntry> cochain_basis(const AInfCategory& C, const Bimodule& M,
                                                    int ell_max, int sdeg, bool normalized) {
  std::vector<CochainBasisEntry> basis;
  auto is_unit = [&](const Gen& g) {
    auto it = C.units.find(g.a);
    return g.a == g.b && it != C.units.end() && it->second == g.i;
  };
  for (int o = 0; o < static_cast<int>(C.objects.size()); ++o) {
    const auto& sp = M.space(o, o);
    for (int i = 0; i < static_cast<int>(sp.size()); ++i)
      if (sp[i].deg == (sdeg & 1)) basis.push_back({o, {}, i});
  }
  for (int k = 1; k <= ell_max; ++k)
    for (const Tuple& xs : C.basis_tuples(k)) {
      if (normalized && std::any_of(xs.begin(), xs.end(), is_unit)) continue;
      int want = sdeg + detail::tuple_sparity(C, xs, k);
      const auto& sp = M.space(xs.front().a, xs.back().b);
      for (int i = 0; i < static_cast<int>(sp.size()); ++i)
        if (sp[i].deg == (want & 1)) basis.push_back({-1, xs, i});
    }
  return basis;
}

inline HochschildCochain cochain_from_vec(const AInfCategory& C, const Bimodule& M, int ell_max,
                                          int sdeg, const std::vector<CochainBasisEntry>& basis,
                                          const Vec& v) {
  HochschildCochain phi = zero_cochain(C, M, ell_max, sdeg);
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (v[j].is_zero()) continue;
    MPoly c = M.ring().scalar(v[j]);
    if (basis[j].xs.empty()) phi.add0(basis[j].obj, basis[j].out, c);
    else phi.addk(basis[j].xs, basis[j].out, c);
  }
  return phi;
}

/// Expand a cochain in a basis of its parity.  Any component outside the basis
/// (e.g. supported on a unit-containing tuple when the basis is normalized) is
/// reported through `leftover`.
inline Vec cochain_to_vec(const HochschildCochain& phi, const std::vector<CochainBasisEntry>& basis,
                          bool* leftover = nullptr) {
  Vec v(basis.size(), NovScalar());
  HochschildCochain rest = phi;
  rest.prune();
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const CochainBasisEntry& e = basis[j];
    if (e.xs.empty()) {
      auto it = rest.c0.find(e.obj);
      if (it == rest.c0.end()) continue;
      auto ci = it->second.find(e.out);
      if (ci == it->second.end()) continue;
      v[j] = detail::combo_scalar(ci->second);
      it->second.erase(ci);
    } else {
      auto it = rest.ck.find(e.xs);
      if (it == rest.ck.end()) continue;
      auto ci = it->second.find(e.out);
      if (ci == it->second.end()) continue;
      v[j] = detail::combo_scalar(ci->second);
      it->second.erase(ci);
    }
  }
  rest.prune();
  if (leftover) *leftover = !rest.is_zero();
  return v;
}

// ---- Hochschild cohomology --------------------------------------------------

struct HHReport {
  int ell_max = 0;
  bool normalized = true;
  // headline: rank of the induced map H(ell_max) -> H(ell_max - 1) under the
  // drop-top-length projection; phantom classes living only at the top length
  // of a truncation die under this map
  std::array<long, 2> dims{0, 0};       // per shifted parity |phi|'
  std::array<long, 2> dims_prev{0, 0};  // same one truncation lower
  std::array<long, 2> dims_raw{0, 0};   // plain ker/im at ell_max
  bool stable = false;                  // dims agree with dims_prev
  bool closed = true;                   // truncated differential squares to zero
  std::array<std::vector<HochschildCochain>, 2> reps;

  json to_json() const {
    // shifted parity 1 is the even cohomological degree (the unit class lives
    // there), shifted parity 0 the odd one
    return json{{"ell_max", ell_max},
                {"normalized", normalized},
                {"hh_even", dims[1]},
                {"hh_odd", dims[0]},
                {"dims", {dims[0], dims[1]}},
                {"dims_prev", {dims_prev[0], dims_prev[1]}},
                {"dims_raw", {dims_raw[0], dims_raw[1]}},
                {"stable", stable},
                {"closed", closed}};
  }
};

/// Drops every value component of phi whose basis entry fails keep; used to
/// pass to a quotient complex spanned by the kept entries.
inline void cochain_filter(HochschildCochain& phi,
                           const std::function<bool(const CochainBasisEntry&)>& keep) {
  for (auto& [o, c] : phi.c0) {
    CochainBasisEntry e{o, {}, 0};
    std::erase_if(c, [&](const auto& kv) {
      e.out = kv.first;
      return !keep(e);
    });
  }
  for (auto& [t, c] : phi.ck) {
    CochainBasisEntry e{-1, t, 0};
    std::erase_if(c, [&](const auto& kv) {
      e.out = kv.first;
      return !keep(e);
    });
  }
  phi.prune();
}

/// ker b* / im b* of the length-truncated complex, per shifted parity.  The
/// reported dimensions are the ranks of the comparison maps between the
/// truncations at ell_max, ell_max - 1 and ell_max - 2; a report with
/// stable == false is the NotStabilized warning, and we never claim
/// untruncated dimensions.  Field coefficients required.
///
/// An optional keep predicate restricts the basis; the kept entries must span
/// a quotient complex (the dropped span must be closed under b*), in which
/// case the computation is the cohomology of that quotient.
inline HHReport hh_cohomology(const AInfCategory& C, const Bimodule& M, int ell_max,
                              bool normalized = true,
                              const std::function<bool(const CochainBasisEntry&)>& keep = {}) {
  if (!C.ring.is_field()) throw CoefficientNotField();
  HHReport rep;
  rep.ell_max = ell_max;
  rep.normalized = normalized;

  struct Trunc {
    std::array<std::vector<CochainBasisEntry>, 2> bases;
    std::array<Mat, 2> d;  // parity p -> parity 1-p
  };
  auto build = [&](int L) {
    Trunc t;
    for (int p = 0; p < 2; ++p) {
      t.bases[p] = cochain_basis(C, M, L, p, normalized);
      if (keep) std::erase_if(t.bases[p], [&](const CochainBasisEntry& e) { return !keep(e); });
    }
    for (int p = 0; p < 2; ++p) {
      // keep one zero row even for an empty target so the kernel sees the
      // right number of columns
      t.d[p] = mat_zero(std::max<std::size_t>(t.bases[1 - p].size(), 1), t.bases[p].size());
      for (std::size_t j = 0; j < t.bases[p].size(); ++j) {
        Vec unit(t.bases[p].size(), NovScalar());
        unit[j] = NovScalar(1);
        HochschildCochain phi = cochain_from_vec(C, M, L, p, t.bases[p], unit);
        HochschildCochain img_c = detail::bstar_truncated(phi);
        if (keep) cochain_filter(img_c, keep);
        bool leftover = false;
        Vec img = cochain_to_vec(img_c, t.bases[1 - p], &leftover);
        if (leftover) rep.closed = false;
        for (std::size_t i = 0; i < img.size(); ++i) t.d[p][i][j] = img[i];
      }
    }
    for (int p = 0; p < 2; ++p) {
      if (t.bases[p].empty() || t.bases[1 - p].empty()) continue;
      Mat sq = mat_mul(t.d[1 - p], t.d[p]);
      for (const Vec& row : sq)
        for (const NovScalar& x : row)
          if (!x.is_zero()) rep.closed = false;
    }
    return t;
  };

  // image of H(big) -> H(small): project kernel vectors (the small basis is a
  // prefix of the big one) and count ranks modulo the boundaries downstairs
  auto persistent = [&](const Trunc& big, const Trunc& small, bool with_reps,
                        std::array<long, 2>* raw) {
    std::array<long, 2> dims{0, 0};
    for (int p = 0; p < 2; ++p) {
      auto Z = kernel(big.d[p]);
      if (raw)
        (*raw)[p] = static_cast<long>(Z.size()) - static_cast<long>(mat_rank(big.d[p == 0 ? 1 : 0]));
      std::size_t ns = small.bases[p].size();
      Mat span;  // rows spanning im of the small differential
      for (std::size_t j = 0; j < small.bases[1 - p].size(); ++j) {
        Vec col(ns, NovScalar());
        bool nz = false;
        for (std::size_t i = 0; i < ns; ++i) {
          col[i] = small.d[1 - p][i][j];
          nz = nz || !col[i].is_zero();
        }
        if (nz) span.push_back(std::move(col));
      }
      std::size_t r = mat_rank(span);
      for (const Vec& z : Z) {
        Vec pz(z.begin(), z.begin() + ns);
        Mat ext = span;
        ext.push_back(pz);
        if (mat_rank(ext) > r) {
          span.push_back(pz);
          r += 1;
          dims[p] += 1;
          if (with_reps)
            rep.reps[p].push_back(
                cochain_from_vec(C, M, rep.ell_max, p, small.bases[p], pz));
        }
      }
    }
    return dims;
  };

  Trunc t2 = build(ell_max);
  Trunc t1 = build(std::max(ell_max - 1, 0));
  Trunc t0 = build(std::max(ell_max - 2, 0));
  rep.dims = persistent(t2, t1, true, &rep.dims_raw);
  rep.dims_prev = persistent(t1, t0, false, nullptr);
  rep.stable = rep.dims == rep.dims_prev;
  return rep;
}

// ---- Hochschild chains and the cap product ----------------------------------

/// Cyclic tensor words a_0 (x) a_1 (x) ... (x) a_n with the module slot a_0
/// first; a_i in C(X_i, X_{i+1}) and a_n closing back to X_0.  The key of the
/// map is the word; n <= ell_max.
struct HochschildChain {
  const AInfCategory* C = nullptr;
  int ell_max = 6;
  std::map<Tuple, MPoly> terms;

  bool is_zero() const {
    for (const auto& [w, c] : terms)
      if (!c.is_zero()) return false;
    return true;
  }
  void add(const Tuple& w, const MPoly& c) {
    if (c.is_zero()) return;
    auto [it, fresh] = terms.try_emplace(w, c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero()) terms.erase(it);
    }
  }
  void prune() {
    for (auto it = terms.begin(); it != terms.end();)
      it = it->second.is_zero() ? terms.erase(it) : std::next(it);
  }
};

inline bool chain_equal(const HochschildChain& a, const HochschildChain& b) {
  HochschildChain x = a, y = b;
  x.prune();
  y.prune();
  return x.terms == y.terms;
}

inline void chain_axpy(HochschildChain& dst, const HochschildChain& src, const MPoly& f) {
  for (const auto& [w, c] : src.terms) dst.add(w, dst.C->ring.mul(f, c));
}

/// All cyclically composable basis words with 0..ell_max letters after the
/// module slot.
inline std::vector<Tuple> cyclic_words(const AInfCategory& C, int ell_max) {
  std::vector<Tuple> out;
  Tuple w;
  std::function<void(int)> rec = [&](int n) {
    if (!w.empty() && w.back().b == w.front().a) out.push_back(w);
    if (n == ell_max + 1) return;
    int from = w.empty() ? -1 : w.back().b;
    for (const auto& [key, basis] : C.homs) {
      if (from >= 0 && key.first != from) continue;
      for (int i = 0; i < static_cast<int>(basis.size()); ++i) {
        w.push_back({key.first, key.second, i});
        rec(n + 1);
        w.pop_back();
      }
    }
  };
  rec(0);
  return out;
}

inline int chain_sparity(const AInfCategory& C, const Tuple& w) {
  return detail::tuple_sparity(C, w, static_cast<int>(w.size()));
}

/// Cyclic bar differential on chains: inner operations on the letters after
/// the module slot, plus wrap-around operations consuming the module slot
/// (with the rotation Koszul sign in shifted degrees).
inline HochschildChain hochschild_chain_diff(const HochschildChain& psi) {
  const AInfCategory& C = *psi.C;
  const RingCtx& R = C.ring;
  HochschildChain out;
  out.C = psi.C;
  out.ell_max = psi.ell_max;
  for (const auto& [w, coeff] : psi.terms) {
    int n = static_cast<int>(w.size()) - 1;
    auto letters = [&](int from, int to) {
      std::vector<Elem> v;
      for (int j = from; j < to; ++j) v.push_back(C.basis_elem(w[j]));
      return v;
    };
    auto emit = [&](const Elem& head, const Tuple& tail, int sgn) {
      if (static_cast<int>(tail.size()) > psi.ell_max) return;  // filtration
      for (const auto& [i, c] : head.c) {
        Tuple nw;
        nw.push_back({head.a, head.b, i});
        nw.insert(nw.end(), tail.begin(), tail.end());
        out.add(nw, R.mul(coeff, R.mul(c, detail::sign_poly(R, sgn))));
      }
    };
    // interior insertions (arity >= 0) strictly after the module slot
    for (int l = 0; l <= n; ++l)
      for (int i = 1; i + l <= n + 1; ++i) {
        Elem inner;
        if (l == 0) {
          int o = i <= n ? w[i].a : w[0].a;  // after a_n the cycle closes at X_0
          inner = C.m0_elem(o);
        } else {
          inner = C.apply_m(letters(i, i + l));
        }
        int sgn = detail::tuple_sparity(C, w, i);
        for (const auto& [ii, cc] : inner.c) {
          Tuple tail(w.begin() + 1, w.begin() + i);
          tail.push_back({inner.a, inner.b, ii});
          tail.insert(tail.end(), w.begin() + i + l, w.end());
          if (static_cast<int>(tail.size()) > psi.ell_max) continue;
          Tuple nw;
          nw.push_back(w[0]);
          nw.insert(nw.end(), tail.begin(), tail.end());
          out.add(nw, R.mul(coeff, R.mul(cc, detail::sign_poly(R, sgn))));
        }
      }
    // wrap-around: m(a_{l+1}..a_n, a_0..a_k) (x) a_{k+1}..a_l
    for (int l = 0; l <= n; ++l)
      for (int k = 0; k <= l; ++k) {
        std::vector<Elem> args = letters(l + 1, n + 1);
        auto head = letters(0, k + 1);
        args.insert(args.end(), head.begin(), head.end());
        Elem val = C.apply_m(args);
        int rot = detail::tuple_sparity(C, w, l + 1);  // degrees of a_0..a_l
        int moved = (chain_sparity(C, w) + rot) & 1;   // degrees of a_{l+1}..a_n
        emit(val, Tuple(w.begin() + k + 1, w.begin() + l + 1), moved * rot);
      }
  }
  return out;
}

/// Cap product: the cochain is inserted into one wrap-around operation on the
/// cyclic word; the displayed sign has the hop of phi over a_0..a_i plus the
/// rotation Koszul factor.
inline HochschildChain cap(const HochschildCochain& phi, const HochschildChain& psi) {
  const AInfCategory& C = *psi.C;
  const RingCtx& R = C.ring;
  if (!has_diagonal_coefficients(phi))
    throw std::invalid_argument("cap needs diagonal coefficients");
  HochschildChain out;
  out.C = psi.C;
  out.ell_max = psi.ell_max;
  for (const auto& [w, coeff] : psi.terms) {
    int n = static_cast<int>(w.size()) - 1;
    auto letters = [&](int from, int to) {
      std::vector<Elem> v;
      for (int j = from; j < to; ++j) v.push_back(C.basis_elem(w[j]));
      return v;
    };
    for (int l = 0; l <= n; ++l)
      for (int k = 0; k <= l; ++k)
        for (int i = l; i <= n; ++i)
          for (int j = i; j <= n; ++j) {
            int o = i + 1 <= n ? w[i + 1].a : w[0].a;
            BElem mid = phi.apply(letters(i + 1, j + 1), o);
            std::vector<Elem> args = letters(l + 1, i + 1);
            args.push_back(as_category_elem(mid));
            auto rest = letters(j + 1, n + 1);
            args.insert(args.end(), rest.begin(), rest.end());
            auto head = letters(0, k + 1);
            args.insert(args.end(), head.begin(), head.end());
            Elem val = C.apply_m(args);
            int hop = phi.sdeg * detail::tuple_sparity(C, w, i + 1);
            int rot = detail::tuple_sparity(C, w, l + 1);
            int moved = (chain_sparity(C, w) + rot + phi.sdeg) & 1;
            int sgn = hop + moved * rot;
            if (static_cast<int>(l - k) > psi.ell_max) continue;
            for (const auto& [vi, vc] : val.c) {
              Tuple nw;
              nw.push_back({val.a, val.b, vi});
              nw.insert(nw.end(), w.begin() + k + 1, w.begin() + l + 1);
              out.add(nw, R.mul(coeff, R.mul(vc, detail::sign_poly(R, sgn))));
            }
          }
  }
  return out;
}

// ---- Morita comparison maps --------------------------------------------------

/// L^1 of a Hochschild cochain over the left category of M: the cochain value
/// replaces a block of the left inputs inside one module operation.
inline Premorphism L_M1(const HochschildCochain& phi, const Bimodule& M) {
  const AInfCategory& C = *M.left;
  const AInfCategory& D = *M.right;
  if (phi.C != &C || !has_diagonal_coefficients(phi))
    throw std::invalid_argument("L^1 needs a cochain over the left category");
  if (phi.ell_max < M.K_max - 1)
    throw TruncationOverflow("cochain window smaller than the module arity bound");
  const RingCtx& R = M.ring();
  Premorphism F;
  F.src = &M;
  F.tgt = &M;
  F.k = phi.deg();
  for (int r = 0; r + 1 <= M.K_max; ++r)
    for (int s = 0; r + s + 1 <= M.K_max; ++s)
      for (const MuKey& t : M.basis_keys(r, s)) {
        auto v_elems = [&](int from, int to) {
          std::vector<Elem> v;
          for (int j = from; j < to; ++j) v.push_back(C.basis_elem(t.vs[j]));
          return v;
        };
        std::vector<Elem> ws;
        for (const Gen& g : t.ws) ws.push_back(D.basis_elem(g));
        Combo acc;
        for (int p = 0; p <= r; ++p)
          for (int q = p; q <= r; ++q) {
            if (p + 1 + (r - q) + s + 1 > M.K_max) continue;  // beyond the bound
            int o = p < r ? t.vs[p].a : t.m.v;
            BElem mid = phi.apply(v_elems(p, q), o);
            std::vector<Elem> vs = v_elems(0, p);
            vs.push_back(as_category_elem(mid));
            auto rest = v_elems(q, r);
            vs.insert(vs.end(), rest.begin(), rest.end());
            BElem term = M.apply_mu(vs, M.basis_elem(t.m), ws);
            int sgn = phi.sdeg * detail::tuple_sparity(C, t.vs, p);
            combo_add(acc, term.c, detail::sign_poly(R, sgn), R);
          }
        if (!acc.empty()) F.comp[t] = std::move(acc);
      }
  return F;
}

/// R^1: the cochain value is placed among the right inputs; its hop over the
/// left inputs and the module slot uses the unshifted module degree, which is
/// what produces the (-1)^{|m|} in the length-zero case.
inline Premorphism R_M1(const HochschildCochain& phi, const Bimodule& M) {
  const AInfCategory& C = *M.left;
  const AInfCategory& D = *M.right;
  if (phi.C != &D || !has_diagonal_coefficients(phi))
    throw std::invalid_argument("R^1 needs a cochain over the right category");
  if (phi.ell_max < M.K_max - 1)
    throw TruncationOverflow("cochain window smaller than the module arity bound");
  const RingCtx& R = M.ring();
  Premorphism F;
  F.src = &M;
  F.tgt = &M;
  F.k = phi.deg();
  for (int r = 0; r + 1 <= M.K_max; ++r)
    for (int s = 0; r + s + 1 <= M.K_max; ++s)
      for (const MuKey& t : M.basis_keys(r, s)) {
        auto w_elems = [&](int from, int to) {
          std::vector<Elem> v;
          for (int j = from; j < to; ++j) v.push_back(D.basis_elem(t.ws[j]));
          return v;
        };
        std::vector<Elem> vs;
        for (const Gen& g : t.vs) vs.push_back(C.basis_elem(g));
        Combo acc;
        int base = detail::tuple_sparity(C, t.vs, r) + M.parity(t.m) + 1;
        for (int p = 0; p <= s; ++p)
          for (int q = p; q <= s; ++q) {
            if (r + 1 + p + 1 + (s - q) > M.K_max) continue;
            int o = p < s ? t.ws[p].a : t.m.w;
            BElem mid = phi.apply(w_elems(p, q), o);
            std::vector<Elem> wlist = w_elems(0, p);
            wlist.push_back(as_category_elem(mid));
            auto rest = w_elems(q, s);
            wlist.insert(wlist.end(), rest.begin(), rest.end());
            BElem term = M.apply_mu(vs, M.basis_elem(t.m), wlist);
            int sgn = phi.sdeg * ((base + detail::tuple_sparity(D, t.ws, p)) & 1);
            combo_add(acc, term.c, detail::sign_poly(R, sgn), R);
          }
        if (!acc.empty()) F.comp[t] = std::move(acc);
      }
  return F;
}

// ---- JSON --------------------------------------------------------------------

inline json cochain_to_json(const HochschildCochain& phi) {
  const AInfCategory& C = *phi.C;
  const Bimodule& M = *phi.M;
  json arr = json::array();
  for (const auto& [o, c] : phi.c0) {
    json jout = json::array();
    for (const auto& [i, coeff] : c)
      jout.push_back(json::array({M.bgen_name({o, o, i}), coeff.to_json(C.ring.vars)}));
    arr.push_back(json{{"len", 0}, {"obj", C.objects[o]}, {"inputs", json::array()},
                       {"output", jout}});
  }
  for (const auto& [t, c] : phi.ck) {
    json jin = json::array();
    for (const Gen& g : t) jin.push_back(C.gen_name(g));
    json jout = json::array();
    for (const auto& [i, coeff] : c)
      jout.push_back(json::array(
          {M.bgen_name({t.front().a, t.back().b, i}), coeff.to_json(C.ring.vars)}));
    arr.push_back(json{{"len", static_cast<int>(t.size())}, {"inputs", jin}, {"output", jout}});
  }
  return json{{"sdeg", phi.sdeg}, {"ell_max", phi.ell_max}, {"components", arr}};
}

}  // namespace mforge
