#pragma once

#include <algorithm>
#include <functional>
#include <optional>

#include "mirrorforge/laurent.hpp"

namespace mforge {

struct NotZeroDimensional : std::runtime_error {
  NotZeroDimensional() : std::runtime_error("quotient is not zero-dimensional") {}
};

/// Degree-reverse-lexicographic order with variable 0 largest and the last
/// variable (the saturation variable, when present) smallest.
inline bool drl_less(const ExpVec& a, const ExpVec& b) {
  int da = 0, db = 0;
  for (int x : a) da += x;
  for (int x : b) db += x;
  if (da != db) return da < db;
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] != b[i]) return a[i] > b[i];  // larger trailing exponent = smaller
  }
  return false;
}

inline bool divides(const ExpVec& a, const ExpVec& b) {  // a | b
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i]) return false;
  return true;
}
inline ExpVec exp_sub(const ExpVec& a, const ExpVec& b) {
  ExpVec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}
inline ExpVec exp_lcm(const ExpVec& a, const ExpVec& b) {
  ExpVec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = std::max(a[i], b[i]);
  return r;
}

/// Leading term under degrevlex (requires nonzero, nonnegative exponents).
inline std::pair<ExpVec, NovScalar> lead(const MPoly& f) {
  auto best = f.terms.begin();
  for (auto it = std::next(f.terms.begin()); it != f.terms.end(); ++it)
    if (drl_less(best->first, it->first)) best = it;
  return {best->first, best->second};
}

inline MPoly make_monic(MPoly f) {
  if (f.is_zero()) return f;
  NovScalar inv = lead(f).second.inverse();
  for (auto& [e, c] : f.terms) c *= inv;
  return f;
}

/// Full normal form of f modulo G (every term reduced).
inline MPoly normal_form_poly(MPoly f, const std::vector<MPoly>& G) {
  MPoly r(f.nvars);
  while (!f.is_zero()) {
    auto [le, lc] = lead(f);
    bool reduced = false;
    for (const MPoly& g : G) {
      auto [ge, gc] = lead(g);
      if (!divides(ge, le)) continue;
      NovScalar factor = lc / gc;
      MPoly sub = MPoly::monomial(f.nvars, exp_sub(le, ge), factor) * g;
      f -= sub;
      reduced = true;
      break;
    }
    if (!reduced) {
      r.add_term(le, lc);
      f.terms.erase(le);
    }
  }
  return r;
}

inline MPoly s_poly(const MPoly& f, const MPoly& g) {
  auto [fe, fc] = lead(f);
  auto [ge, gc] = lead(g);
  ExpVec l = exp_lcm(fe, ge);
  MPoly a = MPoly::monomial(f.nvars, exp_sub(l, fe), fc.inverse()) * f;
  MPoly b = MPoly::monomial(f.nvars, exp_sub(l, ge), gc.inverse()) * g;
  return a - b;
}

/// Buchberger with the normal selection strategy and both standard criteria.
/// Returns the reduced (monic, auto-reduced) basis.
inline std::vector<MPoly> groebner_basis_raw(std::vector<MPoly> gens) {
  std::vector<MPoly> G;
  for (auto& g : gens)
    if (!g.is_zero()) G.push_back(make_monic(std::move(g)));
  if (G.empty()) return G;

  struct Pair { std::size_t i, j; ExpVec l; int deg; };
  auto pair_less = [](const Pair& a, const Pair& b) {
    if (a.deg != b.deg) return a.deg < b.deg;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  };
  std::vector<Pair> pairs;
  auto add_pairs = [&](std::size_t k) {
    for (std::size_t i = 0; i < k; ++i) {
      ExpVec l = exp_lcm(lead(G[i]).first, lead(G[k]).first);
      int d = 0;
      for (int x : l) d += x;
      pairs.push_back({i, k, std::move(l), d});
    }
    std::sort(pairs.begin(), pairs.end(), pair_less);
  };
  for (std::size_t k = 1; k < G.size(); ++k) add_pairs(k);

  while (!pairs.empty()) {
    Pair p = pairs.front();
    pairs.erase(pairs.begin());
    const ExpVec &ei = lead(G[p.i]).first, &ej = lead(G[p.j]).first;
    // coprimality criterion
    bool coprime = true;
    for (std::size_t k = 0; k < ei.size(); ++k)
      if (ei[k] > 0 && ej[k] > 0) { coprime = false; break; }
    if (coprime) continue;
    // chain criterion
    bool skip = false;
    for (std::size_t k = 0; k < G.size() && !skip; ++k) {
      if (k == p.i || k == p.j) continue;
      if (!divides(lead(G[k]).first, p.l)) continue;
      auto done = [&](std::size_t a, std::size_t b) {
        if (a > b) std::swap(a, b);
        for (const Pair& q : pairs)
          if (q.i == a && q.j == b) return false;
        return true;
      };
      if (done(p.i, k) && done(k, p.j)) skip = true;
    }
    if (skip) continue;

    MPoly r = normal_form_poly(s_poly(G[p.i], G[p.j]), G);
    if (!r.is_zero()) {
      G.push_back(make_monic(std::move(r)));
      add_pairs(G.size() - 1);
    }
  }

  // interreduce to the reduced basis
  for (;;) {
    bool changed = false;
    for (std::size_t i = 0; i < G.size(); ++i) {
      std::vector<MPoly> rest;
      for (std::size_t j = 0; j < G.size(); ++j)
        if (j != i) rest.push_back(G[j]);
      MPoly r = normal_form_poly(G[i], rest);
      if (!(r == G[i])) {
        changed = true;
        if (r.is_zero()) { G.erase(G.begin() + i); break; }
        G[i] = make_monic(std::move(r));
      }
    }
    if (!changed) break;
  }
  std::sort(G.begin(), G.end(),
            [](const MPoly& a, const MPoly& b) { return drl_less(lead(a).first, lead(b).first); });
  return G;
}

/// Reduced Groebner basis plus the standard-monomial staircase when the
/// quotient is finite-dimensional.
struct QuotientBasis {
  int nvars = 0;
  std::vector<MPoly> gb;
  bool zero_dimensional = false;
  std::vector<ExpVec> staircase;  // sorted by degrevlex, empty unless zero-dimensional

  MPoly normal_form(const MPoly& f) const {
    if (f.nvars != nvars) throw RingMismatch();
    return normal_form_poly(f, gb);
  }
  std::optional<std::size_t> staircase_index(const ExpVec& e) const {
    auto it = std::lower_bound(staircase.begin(), staircase.end(), e, drl_less);
    if (it != staircase.end() && *it == e) return it - staircase.begin();
    return std::nullopt;
  }
};

inline QuotientBasis quotient_basis(std::vector<MPoly> gens) {
  QuotientBasis q;
  q.nvars = gens.empty() ? 0 : gens[0].nvars;
  q.gb = groebner_basis_raw(std::move(gens));
  int n = q.nvars;
  if (q.gb.empty()) { q.zero_dimensional = false; return q; }
  // quotient is the zero ring when 1 is in the ideal
  if (q.gb.size() == 1 && q.gb[0].is_constant()) {
    q.zero_dimensional = true;
    return q;
  }
  // zero-dimensional iff every variable appears as a pure power among leads
  std::vector<int> bound(n, -1);
  for (const MPoly& g : q.gb) {
    const ExpVec& e = lead(g).first;
    int nz = -1;
    bool pure = true;
    for (int i = 0; i < n; ++i)
      if (e[i] > 0) {
        if (nz >= 0) { pure = false; break; }
        nz = i;
      }
    if (pure && nz >= 0 && (bound[nz] < 0 || e[nz] < bound[nz])) bound[nz] = e[nz];
  }
  for (int i = 0; i < n; ++i)
    if (bound[i] < 0) { q.zero_dimensional = false; return q; }
  q.zero_dimensional = true;

  std::vector<ExpVec> leads;
  for (const MPoly& g : q.gb) leads.push_back(lead(g).first);
  ExpVec e(n, 0);
  std::function<void(int)> rec = [&](int i) {
    if (i == n) {
      for (const ExpVec& l : leads)
        if (divides(l, e)) return;
      q.staircase.push_back(e);
      return;
    }
    for (e[i] = 0; e[i] < bound[i]; ++e[i]) rec(i + 1);
    e[i] = 0;
  };
  rec(0);
  std::sort(q.staircase.begin(), q.staircase.end(), drl_less);
  return q;
}

/// Quotient of the Laurent ring by a Laurent ideal, presented polynomially:
/// generators are cleared to polynomials by minimal monomial multiples and the
/// ideal is saturated at y_1...y_n via the extra variable t with t*y_1...y_n = 1.
struct LaurentQuotient {
  int n = 0;  // Laurent variables; the polynomial ring has n+1
  QuotientBasis qb;

  /// Represent a Laurent polynomial in the polynomial model: each term with
  /// negative exponents is multiplied by (t*y_1...y_n)^m = 1.
  MPoly polynomialize(const MPoly& f) const {
    MPoly r(n + 1);
    for (const auto& [e, c] : f.terms) {
      int m = 0;
      for (int x : e) m = std::max(m, -x);
      ExpVec pe(n + 1, 0);
      for (int i = 0; i < n; ++i) pe[i] = e[i] + m;
      pe[n] = m;
      r.add_term(pe, c);
    }
    return r;
  }

  MPoly normal_form(const MPoly& laurent_f) const { return qb.normal_form(polynomialize(laurent_f)); }

  long dimension() const { return qb.zero_dimensional ? static_cast<long>(qb.staircase.size()) : -1; }
};

inline LaurentQuotient laurent_quotient(const std::vector<MPoly>& laurent_gens) {
  if (laurent_gens.empty()) throw std::invalid_argument("empty generator list");
  LaurentQuotient lq;
  lq.n = laurent_gens[0].nvars;
  int n = lq.n;
  std::vector<MPoly> gens;
  for (const MPoly& f : laurent_gens) {
    if (f.is_zero()) continue;
    // clear by the minimal monomial making all exponents nonnegative
    ExpVec shift(n, 0);
    for (const auto& [e, c] : f.terms)
      for (int i = 0; i < n; ++i) shift[i] = std::max(shift[i], -e[i]);
    MPoly g(n + 1);
    for (const auto& [e, c] : f.terms) {
      ExpVec pe(n + 1, 0);
      for (int i = 0; i < n; ++i) pe[i] = e[i] + shift[i];
      g.add_term(pe, c);
    }
    gens.push_back(std::move(g));
  }
  // torus saturation relation t*y_1...y_n - 1
  MPoly rel(n + 1);
  ExpVec all(n + 1, 1);
  rel.add_term(all, NovScalar(1));
  rel.add_term(ExpVec(n + 1, 0), NovScalar(-1));
  gens.push_back(std::move(rel));
  lq.qb = quotient_basis(std::move(gens));
  return lq;
}

/// Multiplication-by-x_i matrix on the standard-monomial basis (zero-dim only).
inline std::vector<std::vector<NovScalar>> mult_matrix(const QuotientBasis& qb, int var) {
  if (!qb.zero_dimensional) throw NotZeroDimensional();
  std::size_t d = qb.staircase.size();
  std::vector<std::vector<NovScalar>> M(d, std::vector<NovScalar>(d, NovScalar()));
  for (std::size_t j = 0; j < d; ++j) {
    ExpVec e = qb.staircase[j];
    e[var] += 1;
    MPoly nf = qb.normal_form(MPoly::monomial(qb.nvars, e));
    for (const auto& [me, c] : nf.terms) {
      auto idx = qb.staircase_index(me);
      if (!idx) throw std::logic_error("normal form not supported on staircase");
      M[*idx][j] = c;
    }
  }
  return M;
}

}  // namespace mforge
