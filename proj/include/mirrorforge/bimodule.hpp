#pragma once

#include <algorithm>
#include <functional>

#include "mirrorforge/ainfty.hpp"
#include "mirrorforge/linalg.hpp"

namespace mforge {

struct ArityOverflow : std::runtime_error {
  ArityOverflow() : std::runtime_error("operation requires arities beyond the stored bound") {}
};

/// Basis generator of a bimodule space M(V, W).
struct BGen {
  int v = 0, w = 0, i = 0;
  auto operator<=>(const BGen&) const = default;
};

/// Key of one structure-constant entry: category inputs left and right of the
/// module slot.
struct MuKey {
  Tuple vs;
  BGen m;
  Tuple ws;
  auto operator<=>(const MuKey&) const = default;
};

struct BElem {
  int v = -1, w = -1;
  Combo c;
  bool is_zero() const { return c.empty(); }
};

struct Bimodule {
  const AInfCategory* left = nullptr;
  const AInfCategory* right = nullptr;
  int K_max = 6;
  // (V, W) -> basis; GenInfo::deg holds the module parity used in Koszul signs
  std::map<std::pair<int, int>, std::vector<GenInfo>> spaces;
  std::map<MuKey, Combo> mu;

  const RingCtx& ring() const { return left->ring; }
  const std::vector<GenInfo>& space(int v, int w) const {
    static const std::vector<GenInfo> empty;
    auto it = spaces.find({v, w});
    return it == spaces.end() ? empty : it->second;
  }
  int parity(const BGen& g) const { return space(g.v, g.w)[g.i].deg; }
  std::string bgen_name(const BGen& g) const {
    return left->objects[g.v] + "|" + right->objects[g.w] + "|" + space(g.v, g.w)[g.i].name;
  }

  BElem basis_elem(const BGen& g) const {
    BElem e;
    e.v = g.v;
    e.w = g.w;
    e.c.emplace(g.i, ring().one());
    return e;
  }
  BElem zero_elem(int v, int w) const {
    BElem e;
    e.v = v;
    e.w = w;
    return e;
  }

  Combo mu_basis(const MuKey& k) const {
    auto it = mu.find(k);
    return it == mu.end() ? Combo{} : it->second;
  }

  /// Multilinear extension of mu^{r|1|s}.
  BElem apply_mu(const std::vector<Elem>& vs, const BElem& m, const std::vector<Elem>& ws) const {
    int v0 = vs.empty() ? m.v : vs.front().a;
    int wN = ws.empty() ? m.w : ws.back().b;
    BElem out = zero_elem(v0, wN);
    MuKey key;
    key.vs.resize(vs.size());
    key.ws.resize(ws.size());
    const RingCtx& R = ring();
    std::function<void(std::size_t, MPoly)> rec_w = [&](std::size_t pos, MPoly factor) {
      if (pos == ws.size()) {
        combo_add(out.c, mu_basis(key), factor, R);
        return;
      }
      for (const auto& [i, c] : ws[pos].c) {
        key.ws[pos] = {ws[pos].a, ws[pos].b, i};
        rec_w(pos + 1, R.mul(factor, c));
      }
    };
    std::function<void(std::size_t, MPoly)> rec_v = [&](std::size_t pos, MPoly factor) {
      if (pos == vs.size()) {
        for (const auto& [i, c] : m.c) {
          key.m = {m.v, m.w, i};
          rec_w(0, R.mul(factor, c));
        }
        return;
      }
      for (const auto& [i, c] : vs[pos].c) {
        key.vs[pos] = {vs[pos].a, vs[pos].b, i};
        rec_v(pos + 1, R.mul(factor, c));
      }
    };
    rec_v(0, R.one());
    return out;
  }

  /// All composable basis keys with r left and s right inputs.
  std::vector<MuKey> basis_keys(int r, int s) const {
    std::vector<MuKey> out;
    std::function<void(MuKey&, int)> rec_w = [&](MuKey& k, int pos) {
      if (pos == s) { out.push_back(k); return; }
      int from = pos == 0 ? k.m.w : k.ws.back().b;
      for (const auto& [key, basis] : right->homs) {
        if (key.first != from) continue;
        for (int i = 0; i < static_cast<int>(basis.size()); ++i) {
          k.ws.push_back({key.first, key.second, i});
          rec_w(k, pos + 1);
          k.ws.pop_back();
        }
      }
    };
    auto mid = [&](MuKey& k) {
      int from = k.vs.empty() ? -1 : k.vs.back().b;
      for (const auto& [vw, basis] : spaces) {
        if (from >= 0 && vw.first != from) continue;
        for (int i = 0; i < static_cast<int>(basis.size()); ++i) {
          k.m = {vw.first, vw.second, i};
          rec_w(k, 0);
        }
      }
    };
    std::function<void(MuKey&, int)> rec_v = [&](MuKey& k, int pos) {
      if (pos == r) { mid(k); return; }
      int from = pos == 0 ? -1 : k.vs.back().b;
      for (const auto& [key, basis] : left->homs) {
        if (from >= 0 && key.first != from) continue;
        for (int i = 0; i < static_cast<int>(basis.size()); ++i) {
          k.vs.push_back({key.first, key.second, i});
          rec_v(k, pos + 1);
          k.vs.pop_back();
        }
      }
    };
    MuKey k;
    rec_v(k, 0);
    return out;
  }

  std::string key_name(const MuKey& k) const {
    std::string s = "(";
    for (const Gen& g : k.vs) s += left->gen_name(g) + ", ";
    s += "[" + bgen_name(k.m) + "]";
    for (const Gen& g : k.ws) s += ", " + right->gen_name(g);
    return s + ")";
  }
};

namespace detail {
inline int tuple_sparity(const AInfCategory& C, const Tuple& t, int upto) {
  int s = 0;
  for (int j = 0; j < upto; ++j) s += C.sdeg(t[j]);
  return s & 1;
}
inline MPoly sign_poly(const RingCtx& R, int parity) {
  return R.scalar(NovScalar(parity & 1 ? -1 : 1));
}
}  // namespace detail

/// Residual of the curved bimodule relation at one basis key: outer mu of an
/// inner mu, plus category operations (including curvature insertions)
/// collapsed on either side.
inline BElem bimodule_residual(const Bimodule& M, const MuKey& t) {
  const AInfCategory& C = *M.left;
  const AInfCategory& D = *M.right;
  const RingCtx& R = M.ring();
  int r = static_cast<int>(t.vs.size()), s = static_cast<int>(t.ws.size());
  int v0 = r ? t.vs.front().a : t.m.v;
  int wN = s ? t.ws.back().b : t.m.w;
  BElem total = M.zero_elem(v0, wN);

  auto v_elems = [&](int from, int to) {
    std::vector<Elem> out;
    for (int j = from; j < to; ++j) out.push_back(C.basis_elem(t.vs[j]));
    return out;
  };
  auto w_elems = [&](int from, int to) {
    std::vector<Elem> out;
    for (int j = from; j < to; ++j) out.push_back(D.basis_elem(t.ws[j]));
    return out;
  };

  // (A) mu(v_1..v_i, mu(v_{i+1}..v_r, m, w_1..w_j), w_{j+1}..w_s)
  for (int i = 0; i <= r; ++i)
    for (int j = 0; j <= s; ++j) {
      BElem inner = M.apply_mu(v_elems(i, r), M.basis_elem(t.m), w_elems(0, j));
      BElem term = M.apply_mu(v_elems(0, i), inner, w_elems(j, s));
      combo_add(total.c, term.c, detail::sign_poly(R, detail::tuple_sparity(C, t.vs, i)), R);
    }

  // (B) mu(v_1..v_i, m_l(v_{i+1}..v_{i+l}), .., m, w_1..w_s), l >= 0
  for (int l = 0; l <= r; ++l)
    for (int i = 0; i + l <= r; ++i) {
      Elem inner;
      if (l == 0) {
        int obj = i < r ? t.vs[i].a : t.m.v;
        inner = C.m0_elem(obj);
      } else {
        inner = C.apply_m(v_elems(i, i + l));
      }
      std::vector<Elem> vs = v_elems(0, i);
      vs.push_back(std::move(inner));
      auto rest = v_elems(i + l, r);
      vs.insert(vs.end(), rest.begin(), rest.end());
      BElem term = M.apply_mu(vs, M.basis_elem(t.m), w_elems(0, s));
      combo_add(total.c, term.c, detail::sign_poly(R, detail::tuple_sparity(C, t.vs, i)), R);
    }

  // (C) mu(v_1..v_r, m, w_1..w_i, m_l(w_{i+1}..), ..), l >= 0
  int base = detail::tuple_sparity(C, t.vs, r) + M.parity(t.m);
  for (int l = 0; l <= s; ++l)
    for (int i = 0; i + l <= s; ++i) {
      Elem inner;
      if (l == 0) {
        int obj = i < s ? t.ws[i].a : t.m.w;
        inner = D.m0_elem(obj);
      } else {
        inner = D.apply_m(w_elems(i, i + l));
      }
      std::vector<Elem> ws = w_elems(0, i);
      ws.push_back(std::move(inner));
      auto rest = w_elems(i + l, s);
      ws.insert(ws.end(), rest.begin(), rest.end());
      BElem term = M.apply_mu(v_elems(0, r), M.basis_elem(t.m), ws);
      combo_add(total.c, term.c,
                detail::sign_poly(R, base + detail::tuple_sparity(D, t.ws, i)), R);
    }
  return total;
}

inline CheckReport check_bimodule(const Bimodule& M) {
  CheckReport rep;
  for (int r = 0; r + 1 <= M.K_max; ++r)
    for (int s = 0; r + s + 1 <= M.K_max; ++s)
      for (const MuKey& t : M.basis_keys(r, s)) {
        BElem res = bimodule_residual(M, t);
        if (!res.is_zero()) {
          rep.pass = false;
          rep.witness = "(" + std::to_string(r) + "|1|" + std::to_string(s) + ") at " + M.key_name(t);
          return rep;
        }
      }
  return rep;
}

/// Diagonal bimodule: spaces are the hom spaces, mu^{r|1|s} = m_{r+s+1}.
/// Module parity is the shifted hom parity |x|+1 (the module slot sits
/// unshifted in the bar picture).
inline Bimodule diagonal(const AInfCategory& C) {
  Bimodule M;
  M.left = &C;
  M.right = &C;
  M.K_max = C.K_max;
  for (const auto& [key, basis] : C.homs) {
    std::vector<GenInfo> sp = basis;
    for (GenInfo& g : sp) g.deg = (g.deg + 1) & 1;
    M.spaces[key] = std::move(sp);
  }
  for (const auto& [t, out] : C.mk) {
    int k = static_cast<int>(t.size());
    for (int pos = 0; pos < k; ++pos) {
      MuKey key;
      key.vs.assign(t.begin(), t.begin() + pos);
      key.m = {t[pos].a, t[pos].b, t[pos].i};
      key.ws.assign(t.begin() + pos + 1, t.end());
      M.mu[key] = out;
    }
  }
  return M;
}

/// Base change along functors F and G (identity object maps allowed): sums
/// mu_M over all block decompositions through the functor components.
inline Bimodule base_change(const AInfFunctor& F, const AInfFunctor& G, const Bimodule& M) {
  const AInfCategory& C1 = *F.src;
  const AInfCategory& D1 = *G.src;
  Bimodule out;
  out.left = &C1;
  out.right = &D1;
  out.K_max = std::min(C1.K_max, D1.K_max);
  // the displayed sums need mu_M up to the full output arity; refuse to
  // truncate silently
  if (M.K_max < out.K_max) throw ArityOverflow();
  for (int x = 0; x < static_cast<int>(C1.objects.size()); ++x)
    for (int y = 0; y < static_cast<int>(D1.objects.size()); ++y) {
      const auto& sp = M.space(F.obj_map[x], G.obj_map[y]);
      if (!sp.empty()) out.spaces[{x, y}] = sp;
    }

  for (int r = 0; r + 1 <= out.K_max; ++r)
    for (int s = 0; r + s + 1 <= out.K_max; ++s)
      for (const MuKey& t : out.basis_keys(r, s)) {
        // enumerate partitions of the v's and w's into nonempty blocks
        Combo acc;
        BGen mm{F.obj_map[t.m.v], G.obj_map[t.m.w], t.m.i};
        std::vector<std::vector<Elem>> vblocks, wblocks;
        std::function<void(int)> rec_w = [&](int pos) {
          if (pos == s) {
            std::vector<Elem> vimg, wimg;
            for (auto& b : vblocks) vimg.push_back(F.apply_f(b));
            for (auto& b : wblocks) wimg.push_back(G.apply_f(b));
            BElem term = M.apply_mu(vimg, M.basis_elem(mm), wimg);
            for (const auto& [i, c] : term.c) combo_add(acc, i, c);
            return;
          }
          for (int end = pos + 1; end <= s; ++end) {
            std::vector<Elem> b;
            for (int j = pos; j < end; ++j) b.push_back(D1.basis_elem(t.ws[j]));
            wblocks.push_back(std::move(b));
            rec_w(end);
            wblocks.pop_back();
          }
        };
        std::function<void(int)> rec_v = [&](int pos) {
          if (pos == r) { rec_w(0); return; }
          for (int end = pos + 1; end <= r; ++end) {
            std::vector<Elem> b;
            for (int j = pos; j < end; ++j) b.push_back(C1.basis_elem(t.vs[j]));
            vblocks.push_back(std::move(b));
            rec_v(end);
            vblocks.pop_back();
          }
        };
        rec_v(0);
        if (!acc.empty()) out.mu[t] = std::move(acc);
      }
  return out;
}

/// Tensor product M (x)_D N with bar length bound L.  Basis generators of the
/// product are chains m (x) d_1 ... d_k (x) n with k <= L.  With `reduced`
/// set, middle letters proportional to a unit are dropped (the normalized bar
/// word complex); the strict unit axioms make this quotient well defined.
struct TensorGen {
  BGen m;
  Tuple ds;
  BGen n;
  auto operator<=>(const TensorGen&) const = default;
};

struct TensorBimodule {
  Bimodule bi;
  std::map<std::pair<int, int>, std::vector<TensorGen>> chains;  // per (C,E) pair
};

inline TensorBimodule tensor(const Bimodule& M, const Bimodule& N, int L, bool reduced = false) {
  if (M.right != N.left) throw RingMismatch();
  const AInfCategory& C = *M.left;
  const AInfCategory& D = *M.right;
  const AInfCategory& E = *N.right;
  const RingCtx& R = C.ring;
  TensorBimodule T;
  Bimodule& out = T.bi;
  out.left = &C;
  out.right = &E;
  out.K_max = std::min(M.K_max, N.K_max);

  // enumerate chains
  for (const auto& [mvw, mbasis] : M.spaces) {
    for (int mi = 0; mi < static_cast<int>(mbasis.size()); ++mi) {
      std::function<void(Tuple&, int)> grow = [&](Tuple& ds, int at) {
        for (const auto& [nvw, nbasis] : N.spaces) {
          if (nvw.first != at) continue;
          for (int ni = 0; ni < static_cast<int>(nbasis.size()); ++ni) {
            TensorGen g{{mvw.first, mvw.second, mi}, ds, {nvw.first, nvw.second, ni}};
            int par = M.parity(g.m) + N.parity(g.n);
            std::string name = M.bgen_name(g.m);
            for (const Gen& d : ds) {
              par += D.sdeg(d);
              name += " (x) " + D.gen_name(d);
            }
            name += " (x) " + N.bgen_name(g.n);
            T.chains[{mvw.first, nvw.second}].push_back(g);
            out.spaces[{mvw.first, nvw.second}].push_back({name, par & 1});
          }
        }
        if (static_cast<int>(ds.size()) == L) return;
        for (const auto& [key, basis] : D.homs) {
          if (key.first != at) continue;
          for (int i = 0; i < static_cast<int>(basis.size()); ++i) {
            if (reduced && key.first == key.second) {
              auto uit = D.units.find(key.first);
              if (uit != D.units.end() && uit->second == i) continue;
            }
            ds.push_back({key.first, key.second, i});
            grow(ds, key.second);
            ds.pop_back();
          }
        }
      };
      Tuple ds;
      grow(ds, mvw.second);
    }
  }

  auto chain_index = [&](int cv, int ew, const TensorGen& g) -> int {
    const auto& list = T.chains.at({cv, ew});
    auto it = std::find(list.begin(), list.end(), g);
    return it == list.end() ? -1 : static_cast<int>(it - list.begin());
  };

  // helper: add (element of M(v,*) (x) tail) to an accumulator over chains
  auto emit = [&](Combo& acc, const BElem& melem, const Tuple& ds, const BElem& nelem,
                  const MPoly& factor, int cv, int ew) {
    for (const auto& [mi, mc] : melem.c)
      for (const auto& [ni, nc] : nelem.c) {
        TensorGen g{{melem.v, melem.w, mi}, ds, {nelem.v, nelem.w, ni}};
        int idx = chain_index(cv, ew, g);
        if (idx < 0) continue;  // beyond the length bound: dropped by filtration
        combo_add(acc, idx, R.mul(factor, R.mul(mc, nc)));
      }
  };

  // structure maps on every chain basis generator
  for (const auto& [ce, list] : T.chains) {
    for (int gi = 0; gi < static_cast<int>(list.size()); ++gi) {
      const TensorGen& g = list[gi];
      int k = static_cast<int>(g.ds.size());
      auto d_elems = [&](int from, int to) {
        std::vector<Elem> v;
        for (int j = from; j < to; ++j) v.push_back(D.basis_elem(g.ds[j]));
        return v;
      };
      int pm = M.parity(g.m);

      // mu^{0|1|0}
      {
        Combo acc;
        // mu_M applied to the head
        for (int i = 0; i <= k; ++i) {
          BElem h = M.apply_mu({}, M.basis_elem(g.m), d_elems(0, i));
          Tuple rest(g.ds.begin() + i, g.ds.end());
          emit(acc, h, rest, N.basis_elem(g.n), R.one(), ce.first, ce.second);
        }
        // inner bar differential (including curvature insertions)
        for (int l = 0; l <= k; ++l)
          for (int i = 0; i + l <= k; ++i) {
            Elem inner;
            if (l == 0) {
              int obj = i < k ? g.ds[i].a : g.n.v;
              inner = D.m0_elem(obj);
            } else {
              inner = D.apply_m(d_elems(i, i + l));
            }
            int sgn = pm;
            for (int j = 0; j < i; ++j) sgn += D.sdeg(g.ds[j]);
            for (const auto& [ii, cc] : inner.c) {
              Tuple ds2(g.ds.begin(), g.ds.begin() + i);
              ds2.push_back({inner.a, inner.b, ii});
              ds2.insert(ds2.end(), g.ds.begin() + i + l, g.ds.end());
              emit(acc, M.basis_elem(g.m), ds2, N.basis_elem(g.n),
                   R.mul(cc, detail::sign_poly(R, sgn)), ce.first, ce.second);
            }
          }
        // mu_N applied to the tail
        for (int i = 0; i <= k; ++i) {
          BElem tail = N.apply_mu(d_elems(i, k), N.basis_elem(g.n), {});
          int sgn = pm;
          for (int j = 0; j < i; ++j) sgn += D.sdeg(g.ds[j]);
          Tuple head(g.ds.begin(), g.ds.begin() + i);
          emit(acc, M.basis_elem(g.m), head, tail, detail::sign_poly(R, sgn), ce.first, ce.second);
        }
        if (!acc.empty()) {
          MuKey key;
          key.m = {ce.first, ce.second, gi};
          out.mu[key] = std::move(acc);
        }
      }

      // mu^{r|1|0}, r >= 1: mu_M absorbs the c's and a prefix of the d's
      for (int r = 1; r + 1 <= out.K_max; ++r) {
        // composable left chains of length r ending at the head object
        std::vector<Tuple> vchains;
        {
          Tuple t;
          std::function<void(int)> fwd = [&](int pos) {
            if (pos == r) {
              if (t.back().b == ce.first) vchains.push_back(t);
              return;
            }
            int from = pos == 0 ? -1 : t.back().b;
            for (const auto& [key, basis] : C.homs) {
              if (pos > 0 && key.first != from) continue;
              for (int i = 0; i < static_cast<int>(basis.size()); ++i) {
                t.push_back({key.first, key.second, i});
                fwd(pos + 1);
                t.pop_back();
              }
            }
          };
          fwd(0);
        }
        for (const Tuple& cs : vchains) {
          Combo acc;
          std::vector<Elem> cels;
          for (const Gen& c : cs) cels.push_back(C.basis_elem(c));
          for (int p = 0; p <= k; ++p) {
            BElem h = M.apply_mu(cels, M.basis_elem(g.m), d_elems(0, p));
            Tuple rest(g.ds.begin() + p, g.ds.end());
            emit(acc, h, rest, N.basis_elem(g.n), R.one(), cs.front().a, ce.second);
          }
          if (!acc.empty()) {
            MuKey key;
            key.vs = cs;
            key.m = {ce.first, ce.second, gi};
            out.mu[key] = std::move(acc);
          }
        }
      }

      // mu^{0|1|s}, s >= 1: mu_N absorbs a suffix of the d's and the e's
      for (int sArity = 1; sArity + 1 <= out.K_max; ++sArity) {
        std::vector<Tuple> all;
        Tuple t;
        std::function<void(int)> fwd = [&](int pos) {
          if (pos == sArity) { all.push_back(t); return; }
          int from = pos == 0 ? ce.second : t.back().b;
          for (const auto& [key, basis] : E.homs) {
            if (key.first != from) continue;
            for (int i = 0; i < static_cast<int>(basis.size()); ++i) {
              t.push_back({key.first, key.second, i});
              fwd(pos + 1);
              t.pop_back();
            }
          }
        };
        fwd(0);
        for (const Tuple& es : all) {
          Combo acc;
          std::vector<Elem> eels;
          for (const Gen& e : es) eels.push_back(E.basis_elem(e));
          for (int p = 0; p <= k; ++p) {
            BElem tail = N.apply_mu(d_elems(p, k), N.basis_elem(g.n), eels);
            int sgn = pm;
            for (int j = 0; j < p; ++j) sgn += D.sdeg(g.ds[j]);
            Tuple head(g.ds.begin(), g.ds.begin() + p);
            emit(acc, M.basis_elem(g.m), head, tail, detail::sign_poly(R, sgn), ce.first,
                 es.back().b);
          }
          if (!acc.empty()) {
            MuKey key;
            key.m = {ce.first, ce.second, gi};
            key.ws = es;
            out.mu[key] = std::move(acc);
          }
        }
      }
    }
  }
  return T;
}

// ---- premorphisms ----------------------------------------------------------

struct Premorphism {
  const Bimodule* src = nullptr;
  const Bimodule* tgt = nullptr;
  int k = 0;  // Z/2 degree
  std::map<MuKey, Combo> comp;

  Combo f_basis(const MuKey& key) const {
    auto it = comp.find(key);
    return it == comp.end() ? Combo{} : it->second;
  }
  BElem apply(const std::vector<Elem>& vs, const BElem& m, const std::vector<Elem>& ws) const {
    int v0 = vs.empty() ? m.v : vs.front().a;
    int wN = ws.empty() ? m.w : ws.back().b;
    BElem out = tgt->zero_elem(v0, wN);
    const RingCtx& R = tgt->ring();
    MuKey key;
    key.vs.resize(vs.size());
    key.ws.resize(ws.size());
    std::function<void(std::size_t, MPoly)> rec_w = [&](std::size_t pos, MPoly factor) {
      if (pos == ws.size()) {
        combo_add(out.c, f_basis(key), factor, R);
        return;
      }
      for (const auto& [i, c] : ws[pos].c) {
        key.ws[pos] = {ws[pos].a, ws[pos].b, i};
        rec_w(pos + 1, R.mul(factor, c));
      }
    };
    std::function<void(std::size_t, MPoly)> rec_v = [&](std::size_t pos, MPoly factor) {
      if (pos == vs.size()) {
        for (const auto& [i, c] : m.c) {
          key.m = {m.v, m.w, i};
          rec_w(0, R.mul(factor, c));
        }
        return;
      }
      for (const auto& [i, c] : vs[pos].c) {
        key.vs[pos] = {vs[pos].a, vs[pos].b, i};
        rec_v(pos + 1, R.mul(factor, c));
      }
    };
    rec_v(0, R.one());
    return out;
  }
};

inline Premorphism identity_premorphism(const Bimodule& M) {
  Premorphism F;
  F.src = &M;
  F.tgt = &M;
  F.k = 0;
  for (const auto& [vw, basis] : M.spaces)
    for (int i = 0; i < static_cast<int>(basis.size()); ++i) {
      MuKey key;
      key.m = {vw.first, vw.second, i};
      Combo c;
      c.emplace(i, M.ring().one());
      F.comp[key] = std::move(c);
    }
  return F;
}

/// delta F = mu_{M'} o F-hat - (-1)^{|F|} F o mu-hat_M, expanded on basis keys.
inline Premorphism premorphism_diff(const Premorphism& F) {
  const Bimodule& M = *F.src;
  const Bimodule& Mp = *F.tgt;
  const AInfCategory& C = *M.left;
  const AInfCategory& D = *M.right;
  const RingCtx& R = M.ring();
  Premorphism out;
  out.src = F.src;
  out.tgt = F.tgt;
  out.k = (F.k + 1) & 1;

  int bound = std::min(M.K_max, Mp.K_max);
  for (int r = 0; r + 1 <= bound; ++r)
    for (int s = 0; r + s + 1 <= bound; ++s)
      for (const MuKey& t : M.basis_keys(r, s)) {
        auto v_elems = [&](int from, int to) {
          std::vector<Elem> v;
          for (int j = from; j < to; ++j) v.push_back(C.basis_elem(t.vs[j]));
          return v;
        };
        auto w_elems = [&](int from, int to) {
          std::vector<Elem> v;
          for (int j = from; j < to; ++j) v.push_back(D.basis_elem(t.ws[j]));
          return v;
        };
        Combo acc;
        // mu' (v.., F(..), w..) with sign |F| * (prefix v)'
        for (int i = 0; i <= r; ++i)
          for (int j = 0; j <= s; ++j) {
            BElem inner = F.apply(v_elems(i, r), M.basis_elem(t.m), w_elems(0, j));
            BElem term = Mp.apply_mu(v_elems(0, i), inner, w_elems(j, s));
            int sgn = F.k * detail::tuple_sparity(C, t.vs, i);
            combo_add(acc, term.c, detail::sign_poly(R, sgn), R);
          }
        // minus (-1)^{|F|} F(v.., mu(..), w..)
        for (int i = 0; i <= r; ++i)
          for (int j = 0; j <= s; ++j) {
            BElem inner = M.apply_mu(v_elems(i, r), M.basis_elem(t.m), w_elems(0, j));
            BElem term = F.apply(v_elems(0, i), inner, w_elems(j, s));
            int sgn = 1 + F.k + detail::tuple_sparity(C, t.vs, i);
            combo_add(acc, term.c, detail::sign_poly(R, sgn), R);
          }
        // minus (-1)^{|F|} F(.. m_l^C(..) .., m, w..), l >= 0
        for (int l = 0; l <= r; ++l)
          for (int i = 0; i + l <= r; ++i) {
            Elem inner;
            if (l == 0) {
              int obj = i < r ? t.vs[i].a : t.m.v;
              inner = C.m0_elem(obj);
            } else {
              inner = C.apply_m(v_elems(i, i + l));
            }
            std::vector<Elem> vs = v_elems(0, i);
            vs.push_back(std::move(inner));
            auto rest = v_elems(i + l, r);
            vs.insert(vs.end(), rest.begin(), rest.end());
            BElem term = F.apply(vs, M.basis_elem(t.m), w_elems(0, s));
            int sgn = 1 + F.k + detail::tuple_sparity(C, t.vs, i);
            combo_add(acc, term.c, detail::sign_poly(R, sgn), R);
          }
        // minus (-1)^{|F|} F(v.., m, .. m_l^D(..) ..), l >= 0
        int base = detail::tuple_sparity(C, t.vs, r) + M.parity(t.m);
        for (int l = 0; l <= s; ++l)
          for (int i = 0; i + l <= s; ++i) {
            Elem inner;
            if (l == 0) {
              int obj = i < s ? t.ws[i].a : t.m.w;
              inner = D.m0_elem(obj);
            } else {
              inner = D.apply_m(w_elems(i, i + l));
            }
            std::vector<Elem> ws = w_elems(0, i);
            ws.push_back(std::move(inner));
            auto rest = w_elems(i + l, s);
            ws.insert(ws.end(), rest.begin(), rest.end());
            BElem term = F.apply(v_elems(0, r), M.basis_elem(t.m), ws);
            int sgn = 1 + F.k + base + detail::tuple_sparity(D, t.ws, i);
            combo_add(acc, term.c, detail::sign_poly(R, sgn), R);
          }
        if (!acc.empty()) out.comp[t] = std::move(acc);
      }
  return out;
}

/// Composition (F' o F), applying F first.
inline Premorphism compose(const Premorphism& Fp, const Premorphism& F) {
  if (F.tgt != Fp.src) throw RingMismatch();
  const Bimodule& M = *F.src;
  const AInfCategory& C = *M.left;
  const AInfCategory& D = *M.right;
  const RingCtx& R = M.ring();
  Premorphism out;
  out.src = F.src;
  out.tgt = Fp.tgt;
  out.k = (F.k + Fp.k) & 1;
  int bound = std::min(M.K_max, Fp.tgt->K_max);
  for (int r = 0; r + 1 <= bound; ++r)
    for (int s = 0; r + s + 1 <= bound; ++s)
      for (const MuKey& t : M.basis_keys(r, s)) {
        auto v_elems = [&](int from, int to) {
          std::vector<Elem> v;
          for (int j = from; j < to; ++j) v.push_back(C.basis_elem(t.vs[j]));
          return v;
        };
        auto w_elems = [&](int from, int to) {
          std::vector<Elem> v;
          for (int j = from; j < to; ++j) v.push_back(D.basis_elem(t.ws[j]));
          return v;
        };
        Combo acc;
        for (int i = 0; i <= r; ++i)
          for (int j = 0; j <= s; ++j) {
            BElem inner = F.apply(v_elems(i, r), M.basis_elem(t.m), w_elems(0, j));
            BElem term = Fp.apply(v_elems(0, i), inner, w_elems(j, s));
            // the inner premorphism acts first and hops over the prefix
            int sgn = F.k * detail::tuple_sparity(C, t.vs, i);
            combo_add(acc, term.c, detail::sign_poly(R, sgn), R);
          }
        if (!acc.empty()) out.comp[t] = std::move(acc);
      }
  return out;
}

inline bool premorphism_is_zero(const Premorphism& F) {
  for (const auto& [k, c] : F.comp)
    if (!c.empty()) return false;
  return true;
}

inline bool premorphism_equal(const Premorphism& A, const Premorphism& B) {
  auto norm = [](const Premorphism& P) {
    std::map<MuKey, Combo> m;
    for (const auto& [k, c] : P.comp)
      if (!c.empty()) m[k] = c;
    return m;
  };
  return norm(A) == norm(B);
}

/// Cohomology-level test of a closed premorphism: [F^{0|1|0}] bijective.
/// Requires field coefficients.
inline bool h0_is_quasi_iso(const Premorphism& F) {
  const Bimodule& M = *F.src;
  const Bimodule& N = *F.tgt;
  if (!M.ring().is_field() || !N.ring().is_field()) throw CoefficientNotField();

  auto as_scalar = [](const MPoly& p) -> NovScalar {
    if (p.is_zero()) return NovScalar();
    if (!p.is_constant()) throw CoefficientNotField();
    return p.constant_term();
  };
  auto diff_matrix = [&](const Bimodule& B, int v, int w) {
    std::size_t n = B.space(v, w).size();
    Mat d = mat_zero(n, n);
    for (std::size_t j = 0; j < n; ++j) {
      MuKey key;
      key.m = {v, w, static_cast<int>(j)};
      for (const auto& [i, c] : B.mu_basis(key)) d[i][j] = as_scalar(c);
    }
    return d;
  };

  for (const auto& [vw, basis] : M.spaces) {
    std::size_t n = basis.size();
    std::size_t n2 = N.space(vw.first, vw.second).size();
    Mat ds = diff_matrix(M, vw.first, vw.second);
    Mat dt = diff_matrix(N, vw.first, vw.second);
    // F^{0|1|0} block
    Mat f = mat_zero(n2, n);
    for (std::size_t j = 0; j < n; ++j) {
      MuKey key;
      key.m = {vw.first, vw.second, static_cast<int>(j)};
      for (const auto& [i, c] : F.f_basis(key)) f[i][j] = as_scalar(c);
    }
    auto Zs = kernel(ds);
    auto Zt = kernel(dt);
    std::size_t bs = mat_rank(ds), bt = mat_rank(dt);
    long hs = static_cast<long>(Zs.size() - bs), ht = static_cast<long>(Zt.size() - bt);
    if (hs != ht) return false;
    if (hs == 0) continue;
    // rank of induced map: rank([f Zs | im dt]) - rank(im dt)
    Mat cols;  // build as rows then use rank (rank is transpose-invariant)
    for (const Vec& z : Zs) {
      Vec fz(n2, NovScalar());
      for (std::size_t i = 0; i < n2; ++i)
        for (std::size_t j = 0; j < n; ++j) fz[i] += f[i][j] * z[j];
      cols.push_back(std::move(fz));
    }
    std::size_t base_rank;
    {
      Mat imrows;
      for (std::size_t j = 0; j < n2; ++j) {
        Vec col(n2, NovScalar());
        bool nz = false;
        for (std::size_t i = 0; i < n2; ++i) {
          col[i] = dt[i][j];
          if (!col[i].is_zero()) nz = true;
        }
        if (nz) imrows.push_back(std::move(col));
      }
      base_rank = mat_rank(imrows);
      Mat both = imrows;
      for (const Vec& r : cols) both.push_back(r);
      long induced = static_cast<long>(mat_rank(both) - base_rank);
      if (induced != hs) return false;
    }
  }
  // N may have spaces at pairs where M has none (then both cohomologies must vanish)
  for (const auto& [vw, basis] : N.spaces) {
    if (M.spaces.count(vw)) continue;
    Mat dt = diff_matrix(N, vw.first, vw.second);
    if (kernel(dt).size() != mat_rank(dt)) return false;
  }
  return true;
}

// ---- JSON ------------------------------------------------------------------

inline json bimodule_to_json(const Bimodule& M) {
  json js = json::object();
  for (const auto& [vw, basis] : M.spaces) {
    json arr = json::array();
    for (const GenInfo& g : basis) arr.push_back(json{{"name", g.name}, {"deg", g.deg}});
    js[M.left->objects[vw.first] + "|" + M.right->objects[vw.second]] = arr;
  }
  json jm = json::array();
  for (const auto& [key, out] : M.mu) {
    json jv = json::array(), jw = json::array(), jo = json::array();
    for (const Gen& g : key.vs) jv.push_back(M.left->gen_name(g));
    for (const Gen& g : key.ws) jw.push_back(M.right->gen_name(g));
    int v0 = key.vs.empty() ? key.m.v : key.vs.front().a;
    int wN = key.ws.empty() ? key.m.w : key.ws.back().b;
    for (const auto& [i, c] : out)
      jo.push_back(json::array(
          {M.bgen_name({v0, wN, i}), c.to_json(M.ring().vars)}));
    jm.push_back(json{{"r", key.vs.size()},
                      {"s", key.ws.size()},
                      {"left", jv},
                      {"m", M.bgen_name(key.m)},
                      {"right", jw},
                      {"output", jo}});
  }
  return json{{"spaces", js}, {"mu", jm}};
}

}  // namespace mforge
