#pragma once

#include "mirrorforge/laurent.hpp"

namespace mforge {

struct NonConvergent : std::runtime_error {
  NonConvergent() : std::runtime_error("series does not terminate within the arity bound") {}
};
struct PotentialMismatch : std::runtime_error {
  explicit PotentialMismatch(const std::string& what)
      : std::runtime_error("potential values disagree: " + what) {}
};
struct CoefficientNotField : std::runtime_error {
  CoefficientNotField() : std::runtime_error("operation requires field coefficients (no formal variables)") {}
};

/// Coefficient-ring context: the Novikov field extended by central even formal
/// variables, optionally truncated at a total degree in those variables.
struct RingCtx {
  std::vector<std::string> vars;
  int trunc = -1;  // -1: exact polynomial ring; >= 0: drop degrees above trunc

  int nvars() const { return static_cast<int>(vars.size()); }
  bool is_field() const { return vars.empty(); }
  MPoly zero() const { return MPoly(nvars()); }
  MPoly one() const { return MPoly::constant(nvars(), NovScalar(1)); }
  MPoly scalar(NovScalar c) const { return MPoly::constant(nvars(), std::move(c)); }
  MPoly mul(const MPoly& a, const MPoly& b) const {
    return trunc >= 0 ? mul_trunc(a, b, trunc) : a * b;
  }
  MPoly red(const MPoly& a) const { return trunc >= 0 ? a.truncated(trunc) : a; }
};

struct GenInfo {
  std::string name;
  int deg = 0;  // Z/2 degree
  bool operator==(const GenInfo&) const = default;
};

/// Reference to a hom-space basis generator: hom(a, b), index i.
struct Gen {
  int a = 0, b = 0, i = 0;
  auto operator<=>(const Gen&) const = default;
};
using Tuple = std::vector<Gen>;

/// Sparse element of a fixed hom space: basis index -> ring coefficient.
using Combo = std::map<int, MPoly>;

struct Elem {
  int a = -1, b = -1;
  Combo c;
  bool is_zero() const { return c.empty(); }
};

inline void combo_add(Combo& dst, int idx, const MPoly& coeff) {
  if (coeff.is_zero()) return;
  auto [it, fresh] = dst.try_emplace(idx, coeff);
  if (!fresh) {
    it->second += coeff;
    if (it->second.is_zero()) dst.erase(it);
  }
}
inline void combo_add(Combo& dst, const Combo& src, const MPoly& factor, const RingCtx& ring) {
  for (const auto& [i, c] : src) combo_add(dst, i, ring.mul(factor, c));
}

struct CheckReport {
  bool pass = true;
  std::string witness;
  json to_json() const { return json{{"pass", pass}, {"witness", witness}}; }
};

struct AInfCategory {
  RingCtx ring;
  std::vector<std::string> objects;
  std::map<std::pair<int, int>, std::vector<GenInfo>> homs;
  int K_max = 6;
  std::map<int, Combo> m0;   // curvature per object, in hom(A,A)
  std::map<Tuple, Combo> mk; // arity >= 1 structure constants on basis tuples
  std::map<int, int> units;  // object -> unit generator index in hom(A,A)

  const std::vector<GenInfo>& hom(int a, int b) const {
    static const std::vector<GenInfo> empty;
    auto it = homs.find({a, b});
    return it == homs.end() ? empty : it->second;
  }
  int deg(const Gen& g) const { return hom(g.a, g.b)[g.i].deg; }
  int sdeg(const Gen& g) const { return (deg(g) + 1) & 1; }  // shifted parity
  std::string gen_name(const Gen& g) const {
    return objects[g.a] + "|" + objects[g.b] + "|" + hom(g.a, g.b)[g.i].name;
  }

  Elem basis_elem(const Gen& g) const {
    Elem e;
    e.a = g.a;
    e.b = g.b;
    e.c.emplace(g.i, ring.one());
    return e;
  }
  Elem zero_elem(int a, int b) const {
    Elem e;
    e.a = a;
    e.b = b;
    return e;
  }
  Elem m0_elem(int obj) const {
    Elem e = zero_elem(obj, obj);
    auto it = m0.find(obj);
    if (it != m0.end()) e.c = it->second;
    return e;
  }
  Elem unit_elem(int obj) const { return basis_elem({obj, obj, units.at(obj)}); }

  /// Structure constants on a basis tuple (zero when not stored).
  Combo m_basis(const Tuple& t) const {
    auto it = mk.find(t);
    return it == mk.end() ? Combo{} : it->second;
  }

  /// Multilinear extension of m_k, arity >= 1.  Inputs must be composable.
  Elem apply_m(const std::vector<Elem>& xs) const {
    Elem out = zero_elem(xs.front().a, xs.back().b);
    Tuple t(xs.size());
    std::function<void(std::size_t, MPoly)> rec = [&](std::size_t pos, MPoly factor) {
      if (pos == xs.size()) {
        Combo val = m_basis(t);
        combo_add(out.c, val, factor, ring);
        return;
      }
      for (const auto& [i, c] : xs[pos].c) {
        t[pos] = {xs[pos].a, xs[pos].b, i};
        rec(pos + 1, ring.mul(factor, c));
      }
    };
    rec(0, ring.one());
    return out;
  }

  /// All composable basis tuples of the given arity.
  std::vector<Tuple> basis_tuples(int k) const {
    std::vector<Tuple> out;
    Tuple t;
    std::function<void(int)> rec = [&](int pos) {
      if (pos == k) { out.push_back(t); return; }
      int from = pos == 0 ? -1 : t.back().b;
      for (const auto& [key, basis] : homs) {
        if (pos > 0 && key.first != from) continue;
        for (int i = 0; i < static_cast<int>(basis.size()); ++i) {
          t.push_back({key.first, key.second, i});
          rec(pos + 1);
          t.pop_back();
        }
      }
    };
    rec(0);
    return out;
  }

  std::string tuple_name(const Tuple& t) const {
    std::string s = "(";
    for (std::size_t i = 0; i < t.size(); ++i) s += (i ? ", " : "") + gen_name(t[i]);
    return s + ")";
  }
};

/// Curved A-infinity relation residual at one basis tuple: the signed sum of
/// all ways to apply an inner operation (arity 0..n) inside the outer one.
inline Elem ainfty_residual(const AInfCategory& C, const Tuple& t) {
  int n = static_cast<int>(t.size());
  Elem total = C.zero_elem(t.front().a, t.back().b);
  for (int len = 0; len <= n; ++len) {
    for (int i = 0; i + len <= n; ++i) {
      int sign = 0;
      for (int j = 0; j < i; ++j) sign += C.sdeg(t[j]);
      Elem inner;
      if (len == 0) {
        int obj = i < n ? t[i].a : t[n - 1].b;
        inner = C.m0_elem(obj);
      } else {
        std::vector<Elem> sub;
        for (int j = i; j < i + len; ++j) sub.push_back(C.basis_elem(t[j]));
        inner = C.apply_m(sub);
      }
      std::vector<Elem> outer;
      for (int j = 0; j < i; ++j) outer.push_back(C.basis_elem(t[j]));
      outer.push_back(std::move(inner));
      for (int j = i + len; j < n; ++j) outer.push_back(C.basis_elem(t[j]));
      Elem term = C.apply_m(outer);
      MPoly f = C.ring.scalar(NovScalar(sign % 2 ? -1 : 1));
      combo_add(total.c, term.c, f, C.ring);
    }
  }
  return total;
}

inline CheckReport check_ainfty(const AInfCategory& C) {
  CheckReport rep;
  for (int n = 1; n <= C.K_max; ++n) {
    for (const Tuple& t : C.basis_tuples(n)) {
      Elem r = ainfty_residual(C, t);
      if (!r.is_zero()) {
        rep.pass = false;
        rep.witness = "arity " + std::to_string(n) + " at " + C.tuple_name(t);
        return rep;
      }
    }
  }
  return rep;
}

inline CheckReport check_unit(const AInfCategory& C, int obj) {
  CheckReport rep;
  auto fail = [&](const std::string& w) {
    rep.pass = false;
    rep.witness = w;
    return rep;
  };
  auto it = C.units.find(obj);
  if (it == C.units.end()) return fail("no unit declared");
  Gen e{obj, obj, it->second};
  // m2(e, x) = x on hom(obj, B); m2(y, e) = (-1)^{|y|} y on hom(B, obj)
  for (const auto& [key, basis] : C.homs) {
    for (int i = 0; i < static_cast<int>(basis.size()); ++i) {
      if (key.first == obj) {
        Gen x{key.first, key.second, i};
        Combo got = C.m_basis({e, x});
        Combo want;
        want.emplace(i, C.ring.one());
        if (got != want) return fail("m2(e, " + C.gen_name(x) + ")");
      }
      if (key.second == obj) {
        Gen y{key.first, key.second, i};
        Combo got = C.m_basis({y, e});
        Combo want;
        want.emplace(i, C.ring.scalar(NovScalar(C.deg(y) % 2 ? -1 : 1)));
        if (got != want) return fail("m2(" + C.gen_name(y) + ", e)");
      }
    }
  }
  // m_k(..., e, ...) = 0 for k != 2
  for (int k = 1; k <= C.K_max; ++k) {
    if (k == 2) continue;
    for (const auto& [t, val] : C.mk) {
      if (static_cast<int>(t.size()) != k || val.empty()) continue;
      for (const Gen& g : t)
        if (g.a == obj && g.b == obj && g.i == e.i)
          return fail("m" + std::to_string(k) + " with a unit input at " + C.tuple_name(t));
    }
  }
  return rep;
}

/// m(e^b) = m0 + m1(b) + m2(b,b) + ... (terminates within K_max or throws).
inline Elem m_exp_b(const AInfCategory& C, int obj, const Elem& b) {
  Elem total = C.m0_elem(obj);
  for (int k = 1; k <= C.K_max; ++k) {
    std::vector<Elem> xs(k, b);
    Elem term = C.apply_m(xs);
    if (k == C.K_max && !term.is_zero()) throw NonConvergent();
    for (const auto& [i, c] : term.c) combo_add(total.c, i, c);
  }
  return total;
}

/// Weak Maurer-Cartan test: m(e^b) proportional to the unit.  Returns the
/// proportionality factor (the superpotential value), a ring element.
inline std::pair<bool, MPoly> is_weak_mc(const AInfCategory& C, int obj, const Elem& b) {
  Elem v = m_exp_b(C, obj, b);
  int e = C.units.at(obj);
  MPoly lambda = C.ring.zero();
  for (const auto& [i, c] : v.c) {
    if (i != e) return {false, C.ring.zero()};
    lambda = c;
  }
  return {true, lambda};
}

/// Deformation of the category by weak bounding cochains with a common
/// potential value: m^b_k inserts b-powers at every slot.
inline AInfCategory deform(const AInfCategory& C, const std::map<int, Elem>& bs) {
  // validate: every object carries a datum with one common potential value
  MPoly lambda = C.ring.zero();
  bool first = true;
  for (int obj = 0; obj < static_cast<int>(C.objects.size()); ++obj) {
    Elem b = C.zero_elem(obj, obj);
    auto it = bs.find(obj);
    if (it != bs.end()) b = it->second;
    auto [ok, l] = is_weak_mc(C, obj, b);
    if (!ok) throw PotentialMismatch("object " + C.objects[obj] + " is not weakly unobstructed");
    if (first) {
      lambda = l;
      first = false;
    } else if (!(lambda == l)) {
      throw PotentialMismatch("object " + C.objects[obj]);
    }
  }
  auto b_of = [&](int obj) {
    auto it = bs.find(obj);
    return it == bs.end() ? C.zero_elem(obj, obj) : it->second;
  };

  AInfCategory D = C;
  D.mk.clear();
  D.m0.clear();
  for (int obj = 0; obj < static_cast<int>(C.objects.size()); ++obj) {
    Combo c;
    combo_add(c, C.units.at(obj), lambda);
    if (!c.empty()) D.m0[obj] = std::move(c);
  }
  for (int k = 1; k <= C.K_max; ++k) {
    for (const Tuple& t : C.basis_tuples(k)) {
      Combo out;
      // insertion counts l_0..l_k with k + sum <= K_max
      std::vector<int> ls(k + 1, 0);
      std::function<void(int, int)> rec = [&](int pos, int used) {
        if (pos == k + 1) {
          std::vector<Elem> xs;
          for (int j = 0; j <= k; ++j) {
            int obj = j < k ? t[j].a : t[k - 1].b;
            for (int r = 0; r < ls[j]; ++r) xs.push_back(b_of(obj));
            if (j < k) xs.push_back(C.basis_elem(t[j]));
          }
          Elem term = C.apply_m(xs);
          for (const auto& [i, c] : term.c) combo_add(out, i, c);
          return;
        }
        for (ls[pos] = 0; used + ls[pos] + k <= C.K_max; ++ls[pos]) rec(pos + 1, used + ls[pos]);
        ls[pos] = 0;
      };
      rec(0, 0);
      if (!out.empty()) D.mk[t] = std::move(out);
    }
  }
  return D;
}

struct AInfFunctor {
  const AInfCategory* src = nullptr;
  const AInfCategory* dst = nullptr;
  std::vector<int> obj_map;
  std::map<Tuple, Combo> fk;  // F_k on basis tuples of src; values in hom(F a0, F ak) of dst

  Combo f_basis(const Tuple& t) const {
    auto it = fk.find(t);
    return it == fk.end() ? Combo{} : it->second;
  }
  /// Multilinear extension of F_k to elements.
  Elem apply_f(const std::vector<Elem>& xs) const {
    Elem out = dst->zero_elem(obj_map[xs.front().a], obj_map[xs.back().b]);
    Tuple t(xs.size());
    std::function<void(std::size_t, MPoly)> rec = [&](std::size_t pos, MPoly factor) {
      if (pos == xs.size()) {
        combo_add(out.c, f_basis(t), factor, dst->ring);
        return;
      }
      for (const auto& [i, c] : xs[pos].c) {
        t[pos] = {xs[pos].a, xs[pos].b, i};
        rec(pos + 1, dst->ring.mul(factor, c));
      }
    };
    rec(0, dst->ring.one());
    return out;
  }
};

/// Functor-equation residual on a source basis tuple (arity >= 1): the signed
/// sum of F applied after every inner operation, minus the target operations
/// applied to all block decompositions through F.
inline Elem functor_residual(const AInfFunctor& F, const Tuple& t) {
  const AInfCategory& C = *F.src;
  const AInfCategory& D = *F.dst;
  int n = static_cast<int>(t.size());
  Elem total = D.zero_elem(F.obj_map[t.front().a], F.obj_map[t.back().b]);

  // F(... m_inner ...)
  for (int len = 0; len <= n; ++len) {
    for (int i = 0; i + len <= n; ++i) {
      int sign = 0;
      for (int j = 0; j < i; ++j) sign += C.sdeg(t[j]);
      Elem inner;
      if (len == 0) {
        int obj = i < n ? t[i].a : t[n - 1].b;
        inner = C.m0_elem(obj);
      } else {
        std::vector<Elem> sub;
        for (int j = i; j < i + len; ++j) sub.push_back(C.basis_elem(t[j]));
        inner = C.apply_m(sub);
      }
      std::vector<Elem> outer;
      for (int j = 0; j < i; ++j) outer.push_back(C.basis_elem(t[j]));
      outer.push_back(std::move(inner));
      for (int j = i + len; j < n; ++j) outer.push_back(C.basis_elem(t[j]));
      Elem term = F.apply_f(outer);
      combo_add(total.c, term.c, D.ring.scalar(NovScalar(sign % 2 ? -1 : 1)), D.ring);
    }
  }

  // minus m^D_r(F(block_1), ..., F(block_r)) over all cut sets in {1..n-1}
  std::vector<int> cuts;
  std::function<void(int)> rec = [&](int p) {
    if (p == n) {
      std::vector<Elem> blocks;
      int start = 0;
      for (std::size_t ci = 0; ci <= cuts.size(); ++ci) {
        int end = ci < cuts.size() ? cuts[ci] : n;
        std::vector<Elem> sub;
        for (int j = start; j < end; ++j) sub.push_back(C.basis_elem(t[j]));
        blocks.push_back(F.apply_f(sub));
        start = end;
      }
      Elem term = D.apply_m(blocks);
      combo_add(total.c, term.c, D.ring.scalar(NovScalar(-1)), D.ring);
      return;
    }
    rec(p + 1);
    cuts.push_back(p);
    rec(p + 1);
    cuts.pop_back();
  };
  rec(1);
  return total;
}

inline CheckReport check_functor(const AInfFunctor& F) {
  CheckReport rep;
  for (int n = 1; n <= F.src->K_max; ++n) {
    for (const Tuple& t : F.src->basis_tuples(n)) {
      Elem r = functor_residual(F, t);
      if (!r.is_zero()) {
        rep.pass = false;
        rep.witness = "arity " + std::to_string(n) + " at " + F.src->tuple_name(t);
        return rep;
      }
    }
  }
  return rep;
}

/// One-object curved Clifford category: odd generators e_i with e_i e_j =
/// -e_j e_i, e_i^2 = u_i, curvature m0 = w, and the product carrying the
/// Koszul sign (-1)^{|x| |y|'}.
inline AInfCategory curved_clifford(RingCtx ring, const MPoly& w, const std::vector<MPoly>& u) {
  int n = static_cast<int>(u.size());
  AInfCategory C;
  C.ring = std::move(ring);
  C.objects = {"L"};
  std::vector<GenInfo> basis;
  for (int mask = 0; mask < (1 << n); ++mask) {
    std::string name;
    if (mask == 0) {
      name = "1";
    } else {
      name = "e";
      for (int i = 0; i < n; ++i)
        if (mask & (1 << i)) name += std::to_string(i + 1);
    }
    basis.push_back({name, __builtin_popcount(static_cast<unsigned>(mask)) & 1});
  }
  C.homs[{0, 0}] = basis;
  C.units[0] = 0;
  if (!w.is_zero()) {
    Combo c;
    c.emplace(0, C.ring.red(w));
    C.m0[0] = std::move(c);
  }
  // m2 on basis pairs
  for (int s = 0; s < (1 << n); ++s) {
    for (int tmask = 0; tmask < (1 << n); ++tmask) {
      // Clifford product sign: each generator of tmask hops over the larger
      // generators of s
      int swaps = 0;
      for (int i = 0; i < n; ++i) {
        if (!(tmask & (1 << i))) continue;
        for (int j = i + 1; j < n; ++j)
          if (s & (1 << j)) ++swaps;
      }
      MPoly coeff = C.ring.one();
      for (int i = 0; i < n; ++i)
        if ((s & (1 << i)) && (tmask & (1 << i))) coeff = C.ring.mul(coeff, u[i]);
      int ds = __builtin_popcount(static_cast<unsigned>(s)) & 1;
      int dt = __builtin_popcount(static_cast<unsigned>(tmask)) & 1;
      int sign = (swaps + ds * (dt + 1)) & 1;  // Clifford swaps plus |x||y|'
      if (sign) coeff = C.ring.mul(coeff, C.ring.scalar(NovScalar(-1)));
      if (coeff.is_zero()) continue;
      Combo out;
      out.emplace(s ^ tmask, std::move(coeff));
      C.mk[{{0, 0, s}, {0, 0, tmask}}] = std::move(out);
    }
  }
  return C;
}

/// Generator-wise degree bookkeeping: every stored operation output has parity
/// (sum of input parities) + arity.
inline CheckReport check_degrees(const AInfCategory& C) {
  CheckReport rep;
  // formal coefficient variables are even and central, so parity is carried
  // entirely by the generators
  for (const auto& [t, out] : C.mk) {
    int want = static_cast<int>(t.size());
    for (const Gen& g : t) want += C.deg(g);
    want &= 1;
    for (const auto& [i, c] : out) {
      Gen og{t.front().a, t.back().b, i};
      if (C.deg(og) != want) {
        rep.pass = false;
        rep.witness = "degree of m" + std::to_string(t.size()) + C.tuple_name(t);
        return rep;
      }
    }
  }
  for (const auto& [obj, out] : C.m0) {
    for (const auto& [i, c] : out) {
      if (C.deg({obj, obj, i}) != 0) {
        rep.pass = false;
        rep.witness = "degree of m0 at " + C.objects[obj];
        return rep;
      }
    }
  }
  return rep;
}

// ---- JSON (structure-constant schema) --------------------------------------

inline json category_to_json(const AInfCategory& C) {
  json jh = json::object();
  for (const auto& [key, basis] : C.homs) {
    json arr = json::array();
    for (const GenInfo& g : basis) arr.push_back(json{{"name", g.name}, {"deg", g.deg}});
    jh[C.objects[key.first] + "|" + C.objects[key.second]] = arr;
  }
  json jm = json::array();
  for (const auto& [obj, out] : C.m0) {
    json jout = json::array();
    for (const auto& [i, c] : out)
      jout.push_back(json::array({C.gen_name({obj, obj, i}), c.to_json(C.ring.vars)}));
    jm.push_back(json{{"k", 0}, {"inputs", json::array({C.objects[obj]})}, {"output", jout}});
  }
  for (const auto& [t, out] : C.mk) {
    json jin = json::array();
    for (const Gen& g : t) jin.push_back(C.gen_name(g));
    json jout = json::array();
    for (const auto& [i, c] : out)
      jout.push_back(json::array({C.gen_name({t.front().a, t.back().b, i}), c.to_json(C.ring.vars)}));
    jm.push_back(json{{"k", static_cast<int>(t.size())}, {"inputs", jin}, {"output", jout}});
  }
  json ju = json::object();
  for (const auto& [obj, i] : C.units) ju[C.objects[obj]] = C.hom(obj, obj)[i].name;
  return json{{"objects", C.objects},
              {"ring", json{{"vars", C.ring.vars}, {"trunc", C.ring.trunc}}},
              {"K_max", C.K_max},
              {"homs", jh},
              {"m", jm},
              {"units", ju}};
}

inline AInfCategory category_from_json(const json& j) {
  AInfCategory C;
  C.objects = j.at("objects").get<std::vector<std::string>>();
  C.ring.vars = j.at("ring").at("vars").get<std::vector<std::string>>();
  C.ring.trunc = j.at("ring").at("trunc").get<int>();
  C.K_max = j.at("K_max").get<int>();
  auto obj_index = [&](const std::string& name) {
    auto it = std::find(C.objects.begin(), C.objects.end(), name);
    if (it == C.objects.end()) throw std::runtime_error("unknown object " + name);
    return static_cast<int>(it - C.objects.begin());
  };
  for (const auto& [key, arr] : j.at("homs").items()) {
    auto bar = key.find('|');
    int a = obj_index(key.substr(0, bar)), b = obj_index(key.substr(bar + 1));
    std::vector<GenInfo> basis;
    for (const auto& g : arr)
      basis.push_back({g.at("name").get<std::string>(), g.at("deg").get<int>()});
    C.homs[{a, b}] = std::move(basis);
  }
  auto gen_ref = [&](const std::string& ref) {
    auto p1 = ref.find('|');
    auto p2 = ref.find('|', p1 + 1);
    int a = obj_index(ref.substr(0, p1)), b = obj_index(ref.substr(p1 + 1, p2 - p1 - 1));
    std::string name = ref.substr(p2 + 1);
    const auto& basis = C.hom(a, b);
    for (int i = 0; i < static_cast<int>(basis.size()); ++i)
      if (basis[i].name == name) return Gen{a, b, i};
    throw std::runtime_error("unknown generator " + ref);
  };
  for (const auto& entry : j.at("m")) {
    int k = entry.at("k").get<int>();
    Combo out;
    int oa = -1, ob = -1;
    if (k == 0) {
      oa = ob = obj_index(entry.at("inputs")[0].get<std::string>());
    }
    Tuple t;
    if (k > 0) {
      for (const auto& r : entry.at("inputs")) t.push_back(gen_ref(r.get<std::string>()));
      oa = t.front().a;
      ob = t.back().b;
    }
    for (const auto& o : entry.at("output")) {
      Gen g = gen_ref(o[0].get<std::string>());
      if (g.a != oa || g.b != ob) throw std::runtime_error("output in the wrong hom space");
      combo_add(out, g.i, MPoly::from_json(o[1]));
    }
    if (k == 0) C.m0[oa] = std::move(out);
    else C.mk[t] = std::move(out);
  }
  for (const auto& [obj, name] : j.at("units").items()) {
    int a = obj_index(obj);
    const auto& basis = C.hom(a, a);
    for (int i = 0; i < static_cast<int>(basis.size()); ++i)
      if (basis[i].name == name.get<std::string>()) C.units[a] = i;
  }
  return C;
}

}  // namespace mforge
