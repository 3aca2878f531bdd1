#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mirrorforge/ainfty.hpp"

using namespace mforge;

namespace {

RingCtx field() { return RingCtx{}; }

RingCtx poly_ring(std::vector<std::string> vars, int trunc = -1) {
  RingCtx r;
  r.vars = std::move(vars);
  r.trunc = trunc;
  return r;
}

AInfCategory clifford1(const RingCtx& ring, const MPoly& w, const MPoly& u) {
  return curved_clifford(ring, w, {u});
}

/// Two disjoint copies of the one-generator curved Clifford algebra.
AInfCategory double_clifford(const RingCtx& ring, const MPoly& w, const MPoly& u) {
  AInfCategory one = clifford1(ring, w, u);
  AInfCategory C;
  C.ring = ring;
  C.objects = {"L0", "L1"};
  C.K_max = one.K_max;
  for (int o = 0; o < 2; ++o) {
    C.homs[{o, o}] = one.hom(0, 0);
    C.units[o] = 0;
    auto it = one.m0.find(0);
    if (it != one.m0.end()) C.m0[o] = it->second;
    for (const auto& [t, out] : one.mk) {
      Tuple tt = t;
      for (Gen& g : tt) { g.a = o; g.b = o; }
      C.mk[tt] = out;
    }
  }
  return C;
}

}  // namespace

TEST_CASE("curved Clifford algebras satisfy the relations") {
  RingCtx R = field();
  // associative algebra, no curvature
  AInfCategory flat = curved_clifford(R, R.zero(), {R.one()});
  CHECK(check_ainfty(flat).pass);
  CHECK(check_unit(flat, 0).pass);
  CHECK(check_degrees(flat).pass);

  // curvature on: the arity-1 relation m2(m0,x) +- m2(x,m0) = 0 is included
  AInfCategory curved = curved_clifford(R, R.scalar(NovScalar(3)), {R.scalar(NovScalar(2))});
  CHECK(check_ainfty(curved).pass);
  CHECK(check_unit(curved, 0).pass);
  for (int i = 0; i < 2; ++i)
    CHECK(ainfty_residual(curved, {{0, 0, i}}).is_zero());

  // two odd generators
  AInfCategory two = curved_clifford(R, R.one(), {R.scalar(NovScalar(2)), R.scalar(NovScalar(-5))});
  CHECK(check_ainfty(two).pass);
  CHECK(check_unit(two, 0).pass);
  CHECK(check_degrees(two).pass);
  CHECK(two.hom(0, 0).size() == 4);

  // zero generators: just a unital ring with curvature
  AInfCategory ring_only = curved_clifford(R, R.scalar(NovScalar(7)), {});
  CHECK(check_ainfty(ring_only).pass);
  CHECK(check_unit(ring_only, 0).pass);
}

TEST_CASE("sign flip in the product breaks the relation") {
  RingCtx R = field();
  AInfCategory C = curved_clifford(R, R.scalar(NovScalar(3)), {R.one(), R.one()});
  // negate m2(e1, e2) but not m2(e2, e1): associativity breaks
  Tuple key = {{0, 0, 1}, {0, 0, 2}};
  for (auto& [i, c] : C.mk[key]) c = MPoly::constant(0, NovScalar(-1)) * c;
  CheckReport rep = check_ainfty(C);
  CHECK(!rep.pass);
  CHECK(!rep.witness.empty());
}

TEST_CASE("broken unit sign is detected") {
  RingCtx R = field();
  AInfCategory C = curved_clifford(R, R.zero(), {R.one()});
  // drop the (-1)^{|y|} sign on m2(e_gen, unit) for the odd generator
  Tuple key = {{0, 0, 1}, {0, 0, 0}};
  for (auto& [i, c] : C.mk[key]) c = MPoly::constant(0, NovScalar(-1)) * c;
  CHECK(!check_unit(C, 0).pass);
}

TEST_CASE("exponential of a bounding cochain") {
  RingCtx R = poly_ring({"x"});
  MPoly w = parse_expr("T", {"x"});
  MPoly u = parse_expr("2", {"x"});
  AInfCategory C = clifford1(R, w, u);
  CHECK(check_ainfty(C).pass);

  // b = 0 gives back the curvature
  Elem zero_b = C.zero_elem(0, 0);
  Elem m0 = m_exp_b(C, 0, zero_b);
  CHECK(m0.c == C.m0.at(0));

  // b = x e: m(e^b) = (w + u x^2) * unit
  Elem b = C.zero_elem(0, 0);
  b.c.emplace(1, parse_expr("x", {"x"}));
  auto [ok, lambda] = is_weak_mc(C, 0, b);
  CHECK(ok);
  CHECK(lambda == parse_expr("T + 2*x^2", {"x"}));
}

TEST_CASE("two-generator potential") {
  RingCtx R = poly_ring({"x1", "x2"});
  std::vector<std::string> v = R.vars;
  AInfCategory C = curved_clifford(R, parse_expr("T", v),
                                   {parse_expr("1", v), parse_expr("3", v)});
  Elem b = C.zero_elem(0, 0);
  b.c.emplace(1, parse_expr("x1", v));  // e1 has mask 1
  b.c.emplace(2, parse_expr("x2", v));  // e2 has mask 2
  auto [ok, lambda] = is_weak_mc(C, 0, b);
  CHECK(ok);
  CHECK(lambda == parse_expr("T + x1^2 + 3*x2^2", v));
}

TEST_CASE("non-proportional exponential is flagged") {
  RingCtx R = poly_ring({"x"});
  AInfCategory C = clifford1(R, R.zero(), parse_expr("1", {"x"}));
  // corrupt the curvature with an e-component
  Combo bad;
  bad.emplace(1, R.one());
  C.m0[0] = bad;
  Elem b = C.zero_elem(0, 0);
  auto [ok, lambda] = is_weak_mc(C, 0, b);
  CHECK(!ok);
}

TEST_CASE("bounding cochain at zero curvature") {
  RingCtx R = field();
  AInfCategory C = curved_clifford(R, R.zero(), {R.one()});
  auto [ok, lambda] = is_weak_mc(C, 0, C.zero_elem(0, 0));
  CHECK(ok);
  CHECK(lambda.is_zero());
}

TEST_CASE("trivial deformation leaves the category unchanged") {
  RingCtx R = field();
  AInfCategory C = curved_clifford(R, R.zero(), {R.scalar(NovScalar(2))});
  AInfCategory D = deform(C, {});
  CHECK(D.mk == C.mk);
  CHECK(D.m0.empty());
}

TEST_CASE("deformation by a weak bounding cochain") {
  RingCtx R = poly_ring({"x"});
  std::vector<std::string> v = {"x"};
  AInfCategory C = clifford1(R, parse_expr("T", v), parse_expr("2", v));
  Elem b = C.zero_elem(0, 0);
  b.c.emplace(1, parse_expr("x", v));
  AInfCategory D = deform(C, {{0, b}});

  // the deformed category satisfies the relations and keeps its unit
  CHECK(check_ainfty(D).pass);
  CHECK(check_unit(D, 0).pass);
  CHECK(check_degrees(D).pass);

  // curvature becomes the potential times the unit
  Combo want;
  want.emplace(0, parse_expr("T + 2*x^2", v));
  CHECK(D.m0.at(0) == want);

  // the deformed differential squares to zero on every generator
  for (int i = 0; i < 2; ++i) {
    Elem once = D.apply_m({D.basis_elem({0, 0, i})});
    Elem twice = D.apply_m({once});
    CHECK(twice.is_zero());
  }
}

TEST_CASE("mismatched potentials are rejected") {
  RingCtx R = poly_ring({"x"});
  std::vector<std::string> v = {"x"};
  AInfCategory C = double_clifford(R, parse_expr("T", v), parse_expr("1", v));
  Elem b = C.zero_elem(1, 1);
  b.c.emplace(1, parse_expr("x", v));
  // object L0 keeps b = 0 (value T), object L1 gets b = x e (value T + x^2)
  CHECK_THROWS_AS(deform(C, {{1, b}}), PotentialMismatch);
  // matching cochains on both objects are accepted
  Elem b0 = C.zero_elem(0, 0);
  b0.c.emplace(1, parse_expr("x", v));
  AInfCategory D = deform(C, {{0, b0}, {1, b}});
  CHECK(check_ainfty(D).pass);
}

TEST_CASE("identity functor passes, a scaled component fails") {
  RingCtx R = field();
  AInfCategory C = curved_clifford(R, R.scalar(NovScalar(2)), {R.one()});
  AInfFunctor F;
  F.src = &C;
  F.dst = &C;
  F.obj_map = {0};
  for (int i = 0; i < 2; ++i) {
    Combo out;
    out.emplace(i, R.one());
    F.fk[{{0, 0, i}}] = out;
  }
  CHECK(check_functor(F).pass);

  AInfFunctor bad = F;
  for (auto& [i, c] : bad.fk[{{0, 0, 1}}]) c = MPoly::constant(0, NovScalar(2)) * c;
  CHECK(!check_functor(bad).pass);
}

TEST_CASE("structure constants round-trip through json") {
  RingCtx R = poly_ring({"x"}, 5);
  AInfCategory C = clifford1(R, parse_expr("T^(1/2)", {"x"}), parse_expr("x", {"x"}));
  json j = category_to_json(C);
  AInfCategory D = category_from_json(j);
  CHECK(D.objects == C.objects);
  CHECK(D.ring.vars == C.ring.vars);
  CHECK(D.ring.trunc == C.ring.trunc);
  CHECK(D.homs == C.homs);
  CHECK(D.mk == C.mk);
  CHECK(D.m0 == C.m0);
  CHECK(D.units == C.units);
}
