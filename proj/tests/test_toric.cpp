#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mirrorforge/toric.hpp"

using namespace mforge;

namespace {

ToricFanoData cp1_data() { return toric_builtin("CP1"); }

}  // namespace

TEST_CASE("fan validation") {
  ToricFanoData d = cp1_data();
  CHECK_NOTHROW(d.validate());
  // l_j at u = 1/2 are both 1/2
  CHECK(d.l(0, d.basepoint) == Rat(1, 2));
  CHECK(d.l(1, d.basepoint) == Rat(1, 2));

  ToricFanoData bad = d;
  bad.facets[0].normal = {2};
  CHECK_THROWS_AS(bad.validate(), InvalidFan);

  ToricFanoData boundary = d;
  boundary.basepoint = {Rat(0)};
  CHECK_THROWS_AS(boundary.validate(), InvalidFan);

  ToricFanoData outside = d;
  outside.basepoint = {Rat(2)};
  CHECK_THROWS_AS(outside.validate(), InvalidFan);

  CHECK_THROWS_AS(toric_builtin("CP9"), UnknownBuiltin);
}

TEST_CASE("polytope json round trip") {
  ToricFanoData d = toric_builtin("CP1xCP1");
  ToricFanoData e = ToricFanoData::from_json(d.to_json());
  CHECK(e.name == d.name);
  CHECK(e.n == d.n);
  REQUIRE(e.facets.size() == d.facets.size());
  for (std::size_t j = 0; j < d.facets.size(); ++j) {
    CHECK(e.facets[j].normal == d.facets[j].normal);
    CHECK(e.facets[j].constant == d.facets[j].constant);
  }
  CHECK(e.basepoint == d.basepoint);
}

TEST_CASE("superpotential") {
  Potential P = make_potential(cp1_data());
  CHECK(P.N == 2);
  CHECK(P.poly == parse_expr("T^(1/2)*(y1 + y1^-1)", P.var_names()));

  Potential P2 = make_potential(toric_builtin("CP2"));
  CHECK(P2.N == 3);
  CHECK(P2.poly == parse_expr("T^(1/3)*(y1 + y2 + y1^-1*y2^-1)", P2.var_names()));

  // every summand has positive valuation equal to l_j(u)
  ToricFanoData d = toric_builtin("CP2");
  for (std::size_t j = 0; j < P2.z.size(); ++j) {
    REQUIRE(P2.z[j].terms.size() == 1);
    auto v = P2.z[j].terms.begin()->second.t_valuation();
    REQUIRE(v.has_value());
    CHECK(*v == d.l(j, d.basepoint));
    CHECK(*v > 0);
  }
}

TEST_CASE("potential shifts covariantly with the basepoint") {
  ToricFanoData d = cp1_data();
  ToricFanoData d2 = d;
  d2.basepoint = {Rat(1, 4)};
  Potential P = make_potential(d), Q = make_potential(d2);
  // y1 -> T^{u - u'} y1 carries the potential at u' to the one at u
  std::vector<MPoly> img = {
      MPoly::monomial(1, {1}, NovScalar::T_power(d.basepoint[0] - d2.basepoint[0]))};
  CHECK(Q.poly.substitute(img) == P.poly);
  CHECK(jacobian_ring(P).dimension() == jacobian_ring(Q).dimension());
}

TEST_CASE("Jacobian ring dimensions") {
  CHECK(jacobian_ring(make_potential(toric_builtin("CP1"))).dimension() == 2);
  CHECK(jacobian_ring(make_potential(toric_builtin("CP2"))).dimension() == 3);
  CHECK(jacobian_ring(make_potential(toric_builtin("CP1xCP1"))).dimension() == 4);
  CHECK(jacobian_ring(make_potential(toric_builtin("CP3"))).dimension() == 4);
}

TEST_CASE("degenerate potentials are rejected") {
  // a "potential" missing one variable has a positive-dimensional Jacobian
  Potential P;
  P.n = 2;
  P.poly = parse_expr("T*(y1 + y1^-1)", {"y1", "y2"});
  CHECK_THROWS_AS(jacobian_ring(P), NotZeroDimensional);
}

TEST_CASE("critical points of the line") {
  Potential P = make_potential(cp1_data());
  auto pts = critical_points(P, Rat(1, 4));
  REQUIRE(pts.size() == 2);
  // sorted by real part: y = -1 first, then y = +1
  CHECK(std::abs(pts[0].y[0] - std::complex<double>(-1.0, 0.0)) < 1e-9);
  CHECK(std::abs(pts[1].y[0] - std::complex<double>(1.0, 0.0)) < 1e-9);
  for (const auto& p : pts) {
    CHECK(p.multiplicity == 1);
    CHECK(p.morse);
  }
  // critical values +-2 t^{1/2} = +-1 at t0 = 1/4
  CHECK(std::abs(pts[0].value - std::complex<double>(-1.0, 0.0)) < 1e-9);
  CHECK(std::abs(pts[1].value - std::complex<double>(1.0, 0.0)) < 1e-9);
}

TEST_CASE("critical points of the plane") {
  Potential P = make_potential(toric_builtin("CP2"));
  auto pts = critical_points(P, Rat(1, 64));
  REQUIRE(pts.size() == 3);
  // y1 = y2 = omega with omega^3 = 1
  for (const auto& p : pts) {
    CHECK(std::abs(p.y[0] - p.y[1]) < 1e-9);
    CHECK(std::abs(std::pow(p.y[0], 3) - std::complex<double>(1.0, 0.0)) < 1e-8);
    CHECK(p.multiplicity == 1);
    CHECK(p.morse);
  }
  int total = 0;
  for (const auto& p : pts) total += p.multiplicity;
  CHECK(total == jacobian_ring(P).dimension());
}

TEST_CASE("critical values agree across basepoints") {
  ToricFanoData d = toric_builtin("CP2");
  ToricFanoData d2 = d;
  d2.basepoint = {Rat(1, 4), Rat(1, 5)};
  auto a = critical_points(make_potential(d), Rat(1, 64));
  auto b = critical_points(make_potential(d2), Rat(1, 64));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    // critical values are intrinsic; the point lists are sorted the same way
    double best = 1e9;
    for (const auto& q : b) best = std::min(best, std::abs(a[i].value - q.value));
    CHECK(best < 1e-8);
  }
}

TEST_CASE("quantum cohomology presentations") {
  QHPresentation p1 = qh_presentation("CP1");
  CHECK(p1.rank() == 2);
  QHPresentation p2 = qh_presentation("CP2");
  CHECK(p2.rank() == 3);
  CHECK(qh_presentation("CP1xCP1").rank() == 4);
  CHECK(qh_presentation("CP3").rank() == 4);
  CHECK(qh_presentation("CP4").rank() == 5);
}

TEST_CASE("divisor-level closed-string comparison") {
  for (const std::string name : {"CP1", "CP2", "CP1xCP1", "CP3"}) {
    Potential P = make_potential(toric_builtin(name));
    KsReport rep = ks_divisor_check(qh_presentation(name), P);
    CHECK(rep.ok());
    CHECK(rep.qh_rank == rep.jac_dim);
  }
}

TEST_CASE("hand expansion of the line relation") {
  Potential P = make_potential(cp1_data());
  QHPresentation pres = qh_presentation("CP1");
  // z1 z2 - T maps to T^{1/2}y * T^{1/2}y^{-1} - T = 0 identically
  MPoly quantum = pres.relations.back();
  CHECK(quantum.substitute(P.z).is_zero());
}

TEST_CASE("perturbed relation is rejected") {
  Potential P = make_potential(cp1_data());
  QHPresentation pres = qh_presentation("CP1");
  MPoly bad = pres.relations.back() - MPoly::constant(pres.m, NovScalar::T_power(Rat(1)));
  // bad = z1 z2 - 2T
  QHPresentation corrupted = pres;
  corrupted.relations.back() = bad;
  corrupted.qb = quotient_basis(corrupted.relations);
  CHECK_THROWS_AS(ks_divisor_check(corrupted, P), RelationNotKilled);
}
