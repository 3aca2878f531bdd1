#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <random>

#include "mirrorforge/laurent.hpp"

using namespace mforge;

namespace {

std::mt19937& rng() {
  static std::mt19937 gen([] {
    const char* s = std::getenv("MIRRORFORGE_SEED");
    return s ? static_cast<unsigned>(std::strtoul(s, nullptr, 10)) : 20240817u;
  }());
  return gen;
}

MPoly random_laurent(int nvars, int nterms, int max_exp = 2) {
  std::uniform_int_distribution<int> e(-max_exp, max_exp), c(-3, 3);
  MPoly p(nvars);
  for (int t = 0; t < nterms; ++t) {
    ExpVec ev(nvars);
    for (auto& x : ev) x = e(rng());
    p.add_term(ev, NovScalar(c(rng())));
  }
  return p;
}

}  // namespace

TEST_CASE("parser basics") {
  std::vector<std::string> vars = {"y1"};
  MPoly p = parse_expr("T^(1/2)*(y1 + y1^-1)", vars);
  CHECK(p.terms.size() == 2);
  NovScalar half = NovScalar::T_power(Rat(1, 2));
  CHECK(p.terms.at(ExpVec{1}) == half);
  CHECK(p.terms.at(ExpVec{-1}) == half);

  CHECK(parse_expr("0", vars).is_zero());

  std::vector<std::string> v2 = {"y1", "y2"};
  MPoly merged = parse_expr("y1*y2^-1 + y1*y2^-1", v2);
  CHECK(merged.terms.size() == 1);
  CHECK(merged.terms.at(ExpVec{1, -1}) == NovScalar(2));

  CHECK_THROWS_AS(parse_expr("y3", v2), UnknownVariable);
  CHECK_THROWS_AS(parse_expr("y1 +", v2), ParseError);
  CHECK_THROWS_AS(parse_expr("(y1", v2), ParseError);
}

TEST_CASE("parser round trips through printing") {
  std::vector<std::string> vars = {"y1", "y2"};
  for (int i = 0; i < 30; ++i) {
    MPoly p = random_laurent(2, 4);
    MPoly q = parse_expr(p.to_string(vars), vars);
    CHECK(p == q);
  }
  // and with fractional T powers
  MPoly p = parse_expr("3/2*T^(2/3)*y1^2*y2^-1 - T*y2 + 5", vars);
  CHECK(parse_expr(p.to_string(vars), vars) == p);
}

TEST_CASE("ring axioms on random polynomials") {
  for (int i = 0; i < 60; ++i) {
    MPoly a = random_laurent(2, 3), b = random_laurent(2, 3), c = random_laurent(2, 3);
    CHECK((a + b) + c == a + (b + c));
    CHECK((a * b) * c == a * (b * c));
    CHECK(a * (b + c) == a * b + a * c);
    CHECK(a * b == b * a);
    CHECK(a - a == MPoly(2));
  }
}

TEST_CASE("log_derivative") {
  std::vector<std::string> vars = {"y1"};
  CHECK(parse_expr("y1", vars).log_derivative(0) == parse_expr("y1", vars));
  CHECK(parse_expr("y1 + y1^-1", vars).log_derivative(0) == parse_expr("y1 - y1^-1", vars));
  CHECK(parse_expr("7", vars).log_derivative(0).is_zero());

  // derivation property
  for (int i = 0; i < 50; ++i) {
    MPoly f = random_laurent(2, 3), g = random_laurent(2, 3);
    for (int v = 0; v < 2; ++v)
      CHECK((f * g).log_derivative(v) ==
            f * g.log_derivative(v) + g * f.log_derivative(v));
  }
}

TEST_CASE("substitution") {
  std::vector<std::string> vars = {"y1", "y2"};
  MPoly f = parse_expr("y1*y2^-1 + y2", vars);
  // y1 -> y1^2, y2 -> y1 (monomial images, so negative powers are fine)
  std::vector<MPoly> images = {MPoly::var(1, 0, 2), MPoly::var(1, 0)};
  MPoly g = f.substitute(images);
  CHECK(g == parse_expr("y1 + y1", {"y1"}));

  MPoly h = parse_expr("y1 + 1", vars);
  std::vector<MPoly> bad = {h, MPoly::var(2, 0)};
  MPoly neg = parse_expr("y1^-1", vars);
  CHECK_THROWS(neg.substitute(bad));
}

TEST_CASE("truncated products") {
  std::vector<std::string> vars = {"x"};
  MPoly f = parse_expr("1 + x + x^2", vars);
  MPoly g = mul_trunc(f, f, 2);
  CHECK(g == parse_expr("1 + 2*x + 3*x^2", vars));
  CHECK(f.pow(2).truncated(2) == g);
}

TEST_CASE("numeric evaluation") {
  std::vector<std::string> vars = {"y1"};
  MPoly f = parse_expr("T^(1/2)*(y1 + y1^-1)", vars);
  auto v = f.eval({std::complex<double>(2.0, 0.0)}, std::complex<double>(0.25, 0.0));
  CHECK(std::abs(v - std::complex<double>(1.25, 0.0)) < 1e-12);
}

TEST_CASE("json round trip") {
  std::vector<std::string> vars = {"y1", "y2"};
  for (int i = 0; i < 20; ++i) {
    MPoly p = random_laurent(2, 4);
    CHECK(MPoly::from_json(p.to_json(vars)) == p);
  }
}
