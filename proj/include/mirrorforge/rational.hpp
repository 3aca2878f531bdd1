#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <optional>
#include <stdexcept>
#include <string>

namespace mforge {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Int rat_num(const Rat& r) { return boost::multiprecision::numerator(r); }
inline Int rat_den(const Rat& r) { return boost::multiprecision::denominator(r); }

/// Canonical "p/q" form (plain "p" when q == 1).
inline std::string rat_str(const Rat& r) {
  std::string s = rat_num(r).str();
  if (rat_den(r) != 1) s += "/" + rat_den(r).str();
  return s;
}

struct ParseError : std::runtime_error {
  std::size_t pos;
  ParseError(const std::string& msg, std::size_t p)
      : std::runtime_error(msg + " (at position " + std::to_string(p) + ")"), pos(p) {}
};

/// Parses "p", "-p", "p/q". Whitespace is not accepted.
inline Rat rat_parse(const std::string& text) {
  std::size_t slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rat(Int(text));
    Int p(text.substr(0, slash));
    Int q(text.substr(slash + 1));
    if (q <= 0) throw std::runtime_error("nonpositive denominator");
    return Rat(p, q);
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad rational '") + text + "': " + e.what(), 0);
  }
}

inline Int int_gcd(Int a, Int b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) { Int t = a % b; a = b; b = t; }
  return a;
}

/// Exact integer n-th root, or nullopt if x is not a perfect n-th power.
inline std::optional<Int> int_nth_root(const Int& x, unsigned n) {
  if (n == 0) throw std::invalid_argument("0th root");
  if (x < 0) {
    if (n % 2 == 0) return std::nullopt;
    auto r = int_nth_root(-x, n);
    if (!r) return std::nullopt;
    return -*r;
  }
  if (x == 0 || x == 1 || n == 1) return x;
  // binary search
  Int lo = 0, hi = x;
  while (lo < hi) {
    Int mid = (lo + hi + 1) / 2;
    Int p = 1;
    bool over = false;
    for (unsigned i = 0; i < n; ++i) {
      p *= mid;
      if (p > x) { over = true; break; }
    }
    if (over) hi = mid - 1; else lo = mid;
  }
  Int p = 1;
  for (unsigned i = 0; i < n; ++i) p *= lo;
  if (p == x) return lo;
  return std::nullopt;
}

/// Exact rational n-th root (positive branch), or nullopt.
inline std::optional<Rat> rat_nth_root(const Rat& x, unsigned n) {
  auto p = int_nth_root(rat_num(x), n);
  if (!p) return std::nullopt;
  auto q = int_nth_root(rat_den(x), n);
  if (!q) return std::nullopt;
  return Rat(*p, *q);
}

}  // namespace mforge
