#pragma once

#include <complex>
#include <numeric>
#include <vector>

#include <nlohmann/json.hpp>

#include "mirrorforge/rational.hpp"

namespace mforge {

using json = nlohmann::ordered_json;

struct ZeroInverse : std::domain_error {
  ZeroInverse() : std::domain_error("inverse of zero") {}
};
struct PoleAtSpecialization : std::domain_error {
  PoleAtSpecialization() : std::domain_error("denominator vanishes at specialization point") {}
};

/// Dense univariate polynomial over Rat.  Coefficient of degree i at c[i];
/// trailing zeros stripped, zero polynomial has empty coefficient vector.
class Poly1 {
 public:
  std::vector<Rat> c;

  Poly1() = default;
  explicit Poly1(Rat r) {
    if (r != 0) c.push_back(std::move(r));
  }
  static Poly1 monomial(long deg, Rat coeff = Rat(1)) {
    Poly1 p;
    if (coeff != 0) {
      p.c.assign(static_cast<std::size_t>(deg) + 1, Rat(0));
      p.c.back() = std::move(coeff);
    }
    return p;
  }

  bool is_zero() const { return c.empty(); }
  long deg() const { return static_cast<long>(c.size()) - 1; }
  /// Lowest nonzero degree; -1 for the zero polynomial.
  long ord() const {
    for (std::size_t i = 0; i < c.size(); ++i)
      if (c[i] != 0) return static_cast<long>(i);
    return -1;
  }
  void normalize() {
    while (!c.empty() && c.back() == 0) c.pop_back();
  }

  friend Poly1 operator+(const Poly1& a, const Poly1& b) {
    Poly1 r;
    r.c.resize(std::max(a.c.size(), b.c.size()), Rat(0));
    for (std::size_t i = 0; i < a.c.size(); ++i) r.c[i] += a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) r.c[i] += b.c[i];
    r.normalize();
    return r;
  }
  friend Poly1 operator-(const Poly1& a, const Poly1& b) {
    Poly1 r;
    r.c.resize(std::max(a.c.size(), b.c.size()), Rat(0));
    for (std::size_t i = 0; i < a.c.size(); ++i) r.c[i] += a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) r.c[i] -= b.c[i];
    r.normalize();
    return r;
  }
  friend Poly1 operator-(const Poly1& a) {
    Poly1 r = a;
    for (auto& x : r.c) x = -x;
    return r;
  }
  friend Poly1 operator*(const Poly1& a, const Poly1& b) {
    if (a.is_zero() || b.is_zero()) return {};
    Poly1 r;
    r.c.assign(a.c.size() + b.c.size() - 1, Rat(0));
    for (std::size_t i = 0; i < a.c.size(); ++i) {
      if (a.c[i] == 0) continue;
      for (std::size_t j = 0; j < b.c.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
    }
    r.normalize();
    return r;
  }
  friend bool operator==(const Poly1& a, const Poly1& b) { return a.c == b.c; }

  /// Quotient and remainder by a nonzero divisor.
  static std::pair<Poly1, Poly1> divmod(Poly1 a, const Poly1& b) {
    if (b.is_zero()) throw std::domain_error("division by zero polynomial");
    Poly1 q;
    if (a.deg() >= b.deg()) q.c.assign(a.deg() - b.deg() + 1, Rat(0));
    while (!a.is_zero() && a.deg() >= b.deg()) {
      Rat f = a.c.back() / b.c.back();
      long shift = a.deg() - b.deg();
      q.c[shift] = f;
      for (std::size_t i = 0; i < b.c.size(); ++i) a.c[i + shift] -= f * b.c[i];
      a.normalize();
    }
    q.normalize();
    return {q, a};
  }

  /// Monic gcd.
  static Poly1 gcd(Poly1 a, Poly1 b) {
    while (!b.is_zero()) {
      Poly1 r = divmod(a, b).second;
      a = b;
      b = r;
    }
    if (!a.is_zero()) {
      Rat lead = a.c.back();
      for (auto& x : a.c) x /= lead;
    }
    return a;
  }

  /// Substitute s -> s^k (k >= 1).
  Poly1 inflate(long k) const {
    if (k == 1) return *this;
    Poly1 r;
    if (is_zero()) return r;
    r.c.assign(static_cast<std::size_t>(deg() * k) + 1, Rat(0));
    for (std::size_t i = 0; i < c.size(); ++i) r.c[i * k] = c[i];
    return r;
  }
  /// Substitute s -> s^{1/k}; all nonzero exponents must be divisible by k.
  Poly1 deflate(long k) const {
    if (k == 1) return *this;
    Poly1 r;
    if (is_zero()) return r;
    r.c.assign(c.size() / k + 1, Rat(0));
    for (std::size_t i = 0; i < c.size(); ++i)
      if (c[i] != 0) r.c[i / k] = c[i];
    r.normalize();
    return r;
  }

  Rat eval(const Rat& x) const {
    Rat v(0);
    for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
    return v;
  }
  std::complex<double> eval(const std::complex<double>& x) const {
    std::complex<double> v(0.0, 0.0);
    for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i].convert_to<double>();
    return v;
  }
};

/// Element of the rational Novikov model: a reduced fraction of polynomials
/// in s, where s = T^{1/N}.  The root denominator N is kept minimal: if every
/// stored exponent is divisible by d | N, the representation is deflated.
class NovScalar {
  Poly1 num_, den_;
  long N_ = 1;

  void reduce() {
    if (num_.is_zero()) {
      num_ = Poly1();
      den_ = Poly1(Rat(1));
      N_ = 1;
      return;
    }
    Poly1 g = Poly1::gcd(num_, den_);
    if (g.deg() > 0 || (g.deg() == 0 && g.c[0] != 1)) {
      num_ = Poly1::divmod(num_, g).first;
      den_ = Poly1::divmod(den_, g).first;
    }
    // monic denominator
    Rat lead = den_.c.back();
    if (lead != 1) {
      for (auto& x : den_.c) x /= lead;
      for (auto& x : num_.c) x /= lead;
    }
    // minimal root denominator
    long d = 0;
    for (std::size_t i = 0; i < num_.c.size(); ++i)
      if (num_.c[i] != 0) d = std::gcd(d, static_cast<long>(i));
    for (std::size_t i = 0; i < den_.c.size(); ++i)
      if (den_.c[i] != 0) d = std::gcd(d, static_cast<long>(i));
    long k = d == 0 ? N_ : std::gcd(d, N_);  // d == 0: constant, fully deflatable
    if (k > 1) {
      num_ = num_.deflate(k);
      den_ = den_.deflate(k);
      N_ /= k;
    }
  }

  NovScalar(Poly1 n, Poly1 d, long N) : num_(std::move(n)), den_(std::move(d)), N_(N) {
    if (den_.is_zero()) throw std::domain_error("zero denominator");
    reduce();
  }

 public:
  NovScalar() : den_(Rat(1)) {}
  NovScalar(long v) : num_(Rat(v)), den_(Rat(1)) {}  // NOLINT: implicit by design
  NovScalar(Rat v) : num_(std::move(v)), den_(Rat(1)) {}

  static NovScalar from_fraction(Poly1 n, Poly1 d, long N) { return NovScalar(std::move(n), std::move(d), N); }
  /// T^{p/q} as s^{p'} with N = q' for the reduced exponent p'/q'.
  static NovScalar T_power(const Rat& e) {
    if (e < 0) {
      NovScalar x = T_power(-e);
      return x.inverse();
    }
    long p = static_cast<long>(rat_num(e));
    long q = static_cast<long>(rat_den(e));
    return NovScalar(Poly1::monomial(p), Poly1(Rat(1)), q);
  }
  static NovScalar s_var(long N = 1) { return NovScalar(Poly1::monomial(1), Poly1(Rat(1)), N); }

  long root_denominator() const { return N_; }
  const Poly1& num() const { return num_; }
  const Poly1& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_one() const { return num_ == den_; }
  bool is_rational() const { return num_.deg() <= 0 && den_.deg() <= 0; }
  Rat as_rational() const {
    if (!is_rational()) throw std::domain_error("not a constant");
    return num_.is_zero() ? Rat(0) : num_.c[0];
  }

  /// Representation with root denominator lifted to a multiple of N.
  NovScalar with_N(long Nn) const {
    if (Nn % N_ != 0) throw std::invalid_argument("root denominator not a multiple");
    long k = Nn / N_;
    NovScalar r;
    r.num_ = num_.inflate(k);
    r.den_ = den_.inflate(k);
    r.N_ = Nn;
    return r;  // stays reduced; no re-canonicalization on purpose
  }

  friend NovScalar operator+(const NovScalar& a, const NovScalar& b) {
    long N = std::lcm(a.N_, b.N_);
    NovScalar x = a.with_N(N), y = b.with_N(N);
    return NovScalar(x.num_ * y.den_ + y.num_ * x.den_, x.den_ * y.den_, N);
  }
  friend NovScalar operator-(const NovScalar& a, const NovScalar& b) {
    long N = std::lcm(a.N_, b.N_);
    NovScalar x = a.with_N(N), y = b.with_N(N);
    return NovScalar(x.num_ * y.den_ - y.num_ * x.den_, x.den_ * y.den_, N);
  }
  friend NovScalar operator-(const NovScalar& a) {
    NovScalar r = a;
    r.num_ = -r.num_;
    return r;
  }
  friend NovScalar operator*(const NovScalar& a, const NovScalar& b) {
    long N = std::lcm(a.N_, b.N_);
    NovScalar x = a.with_N(N), y = b.with_N(N);
    return NovScalar(x.num_ * y.num_, x.den_ * y.den_, N);
  }
  NovScalar inverse() const {
    if (is_zero()) throw ZeroInverse();
    return NovScalar(den_, num_, N_);
  }
  friend NovScalar operator/(const NovScalar& a, const NovScalar& b) { return a * b.inverse(); }
  NovScalar& operator+=(const NovScalar& o) { return *this = *this + o; }
  NovScalar& operator-=(const NovScalar& o) { return *this = *this - o; }
  NovScalar& operator*=(const NovScalar& o) { return *this = *this * o; }

  friend bool operator==(const NovScalar& a, const NovScalar& b) {
    return a.N_ == b.N_ && a.num_ == b.num_ && a.den_ == b.den_;
  }

  /// Minimal T-exponent, or nullopt (+infinity) for zero.
  std::optional<Rat> t_valuation() const {
    if (is_zero()) return std::nullopt;
    return Rat(num_.ord() - den_.ord(), N_);
  }

  /// Exact evaluation at T = t0 > 0; requires t0^{1/N} rational and no pole.
  Rat specialize_rat(const Rat& t0) const {
    if (t0 <= 0) throw std::domain_error("rational specialization needs t0 > 0");
    auto s0 = rat_nth_root(t0, static_cast<unsigned>(N_));
    if (!s0) throw std::domain_error("t0 has no exact rational N-th root");
    Rat d = den_.eval(*s0);
    if (d == 0) throw PoleAtSpecialization();
    return num_.eval(*s0) / d;
  }

  /// Numeric evaluation at T = t0 via the principal root s = t0^{1/N}.
  std::complex<double> specialize(const std::complex<double>& t0) const {
    std::complex<double> s0 = std::pow(t0, 1.0 / static_cast<double>(N_));
    std::complex<double> d = den_.eval(s0);
    if (std::abs(d) < 1e-300) throw PoleAtSpecialization();
    return num_.eval(s0) / d;
  }

  std::string to_string() const {
    auto poly_str = [](const Poly1& p) {
      if (p.is_zero()) return std::string("0");
      std::string out;
      for (std::size_t i = 0; i < p.c.size(); ++i) {
        if (p.c[i] == 0) continue;
        if (!out.empty()) out += p.c[i] > 0 ? "+" : "";
        std::string coeff = rat_str(p.c[i]);
        if (i == 0) {
          out += coeff;
        } else {
          if (coeff == "1") coeff.clear();
          else if (coeff == "-1") coeff = "-";
          out += coeff + "s" + (i > 1 ? "^" + std::to_string(i) : "");
        }
      }
      return out;
    };
    if (is_zero()) return "0";
    // Polynomials in s print in the T-power grammar so output re-parses.
    if (den_.deg() == 0 && den_.c[0] == 1) {
      std::string out;
      for (std::size_t i = 0; i < num_.c.size(); ++i) {
        if (num_.c[i] == 0) continue;
        std::string coeff = rat_str(num_.c[i]);
        std::string term;
        if (i == 0) {
          term = coeff;
        } else {
          std::string tp = N_ == 1 && i == 1
                               ? "T"
                               : "T^(" + rat_str(Rat(i, static_cast<unsigned long>(N_))) + ")";
          if (coeff == "1") term = tp;
          else if (coeff == "-1") term = "-" + tp;
          else term = coeff + "*" + tp;
        }
        if (!out.empty() && term[0] != '-') out += "+";
        out += term;
      }
      return out;
    }
    std::string out = poly_str(num_);
    if (!(den_.deg() == 0 && den_.c[0] == 1)) out = "(" + out + ")/(" + poly_str(den_) + ")";
    if (N_ > 1) out += " [s=T^(1/" + std::to_string(N_) + ")]";
    return out;
  }

  json to_json() const {
    auto poly_json = [](const Poly1& p) {
      json arr = json::array();
      for (std::size_t i = 0; i < p.c.size(); ++i)
        if (p.c[i] != 0) arr.push_back(json::array({i, rat_str(p.c[i])}));
      return arr;
    };
    return json{{"N", N_}, {"numer", poly_json(num_)}, {"denom", poly_json(den_)}};
  }
  static NovScalar from_json(const json& j) {
    auto poly_from = [](const json& arr) {
      Poly1 p;
      for (const auto& e : arr) {
        long d = e.at(0).get<long>();
        if (static_cast<long>(p.c.size()) <= d) p.c.resize(d + 1, Rat(0));
        p.c[d] = rat_parse(e.at(1).get<std::string>());
      }
      p.normalize();
      return p;
    };
    return NovScalar(poly_from(j.at("numer")), poly_from(j.at("denom")), j.at("N").get<long>());
  }
};

}  // namespace mforge
