#pragma once

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mirrorforge/novikov.hpp"

namespace mforge {

struct UnknownVariable : std::runtime_error {
  explicit UnknownVariable(const std::string& v) : std::runtime_error("unknown variable '" + v + "'") {}
};
struct RingMismatch : std::runtime_error {
  RingMismatch() : std::runtime_error("operands belong to different rings") {}
};

using ExpVec = std::vector<int>;

/// Sparse multivariate Laurent polynomial over NovScalar.  Terms are keyed by
/// integer exponent vectors (negative exponents allowed); zero coefficients
/// are never stored.
struct MPoly {
  int nvars = 0;
  std::map<ExpVec, NovScalar> terms;

  MPoly() = default;
  explicit MPoly(int n) : nvars(n) {}

  static MPoly constant(int n, NovScalar c) {
    MPoly p(n);
    if (!c.is_zero()) p.terms.emplace(ExpVec(n, 0), std::move(c));
    return p;
  }
  static MPoly monomial(int n, ExpVec e, NovScalar c = NovScalar(1)) {
    MPoly p(n);
    if (!c.is_zero()) p.terms.emplace(std::move(e), std::move(c));
    return p;
  }
  static MPoly var(int n, int i, int power = 1) {
    ExpVec e(n, 0);
    e[i] = power;
    return monomial(n, std::move(e));
  }

  bool is_zero() const { return terms.empty(); }
  bool is_constant() const {
    return terms.empty() || (terms.size() == 1 && terms.begin()->first == ExpVec(nvars, 0));
  }
  NovScalar constant_term() const {
    auto it = terms.find(ExpVec(nvars, 0));
    return it == terms.end() ? NovScalar() : it->second;
  }

  void add_term(const ExpVec& e, const NovScalar& c) {
    if (c.is_zero()) return;
    auto [it, fresh] = terms.try_emplace(e, c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero()) terms.erase(it);
    }
  }

  friend MPoly operator+(const MPoly& a, const MPoly& b) {
    if (a.nvars != b.nvars) throw RingMismatch();
    MPoly r = a;
    for (const auto& [e, c] : b.terms) r.add_term(e, c);
    return r;
  }
  friend MPoly operator-(const MPoly& a, const MPoly& b) {
    if (a.nvars != b.nvars) throw RingMismatch();
    MPoly r = a;
    for (const auto& [e, c] : b.terms) r.add_term(e, -c);
    return r;
  }
  friend MPoly operator-(const MPoly& a) {
    MPoly r = a;
    for (auto& [e, c] : r.terms) c = -c;
    return r;
  }
  friend MPoly operator*(const MPoly& a, const MPoly& b) {
    if (a.nvars != b.nvars) throw RingMismatch();
    MPoly r(a.nvars);
    ExpVec e(a.nvars);
    for (const auto& [ea, ca] : a.terms)
      for (const auto& [eb, cb] : b.terms) {
        for (int i = 0; i < a.nvars; ++i) e[i] = ea[i] + eb[i];
        r.add_term(e, ca * cb);
      }
    return r;
  }
  friend MPoly operator*(const NovScalar& c, const MPoly& a) {
    MPoly r(a.nvars);
    for (const auto& [e, x] : a.terms) r.add_term(e, c * x);
    return r;
  }
  MPoly& operator+=(const MPoly& o) { return *this = *this + o; }
  MPoly& operator-=(const MPoly& o) { return *this = *this - o; }
  MPoly& operator*=(const MPoly& o) { return *this = *this * o; }
  friend bool operator==(const MPoly& a, const MPoly& b) {
    return a.nvars == b.nvars && a.terms == b.terms;
  }

  MPoly pow(int k) const {
    MPoly r = constant(nvars, NovScalar(1));
    for (int i = 0; i < k; ++i) r = r * (*this);
    return r;
  }

  /// Product with every output term of total degree > cap dropped.
  friend MPoly mul_trunc(const MPoly& a, const MPoly& b, int cap) {
    if (a.nvars != b.nvars) throw RingMismatch();
    MPoly r(a.nvars);
    ExpVec e(a.nvars);
    for (const auto& [ea, ca] : a.terms)
      for (const auto& [eb, cb] : b.terms) {
        int tot = 0;
        for (int i = 0; i < a.nvars; ++i) {
          e[i] = ea[i] + eb[i];
          tot += e[i];
        }
        if (tot > cap) continue;
        r.add_term(e, ca * cb);
      }
    return r;
  }
  MPoly truncated(int cap) const {
    MPoly r(nvars);
    for (const auto& [e, c] : terms) {
      int tot = 0;
      for (int x : e) tot += x;
      if (tot <= cap) r.add_term(e, c);
    }
    return r;
  }

  int total_degree() const {  // max total degree; 0 for the zero polynomial
    int d = 0;
    for (const auto& [e, c] : terms) {
      int tot = 0;
      for (int x : e) tot += x;
      d = std::max(d, tot);
    }
    return d;
  }

  /// y_i d/dy_i: each term c*y^a picks up a factor a_i.
  MPoly log_derivative(int i) const {
    MPoly r(nvars);
    for (const auto& [e, c] : terms) {
      if (e[i] == 0) continue;
      r.add_term(e, NovScalar(Rat(e[i])) * c);
    }
    return r;
  }

  /// Substitute variable i -> image (Laurent substitution requires image
  /// invertible for negative exponents; only monomial images support that).
  MPoly substitute(const std::vector<MPoly>& images) const {
    if (static_cast<int>(images.size()) != nvars) throw RingMismatch();
    int m = images.empty() ? 0 : images[0].nvars;
    MPoly r(m);
    for (const auto& [e, c] : terms) {
      MPoly t = MPoly::constant(m, c);
      for (int i = 0; i < nvars; ++i) {
        if (e[i] == 0) continue;
        if (e[i] > 0) {
          t = t * images[i].pow(e[i]);
        } else {
          // require a single-term image so the inverse is a monomial
          if (images[i].terms.size() != 1)
            throw std::domain_error("negative power of a non-monomial substitution image");
          const auto& [ie, ic] = *images[i].terms.begin();
          ExpVec inv(m);
          for (int k = 0; k < m; ++k) inv[k] = -ie[k];
          t = t * MPoly::monomial(m, inv, ic.inverse()).pow(-e[i]);
        }
      }
      r += t;
    }
    return r;
  }

  std::complex<double> eval(const std::vector<std::complex<double>>& y,
                            const std::complex<double>& t0) const {
    std::complex<double> v(0.0, 0.0);
    for (const auto& [e, c] : terms) {
      std::complex<double> t = c.specialize(t0);
      for (int i = 0; i < nvars; ++i)
        if (e[i] != 0) t *= std::pow(y[i], e[i]);
      v += t;
    }
    return v;
  }

  std::string to_string(const std::vector<std::string>& vars) const {
    if (terms.empty()) return "0";
    std::string out;
    for (const auto& [e, c] : terms) {
      std::string mono;
      for (int i = 0; i < nvars; ++i) {
        if (e[i] == 0) continue;
        if (!mono.empty()) mono += "*";
        mono += vars[i];
        if (e[i] != 1) mono += "^" + std::to_string(e[i]);
      }
      std::string cs = c.to_string();
      std::string term;
      if (mono.empty()) term = cs;
      else if (cs == "1") term = mono;
      else if (cs == "-1") term = "-" + mono;
      else if (cs.find('+') != std::string::npos || cs.find('/') != std::string::npos ||
               (cs.find('-') != std::string::npos && cs.find('-') != 0))
        term = "(" + cs + ")*" + mono;
      else term = cs + "*" + mono;
      if (!out.empty() && term[0] != '-') out += " + ";
      else if (!out.empty()) { out += " - "; term = term.substr(1); }
      out += term;
    }
    return out;
  }

  json to_json(const std::vector<std::string>& vars) const {
    json jt = json::array();
    for (const auto& [e, c] : terms)
      jt.push_back(json{{"exp", e}, {"coeff", c.to_json()}});
    return json{{"vars", vars}, {"terms", jt}};
  }
  static MPoly from_json(const json& j) {
    MPoly p(static_cast<int>(j.at("vars").size()));
    for (const auto& t : j.at("terms"))
      p.add_term(t.at("exp").get<ExpVec>(), NovScalar::from_json(t.at("coeff")));
    return p;
  }
};

/// Recursive-descent parser for the expression grammar:
/// rationals, T^(p/q) (or plain T), var^int (negative allowed), +, -, *, parentheses.
class ExprParser {
 public:
  ExprParser(std::string text, std::vector<std::string> vars)
      : text_(std::move(text)), vars_(std::move(vars)) {}

  MPoly parse() {
    MPoly r = expr();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("trailing input", pos_);
    return r;
  }

 private:
  std::string text_;
  std::vector<std::string> vars_;
  std::size_t pos_ = 0;
  int n() const { return static_cast<int>(vars_.size()); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) { ++pos_; return true; }
    return false;
  }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  MPoly expr() {
    MPoly r = eat('-') ? -term() : term();
    for (;;) {
      if (eat('+')) r += term();
      else if (eat('-')) r -= term();
      else return r;
    }
  }
  MPoly term() {
    MPoly r = factor();
    while (eat('*')) r *= factor();
    return r;
  }

  long parse_int() {
    skip_ws();
    std::size_t start = pos_;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start || (pos_ == start + 1 && !std::isdigit(static_cast<unsigned char>(text_[start]))))
      throw ParseError("expected integer", start);
    return std::stol(text_.substr(start, pos_ - start));
  }

  MPoly factor() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      MPoly r = expr();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return maybe_pow(std::move(r));
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      long p = parse_int();
      Rat v(p);
      if (eat('/')) v /= Rat(parse_int());
      return maybe_pow(MPoly::constant(n(), NovScalar(v)));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      std::string name = text_.substr(start, pos_ - start);
      if (name == "T") {
        Rat e(1);
        if (eat('^')) e = parse_exponent_rat();
        return MPoly::constant(n(), NovScalar::T_power(e));
      }
      auto it = std::find(vars_.begin(), vars_.end(), name);
      if (it == vars_.end()) throw UnknownVariable(name);
      int i = static_cast<int>(it - vars_.begin());
      int p = 1;
      if (eat('^')) p = static_cast<int>(parse_int());
      return MPoly::var(n(), i, p);
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  MPoly maybe_pow(MPoly base) {
    if (eat('^')) {
      long p = parse_int();
      if (p < 0) throw ParseError("negative power of a compound expression", pos_);
      return base.pow(static_cast<int>(p));
    }
    return base;
  }

  Rat parse_exponent_rat() {
    bool paren = eat('(');
    Rat v(parse_int());
    if (eat('/')) v /= Rat(parse_int());
    if (paren && !eat(')')) throw ParseError("expected ')'", pos_);
    return v;
  }
};

inline MPoly parse_expr(const std::string& text, const std::vector<std::string>& vars) {
  return ExprParser(text, vars).parse();
}

}  // namespace mforge
