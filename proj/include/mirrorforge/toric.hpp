#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>

#include "mirrorforge/groebner.hpp"
#include "mirrorforge/linalg.hpp"

namespace mforge {

struct InvalidFan : std::runtime_error {
  explicit InvalidFan(const std::string& why) : std::runtime_error("invalid fan data: " + why) {}
};
struct UnknownBuiltin : std::runtime_error {
  explicit UnknownBuiltin(const std::string& name) : std::runtime_error("unknown built-in '" + name + "'") {}
};
struct NewtonDivergence : std::runtime_error {
  int restarts;
  explicit NewtonDivergence(int r)
      : std::runtime_error("Newton iteration failed to converge after " + std::to_string(r) + " restarts"),
        restarts(r) {}
};
struct MultiplicityMismatch : std::runtime_error {
  MultiplicityMismatch(long numeric, long exact)
      : std::runtime_error("critical-point multiplicities sum to " + std::to_string(numeric) +
                           " but the quotient dimension is " + std::to_string(exact)) {}
};
struct RelationNotKilled : std::runtime_error {
  std::string witness;
  explicit RelationNotKilled(std::string w)
      : std::runtime_error("presentation relation does not vanish in the Jacobian ring: " + w),
        witness(std::move(w)) {}
};
struct RankMismatch : std::runtime_error {
  RankMismatch(long a, long b)
      : std::runtime_error("rank mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

inline unsigned global_seed() {
  const char* s = std::getenv("MIRRORFORGE_SEED");
  return s ? static_cast<unsigned>(std::strtoul(s, nullptr, 10)) : 12345u;
}

struct Facet {
  std::vector<long> normal;
  Rat constant;  // l(u) = <normal, u> - constant
};

struct ToricFanoData {
  std::string name;
  int n = 0;
  std::vector<Facet> facets;
  std::vector<Rat> basepoint;

  Rat l(std::size_t j, const std::vector<Rat>& u) const {
    Rat v = -facets[j].constant;
    for (int i = 0; i < n; ++i) v += Rat(facets[j].normal[i]) * u[i];
    return v;
  }

  void validate() const {
    if (n <= 0) throw InvalidFan("nonpositive dimension");
    if (static_cast<int>(basepoint.size()) != n) throw InvalidFan("basepoint arity");
    if (facets.size() < static_cast<std::size_t>(n + 1)) throw InvalidFan("too few facets");
    for (const Facet& f : facets) {
      if (static_cast<int>(f.normal.size()) != n) throw InvalidFan("normal arity");
      Int g = 0;
      for (long x : f.normal) g = int_gcd(g, Int(x));
      if (g != 1) throw InvalidFan("non-primitive normal");
    }
    for (std::size_t j = 0; j < facets.size(); ++j) {
      Rat lj = l(j, basepoint);
      if (lj == 0) throw InvalidFan("basepoint lies on a facet");
      if (lj < 0) throw InvalidFan("basepoint outside the polytope");
    }
    // normals must span Z^n: the gcd of all maximal minors is 1
    std::vector<int> idx(n);
    std::function<Int(int, int)> scan = [&](int pos, int start) -> Int {
      if (pos == n) {
        // integer determinant of the selected n normals by fraction-free elimination
        std::vector<std::vector<Rat>> m(n, std::vector<Rat>(n));
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < n; ++c) m[r][c] = Rat(facets[idx[r]].normal[c]);
        Rat det(1);
        for (int c = 0; c < n; ++c) {
          int p = -1;
          for (int r = c; r < n; ++r)
            if (m[r][c] != 0) { p = r; break; }
          if (p < 0) return Int(0);
          if (p != c) { std::swap(m[p], m[c]); det = -det; }
          det *= m[c][c];
          for (int r = c + 1; r < n; ++r) {
            Rat f = m[r][c] / m[c][c];
            for (int cc = c; cc < n; ++cc) m[r][cc] -= f * m[c][cc];
          }
        }
        return rat_num(det);  // determinant of an integer matrix is integral
      }
      Int g = 0;
      for (idx[pos] = start; idx[pos] <= static_cast<int>(facets.size()) - (n - pos); ++idx[pos]) {
        g = int_gcd(g, scan(pos + 1, idx[pos] + 1));
        if (g == 1) break;
      }
      return g;
    };
    if (scan(0, 0) != 1) throw InvalidFan("normals do not span the lattice");
  }

  json to_json() const {
    json jf = json::array();
    for (const Facet& f : facets)
      jf.push_back(json{{"normal", f.normal}, {"constant", rat_str(f.constant)}});
    json jb = json::array();
    for (const Rat& u : basepoint) jb.push_back(rat_str(u));
    return json{{"name", name}, {"dim", n}, {"facets", jf}, {"basepoint", jb}};
  }
  static ToricFanoData from_json(const json& j) {
    ToricFanoData d;
    d.name = j.at("name").get<std::string>();
    d.n = j.at("dim").get<int>();
    for (const auto& f : j.at("facets")) {
      Facet fc;
      fc.normal = f.at("normal").get<std::vector<long>>();
      fc.constant = rat_parse(f.at("constant").get<std::string>());
      d.facets.push_back(std::move(fc));
    }
    for (const auto& u : j.at("basepoint")) d.basepoint.push_back(rat_parse(u.get<std::string>()));
    return d;
  }
};

/// Landau-Ginzburg superpotential: sum over facets of T^{l_j(u)} y^{v_j}.
struct Potential {
  int n = 0;
  MPoly poly;              // in y_1..y_n over NovScalar
  std::vector<MPoly> z;    // per-facet monomial summands
  long N = 1;              // common root denominator of the T-exponents

  std::vector<std::string> var_names() const {
    std::vector<std::string> v;
    for (int i = 1; i <= n; ++i) v.push_back("y" + std::to_string(i));
    return v;
  }
};

inline Potential make_potential(const ToricFanoData& data) {
  data.validate();
  Potential P;
  P.n = data.n;
  P.poly = MPoly(data.n);
  long N = 1;
  for (std::size_t j = 0; j < data.facets.size(); ++j)
    N = std::lcm(N, static_cast<long>(rat_den(data.l(j, data.basepoint))));
  P.N = N;
  for (std::size_t j = 0; j < data.facets.size(); ++j) {
    ExpVec e(data.n);
    for (int i = 0; i < data.n; ++i) e[i] = static_cast<int>(data.facets[j].normal[i]);
    MPoly zj = MPoly::monomial(data.n, e, NovScalar::T_power(data.l(j, data.basepoint)));
    P.poly += zj;
    P.z.push_back(std::move(zj));
  }
  return P;
}

inline std::vector<MPoly> jacobian_generators(const Potential& P) {
  std::vector<MPoly> gens;
  for (int i = 0; i < P.n; ++i) gens.push_back(P.poly.log_derivative(i));
  return gens;
}

/// Gr"obner presentation of the Jacobian ring of the potential.
inline LaurentQuotient jacobian_ring(const Potential& P) {
  LaurentQuotient lq = laurent_quotient(jacobian_generators(P));
  if (!lq.qb.zero_dimensional) throw NotZeroDimensional();
  return lq;
}

struct CriticalPoint {
  std::vector<std::complex<double>> y;
  std::complex<double> value;        // potential at the point
  std::complex<double> hessian_det;  // log-coordinate Hessian determinant
  int multiplicity = 1;
  bool morse = false;
};

namespace detail {

inline Eigen::MatrixXcd specialize_matrix(const Mat& m, const std::complex<double>& t0) {
  Eigen::MatrixXcd r(m.size(), m.empty() ? 0 : m[0].size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) r(i, j) = m[i][j].specialize(t0);
  return r;
}

}  // namespace detail

/// All critical points of the potential at T = t0, via eigenvalues of the
/// multiplication operators on the Jacobian quotient, polished by Newton.
inline std::vector<CriticalPoint> critical_points(const Potential& P, const Rat& t0,
                                                  unsigned seed = global_seed()) {
  LaurentQuotient lq = jacobian_ring(P);
  long dim = lq.dimension();
  std::complex<double> t0c(rat_num(t0).convert_to<double>() / rat_den(t0).convert_to<double>(), 0.0);

  std::vector<Eigen::MatrixXcd> My;
  for (int i = 0; i < P.n; ++i) My.push_back(detail::specialize_matrix(mult_matrix(lq.qb, i), t0c));

  std::vector<MPoly> gens = jacobian_generators(P);
  std::vector<std::vector<MPoly>> jac(P.n);  // jac[i][j] = y_j d(g_i)/d(y_j)
  for (int i = 0; i < P.n; ++i)
    for (int j = 0; j < P.n; ++j) jac[i].push_back(gens[i].log_derivative(j));

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  const int max_restarts = 8;

  std::vector<std::vector<std::complex<double>>> raw;
  for (int attempt = 0;; ++attempt) {
    if (attempt == max_restarts) throw NewtonDivergence(max_restarts);
    raw.clear();
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(dim, dim);
    for (int i = 0; i < P.n; ++i) A += std::complex<double>(coeff(rng), coeff(rng)) * My[i];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A.transpose());
    if (es.info() != Eigen::Success) continue;

    bool ok = true;
    for (long k = 0; k < dim && ok; ++k) {
      // left eigenvector w of the multiplication operators: w^T M_i = y_i w^T
      Eigen::VectorXcd w = es.eigenvectors().col(k);
      int piv = 0;
      for (long r = 1; r < dim; ++r)
        if (std::abs(w(r)) > std::abs(w(piv))) piv = static_cast<int>(r);
      std::vector<std::complex<double>> y(P.n);
      for (int i = 0; i < P.n; ++i) {
        std::complex<double> num(0.0, 0.0);
        for (long r = 0; r < dim; ++r) num += w(r) * My[i](r, piv);
        y[i] = num / w(piv);
      }
      // Newton polish on g_i(y) = 0
      bool converged = false;
      for (int it = 0; it < 100; ++it) {
        Eigen::VectorXcd g(P.n);
        Eigen::MatrixXcd J(P.n, P.n);
        double res = 0.0;
        for (int i = 0; i < P.n; ++i) {
          g(i) = gens[i].eval(y, t0c);
          res = std::max(res, std::abs(g(i)));
          for (int j = 0; j < P.n; ++j) J(i, j) = jac[i][j].eval(y, t0c) / y[j];
        }
        if (res < 1e-12) { converged = true; break; }
        Eigen::VectorXcd dy = J.partialPivLu().solve(g);
        for (int j = 0; j < P.n; ++j) y[j] -= dy(j);
      }
      if (!converged) { ok = false; break; }
      raw.push_back(std::move(y));
    }
    if (ok) break;
  }

  // cluster to recover multiplicities
  std::vector<CriticalPoint> pts;
  const double cluster_tol = 1e-6;
  for (auto& y : raw) {
    bool merged = false;
    for (CriticalPoint& p : pts) {
      double d = 0.0;
      for (int i = 0; i < P.n; ++i) d = std::max(d, std::abs(p.y[i] - y[i]));
      if (d < cluster_tol) { ++p.multiplicity; merged = true; break; }
    }
    if (!merged) {
      CriticalPoint p;
      p.y = std::move(y);
      pts.push_back(std::move(p));
    }
  }
  long total = 0;
  for (const CriticalPoint& p : pts) total += p.multiplicity;
  if (total != dim) throw MultiplicityMismatch(total, dim);

  // critical values and log-coordinate Hessians
  std::vector<std::vector<MPoly>> hess(P.n);
  for (int i = 0; i < P.n; ++i)
    for (int j = 0; j < P.n; ++j) hess[i].push_back(P.poly.log_derivative(i).log_derivative(j));
  for (CriticalPoint& p : pts) {
    p.value = P.poly.eval(p.y, t0c);
    Eigen::MatrixXcd H(P.n, P.n);
    for (int i = 0; i < P.n; ++i)
      for (int j = 0; j < P.n; ++j) H(i, j) = hess[i][j].eval(p.y, t0c);
    p.hessian_det = H.determinant();
    p.morse = std::abs(p.hessian_det) > 1e-8;
  }
  std::sort(pts.begin(), pts.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    for (std::size_t i = 0; i < a.y.size(); ++i) {
      if (std::abs(a.y[i].real() - b.y[i].real()) > 1e-9) return a.y[i].real() < b.y[i].real();
      if (std::abs(a.y[i].imag() - b.y[i].imag()) > 1e-9) return a.y[i].imag() < b.y[i].imag();
    }
    return false;
  });
  return pts;
}

/// Quantum-cohomology presentation in the facet generators z_j.
struct QHPresentation {
  std::string name;
  int m = 0;                     // number of z generators
  std::vector<MPoly> relations;  // polynomials in z_1..z_m over NovScalar
  QuotientBasis qb;

  long rank() const { return qb.zero_dimensional ? static_cast<long>(qb.staircase.size()) : -1; }
  std::vector<std::string> var_names() const {
    std::vector<std::string> v;
    for (int i = 1; i <= m; ++i) v.push_back("z" + std::to_string(i));
    return v;
  }
};

inline ToricFanoData toric_builtin(const std::string& name) {
  ToricFanoData d;
  d.name = name;
  auto cpn = [&](int n) {
    d.n = n;
    for (int i = 0; i < n; ++i) {
      Facet f;
      f.normal.assign(n, 0);
      f.normal[i] = 1;
      f.constant = Rat(0);
      d.facets.push_back(std::move(f));
    }
    Facet last;
    last.normal.assign(n, -1);
    last.constant = Rat(-1);
    d.facets.push_back(std::move(last));
    d.basepoint.assign(n, Rat(1, n + 1));
  };
  if (name == "CP1") cpn(1);
  else if (name == "CP2") cpn(2);
  else if (name == "CP3") cpn(3);
  else if (name == "CP4") cpn(4);
  else if (name == "CP1xCP1") {
    d.n = 2;
    long nr[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (auto& row : nr) {
      Facet f;
      f.normal = {row[0], row[1]};
      f.constant = row[0] + row[1] < 0 ? Rat(-1) : Rat(0);
      d.facets.push_back(std::move(f));
    }
    d.basepoint = {Rat(1, 2), Rat(1, 2)};
  } else {
    throw UnknownBuiltin(name);
  }
  d.validate();
  return d;
}

inline QHPresentation qh_presentation(const std::string& name) {
  ToricFanoData d = toric_builtin(name);
  QHPresentation p;
  p.name = name;
  p.m = static_cast<int>(d.facets.size());
  // divisor (linear) relations: sum_j v_{j,i} z_j = 0 for each direction i
  for (int i = 0; i < d.n; ++i) {
    MPoly r(p.m);
    for (int j = 0; j < p.m; ++j) {
      long v = d.facets[j].normal[i];
      if (v != 0) r += MPoly::var(p.m, j) * MPoly::constant(p.m, NovScalar(Rat(v)));
    }
    p.relations.push_back(std::move(r));
  }
  // quantum Stanley-Reisner relations per primitive collection
  auto product_relation = [&](const std::vector<int>& js) {
    ExpVec e(p.m, 0);
    Rat total(0);
    for (int j : js) {
      e[j] = 1;
      total += d.l(j, d.basepoint);
    }
    MPoly r = MPoly::monomial(p.m, e);
    r -= MPoly::constant(p.m, NovScalar::T_power(total));
    return r;
  };
  if (name == "CP1xCP1") {
    p.relations.push_back(product_relation({0, 1}));
    p.relations.push_back(product_relation({2, 3}));
  } else {
    std::vector<int> all(p.m);
    for (int j = 0; j < p.m; ++j) all[j] = j;
    p.relations.push_back(product_relation(all));
  }
  p.qb = quotient_basis(p.relations);
  return p;
}

struct KsReport {
  bool relations_killed = false;
  bool surjective = false;
  bool ranks_equal = false;
  long qh_rank = 0;
  long jac_dim = 0;
  bool ok() const { return relations_killed && surjective && ranks_equal; }
  json to_json() const {
    return json{{"relations_killed", relations_killed},
                {"surjective", surjective},
                {"ranks_equal", ranks_equal},
                {"qh_rank", qh_rank},
                {"jac_dim", jac_dim},
                {"pass", ok()}};
  }
};

/// Divisor-level closed-string comparison: substitute z_j -> T^{l_j} y^{v_j}
/// and verify the presentation maps isomorphically onto the Jacobian ring.
inline KsReport ks_divisor_check(const QHPresentation& pres, const Potential& P) {
  KsReport rep;
  LaurentQuotient jac = jacobian_ring(P);
  rep.jac_dim = jac.dimension();
  rep.qh_rank = pres.rank();
  rep.ranks_equal = rep.qh_rank == rep.jac_dim;
  if (!rep.ranks_equal) throw RankMismatch(rep.qh_rank, rep.jac_dim);

  for (const MPoly& r : pres.relations) {
    MPoly image = r.substitute(P.z);
    if (!jac.normal_form(image).is_zero())
      throw RelationNotKilled(r.to_string(pres.var_names()));
  }
  rep.relations_killed = true;

  // surjectivity: images of the presentation's standard monomials span Jac
  Mat span;
  for (const ExpVec& e : pres.qb.staircase) {
    MPoly mono = MPoly::monomial(pres.m, e);
    MPoly nf = jac.normal_form(mono.substitute(P.z));
    Vec row(jac.qb.staircase.size(), NovScalar());
    for (const auto& [me, c] : nf.terms) {
      auto idx = jac.qb.staircase_index(me);
      if (!idx) throw std::logic_error("normal form off the staircase");
      row[*idx] = c;
    }
    span.push_back(std::move(row));
  }
  rep.surjective = mat_rank(span) == static_cast<std::size_t>(rep.jac_dim);
  return rep;
}

}  // namespace mforge
