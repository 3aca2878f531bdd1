// mirrorforge: command-line driver for the verification pipelines.
//
// Subcommands
//   potential     polytope JSON or built-in name -> superpotential report
//   mirror-check  polytope JSON or built-in name -> closed-string comparison
//   theorem       setup JSON or desk name        -> homotopy-identity report
//   hochschild    category JSON                  -> cohomology dimensions
//   mf            factorization JSON             -> Q^2 = W validation
//   gamma         factorization bundle JSON      -> class checks
//   examples                                     -> list of built-ins
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 invalid input,
// 3 stabilization warning.

#include <CLI11.hpp>
#include <chrono>
#include <complex>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mirrorforge/mirror.hpp"
#include "mirrorforge/toric.hpp"

using namespace mforge;

namespace {

struct Opts {
  int kmax = 6;
  int lmax = 4;
  int dmax = 2;
  int rmax = 3;
  std::string t0 = "1/2";
  std::string format = "markdown";
  std::string out;
};

std::string timestamp_utc() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json report_skeleton(const std::string& sub, const Opts& o) {
  return json{{"tool", "mirrorforge"},
              {"subcommand", sub},
              {"timestamp", timestamp_utc()},
              {"params", json{{"kmax", o.kmax},
                              {"lmax", o.lmax},
                              {"dmax", o.dmax},
                              {"rmax", o.rmax},
                              {"t0", o.t0},
                              {"seed", global_seed()}}}};
}

void markdown_value(std::ostream& os, const json& v, int indent) {
  std::string pad(indent, ' ');
  if (v.is_object()) {
    for (const auto& [k, val] : v.items()) {
      if (val.is_primitive()) {
        os << pad << "- " << k << ": " << (val.is_string() ? val.get<std::string>() : val.dump())
           << "\n";
      } else {
        os << pad << "- " << k << ":\n";
        markdown_value(os, val, indent + 2);
      }
    }
  } else if (v.is_array()) {
    for (const auto& val : v) {
      if (val.is_primitive()) {
        os << pad << "- " << (val.is_string() ? val.get<std::string>() : val.dump()) << "\n";
      } else {
        os << pad << "-\n";
        markdown_value(os, val, indent + 2);
      }
    }
  } else {
    os << pad << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  }
}

/// Emit the report in the requested format; every report carries the full
/// parameter header so a pass is always quantified by its truncations.
void emit(const json& rep, const Opts& o) {
  std::ostringstream os;
  if (o.format == "json") {
    os << rep.dump(2) << "\n";
  } else {
    os << "# mirrorforge " << rep.at("subcommand").get<std::string>() << " report\n\n";
    os << "generated: " << rep.at("timestamp").get<std::string>() << "\n\n";
    os << "## parameters\n\n";
    markdown_value(os, rep.at("params"), 0);
    os << "\n## results\n\n";
    json body = rep;
    body.erase("tool");
    body.erase("subcommand");
    body.erase("timestamp");
    body.erase("params");
    markdown_value(os, body, 0);
  }
  if (o.out.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream f(o.out);
    if (!f) throw std::runtime_error("cannot open output file " + o.out);
    f << os.str();
  }
}

// ---------------------------------------------------------------------------
// shared input helpers
// ---------------------------------------------------------------------------

bool file_exists(const std::string& path) {
  std::ifstream f(path);
  return f.good();
}

json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot read input file " + path);
  return json::parse(f);  // json::parse_error carries the byte position
}

/// Polytope input: a JSON file, or the name of a built-in.
ToricFanoData load_polytope(const std::string& input, json* raw = nullptr) {
  if (file_exists(input)) {
    json j = load_json(input);
    if (raw) *raw = j;
    ToricFanoData d = ToricFanoData::from_json(j);
    d.validate();
    return d;
  }
  return toric_builtin(input);
}

/// Potential printed with a common Novikov coefficient factored out and terms
/// in descending exponent order, e.g. T^(1/2)*(y1 + y1^-1).
std::string potential_pretty(const Potential& P) {
  std::vector<std::string> vars = P.var_names();
  auto mono_str = [&](const ExpVec& e) {
    std::string m;
    for (int i = 0; i < P.n; ++i) {
      if (e[i] == 0) continue;
      if (!m.empty()) m += "*";
      m += vars[i];
      if (e[i] != 1) m += "^" + std::to_string(e[i]);
    }
    return m.empty() ? std::string("1") : m;
  };
  std::vector<std::pair<ExpVec, NovScalar>> terms(P.poly.terms.begin(), P.poly.terms.end());
  std::reverse(terms.begin(), terms.end());  // descending exponents
  if (terms.empty()) return "0";
  bool common = true;
  for (const auto& [e, c] : terms)
    if (!(c == terms.front().second)) common = false;
  std::string body;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) body += " + ";
    if (common) {
      body += mono_str(terms[i].first);
    } else {
      std::string cs = terms[i].second.to_string();
      bool wrap = cs.find('+') != std::string::npos || cs.find('/') != std::string::npos ||
                  cs.find('-', 1) != std::string::npos;
      body += (wrap ? "(" + cs + ")" : cs) + "*" + mono_str(terms[i].first);
    }
  }
  if (!common) return body;
  std::string cs = terms.front().second.to_string();
  if (cs == "1" && terms.size() == 1) return body;
  if (cs == "1") return body;
  if (terms.size() == 1) return cs + "*" + body;
  return cs + "*(" + body + ")";
}

/// Presentation in the facet generators computed from the polytope data
/// itself, so file inputs (possibly corrupted) are honored.  The file may
/// override the relations with an array of expression strings in z1..zm.
QHPresentation presentation_for(const ToricFanoData& d, const json& raw) {
  QHPresentation p;
  p.name = d.name;
  p.m = static_cast<int>(d.facets.size());
  if (raw.is_object() && raw.contains("relations")) {
    for (const auto& r : raw.at("relations"))
      p.relations.push_back(parse_expr(r.get<std::string>(), p.var_names()));
  } else {
    for (int i = 0; i < d.n; ++i) {
      MPoly r(p.m);
      for (int j = 0; j < p.m; ++j) {
        long v = d.facets[j].normal[i];
        if (v != 0) r += MPoly::var(p.m, j) * MPoly::constant(p.m, NovScalar(Rat(v)));
      }
      p.relations.push_back(std::move(r));
    }
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
    if (d.name == "CP1xCP1") {
      p.relations.push_back(product_relation({0, 1}));
      p.relations.push_back(product_relation({2, 3}));
    } else {
      std::vector<int> all(p.m);
      for (int j = 0; j < p.m; ++j) all[j] = j;
      p.relations.push_back(product_relation(all));
    }
  }
  p.qb = quotient_basis(p.relations);
  return p;
}

std::string cplx_str(const std::complex<double>& z) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f%+.6fi", z.real(), z.imag());
  return buf;
}

// ---------------------------------------------------------------------------
// subcommand handlers: each returns the process exit code
// ---------------------------------------------------------------------------

int cmd_potential(const std::string& input, const Opts& o) {
  json rep = report_skeleton("potential", o);
  ToricFanoData d = load_polytope(input);
  Potential P = make_potential(d);
  rep["name"] = d.name;
  rep["dim"] = d.n;
  rep["facets"] = static_cast<int>(d.facets.size());
  rep["variables"] = P.var_names();
  rep["potential"] = potential_pretty(P);
  rep["root_denominator"] = P.N;
  rep["pass"] = true;
  emit(rep, o);
  return 0;
}

int cmd_mirror_check(const std::string& input, const Opts& o) {
  json rep = report_skeleton("mirror-check", o);
  json raw;
  ToricFanoData d = load_polytope(input, &raw);
  Potential P = make_potential(d);
  rep["name"] = d.name;
  Rat t0 = rat_parse(o.t0);
  if (t0 <= 0 || t0 >= 1) throw std::invalid_argument("t0 must lie strictly between 0 and 1");

  bool pass = true;
  std::string witness;
  try {
    LaurentQuotient jac = jacobian_ring(P);
    rep["jac_dim"] = jac.dimension();
    std::vector<CriticalPoint> pts = critical_points(P, t0);
    json jpts = json::array();
    long total = 0;
    bool all_morse = true;
    for (const CriticalPoint& p : pts) {
      json y = json::array();
      for (const auto& c : p.y) y.push_back(cplx_str(c));
      jpts.push_back(json{{"y", y}, {"multiplicity", p.multiplicity}, {"morse", p.morse}});
      total += p.multiplicity;
      all_morse = all_morse && p.morse;
    }
    rep["critical_points"] = jpts;
    rep["total_multiplicity"] = total;
    rep["all_morse"] = all_morse;
    QHPresentation pres = presentation_for(d, raw);
    rep["qh_rank"] = pres.rank();
    KsReport ks = ks_divisor_check(pres, P);
    rep["ks"] = ks.to_json();
    pass = ks.ok() && all_morse && total == jac.dimension();
    if (!pass) witness = "verdict flags above";
  } catch (const RelationNotKilled& e) {
    pass = false;
    witness = e.what();
  } catch (const RankMismatch& e) {
    pass = false;
    witness = e.what();
  } catch (const MultiplicityMismatch& e) {
    pass = false;
    witness = e.what();
  }
  rep["pass"] = pass;
  if (!pass) rep["witness"] = witness;
  emit(rep, o);
  return pass ? 0 : 1;
}

/// Desk setup from a built-in name or a setup JSON bundling the category
/// family, reference, and optional corruption of the bulk tensors.
struct TheoremInput {
  DeskMirror desk;
  json corrupt = json::array();
};

TheoremInput load_setup(const std::string& input) {
  TheoremInput in;
  if (!file_exists(input)) {
    if (input == "clifford-w")
      in.desk = clifford_desk(1, NovScalar(2), {NovScalar(1)}, "w");
    else if (input == "clifford-u")
      in.desk = clifford_desk(1, NovScalar(2), {NovScalar(1)}, "u");
    else
      throw std::invalid_argument("unknown setup '" + input +
                                  "' (built-ins: clifford-w, clifford-u)");
    return in;
  }
  json j = load_json(input);
  const json& c = j.at("clifford");
  int n = c.at("n").get<int>();
  NovScalar w(rat_parse(c.at("w").get<std::string>()));
  std::vector<NovScalar> u;
  for (const auto& s : c.at("u")) u.emplace_back(rat_parse(s.get<std::string>()));
  in.desk = clifford_desk(n, w, u, c.at("family").get<std::string>());
  if (j.contains("corrupt_q")) in.corrupt = j.at("corrupt_q");
  return in;
}

int cmd_theorem(const std::string& input, const Opts& o) {
  json rep = report_skeleton("theorem", o);
  TheoremInput in = load_setup(input);
  const AInfCategory& A = *in.desk.A;
  rep["family"] = in.desk.family;
  rep["potential_value"] = in.desk.S.W.to_string(A.ring.vars);
  rep["lambda"] = in.desk.S.lambda.to_string(A.ring.vars);

  LMData lm = lm_morphisms(in.desk.S);
  CheckReport fcheck = check_lm_functor(lm, std::min(4, A.K_max - 1));
  rep["functor_equation"] = fcheck.to_json();

  BulkDatum bulk = bulk_from_family(A, in.desk.family1, in.desk.family);
  auto gen_by_name = [&](const std::string& name) {
    const auto& basis = A.hom(0, 0);
    for (int i = 0; i < static_cast<int>(basis.size()); ++i)
      if (basis[i].name == name) return Gen{0, 0, i};
    throw std::invalid_argument("unknown generator '" + name + "'");
  };
  for (const auto& e : in.corrupt) {
    Tuple t;
    for (const auto& s : e.at("inputs")) t.push_back(gen_by_name(s.get<std::string>()));
    Gen out = gen_by_name(e.at("out").get<std::string>());
    MPoly coeff = parse_expr(e.at("coeff").get<std::string>(), A.ring.vars);
    combo_add(bulk.q.mk[t], out.i, coeff);
  }
  rep["bulk_corrupted"] = !in.corrupt.empty();

  CheckReport bcheck = check_bulk(A, bulk);
  rep["bulk_cocycle_precheck"] = bcheck.to_json();
  auto [ks_ok, ks] = ks_value(in.desk.S, bulk);
  rep["ks_unit_multiple"] = ks_ok;
  rep["ks"] = ks.to_string(A.ring.vars);

  TheoremData T = build_FG_xi(lm, bulk, o.rmax);
  TheoremReport trep = check_main_theorem(T);
  rep["identities"] = trep.to_json().at("identities");
  bool pass = trep.pass && fcheck.pass && bcheck.pass && ks_ok;
  rep["pass"] = pass;
  emit(rep, o);
  return pass ? 0 : 1;
}

int cmd_hochschild(const std::string& input, const Opts& o) {
  json rep = report_skeleton("hochschild", o);
  AInfCategory C = category_from_json(load_json(input));
  Bimodule D = diagonal(C);
  HHReport h = hh_cohomology(C, D, o.lmax);
  rep["objects"] = C.objects;
  rep["cohomology"] = h.to_json();
  rep["pass"] = h.closed && h.stable;
  if (!h.stable) rep["warning"] = "dimensions not stabilized at this length window";
  emit(rep, o);
  if (!h.closed) return 1;
  return h.stable ? 0 : 3;
}

int cmd_mf(const std::string& input, const Opts& o) {
  json rep = report_skeleton("mf", o);
  MatrixFactorization m = MatrixFactorization::from_json(load_json(input));
  MFValidation v = validate_mf(m);
  rep["label"] = m.label;
  rep["ranks"] = json::array({m.r0, m.r1});
  rep["potential"] = m.W.to_string(m.ring.vars);
  rep["validation"] = v.to_json();
  rep["pass"] = v.pass;
  emit(rep, o);
  return v.pass ? 0 : 1;
}

int cmd_gamma(const std::string& input, const Opts& o) {
  json rep = report_skeleton("gamma", o);
  json j = load_json(input);
  MatrixFactorization m = MatrixFactorization::from_json(j.at("mf"));
  MFCategory M = mf_ainfty_category({m}, true);
  Bimodule D = diagonal(M.C);
  auto parse_classes = [&](const json& arr) {
    std::vector<std::map<std::string, MPoly>> out;
    for (const auto& entry : arr) {
      std::map<std::string, MPoly> c;
      for (const auto& [label, expr] : entry.items())
        c[label] = parse_expr(expr.get<std::string>(), M.amb.vars);
      out.push_back(std::move(c));
    }
    return out;
  };
  int ell = j.contains("ell_max") ? j.at("ell_max").get<int>() : o.lmax;
  GammaReport g = check_gamma(M, D, parse_classes(j.value("reps", json::array())),
                              parse_classes(j.value("ideal", json::array())), ell);
  rep["label"] = m.label;
  rep["ell_max_used"] = ell;
  rep["gamma"] = g.to_json();
  rep["pass"] = g.pass();
  emit(rep, o);
  return g.pass() ? 0 : 1;
}

int cmd_examples(const Opts& o) {
  json rep = report_skeleton("examples", o);
  rep["polytopes"] = json::array({"CP1", "CP2", "CP3", "CP4", "CP1xCP1"});
  rep["theorem_setups"] = json::array({"clifford-w", "clifford-u"});
  rep["pass"] = true;
  emit(rep, o);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mirrorforge: algebraic verification pipelines"};
  app.require_subcommand(1);
  Opts o;
  app.add_option("--kmax", o.kmax, "operation arity bound")->check(CLI::PositiveNumber);
  app.add_option("--lmax", o.lmax, "cochain length window")->check(CLI::PositiveNumber);
  app.add_option("--dmax", o.dmax, "adic truncation order")->check(CLI::PositiveNumber);
  app.add_option("--rmax", o.rmax, "homotopy identity arity bound")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--t0", o.t0, "specialization point in (0,1), a rational");
  app.add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"json", "markdown"}));
  app.add_option("--out", o.out, "write the report to this file");

  std::string input;
  app.fallthrough();  // allow the global options after the subcommand name
  auto* potential = app.add_subcommand("potential", "superpotential of a polytope");
  potential->add_option("input", input, "polytope JSON file or built-in name")->required();
  auto* mirror = app.add_subcommand("mirror-check", "closed-string comparison");
  mirror->add_option("input", input, "polytope JSON file or built-in name")->required();
  auto* theorem = app.add_subcommand("theorem", "homotopy identity verification");
  theorem->add_option("input", input, "setup JSON file or desk name")->required();
  auto* hoch = app.add_subcommand("hochschild", "cohomology dimensions");
  hoch->add_option("input", input, "category JSON file")->required();
  auto* mf = app.add_subcommand("mf", "factorization validation");
  mf->add_option("input", input, "factorization JSON file")->required();
  auto* gam = app.add_subcommand("gamma", "class checks on a factorization bundle");
  gam->add_option("input", input, "bundle JSON file")->required();
  auto* ex = app.add_subcommand("examples", "list built-ins");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (potential->parsed()) return cmd_potential(input, o);
    if (mirror->parsed()) return cmd_mirror_check(input, o);
    if (theorem->parsed()) return cmd_theorem(input, o);
    if (hoch->parsed()) return cmd_hochschild(input, o);
    if (mf->parsed()) return cmd_mf(input, o);
    if (gam->parsed()) return cmd_gamma(input, o);
    if (ex->parsed()) return cmd_examples(o);
  } catch (const json::parse_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const NewtonDivergence& e) {
    std::cerr << "warning: " << e.what() << "\n";
    return 3;
  } catch (const InvalidFan& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const UnknownBuiltin& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const MCInvalid& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const FamilyNotAInfty& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
