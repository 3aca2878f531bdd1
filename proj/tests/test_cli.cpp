#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

using nlohmann::json;

namespace {

std::string data(const std::string& name) { return std::string(MFORGE_DATA_DIR) + "/" + name; }

int run(const std::string& args, const std::string& outfile = "/tmp/mforge_cli_out.txt") {
  std::string cmd = std::string(MFORGE_CLI_PATH) + " " + args + " > " + outfile + " 2>&1";
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

json report(const std::string& args) {
  const std::string out = "/tmp/mforge_cli_rep.json";
  run(args + " --format json", out);
  return json::parse(slurp(out));
}

}  // namespace

TEST_CASE("potential: the line prints the classic factored form") {
  CHECK(run("potential " + data("cp1.json")) == 0);
  std::string out = slurp("/tmp/mforge_cli_out.txt");
  CHECK(out.find("T^(1/2)*(y1 + y1^-1)") != std::string::npos);
  // the parameter header is always present
  CHECK(out.find("kmax") != std::string::npos);
  CHECK(out.find("seed") != std::string::npos);
}

TEST_CASE("potential: malformed JSON exits 2 and reports the position") {
  CHECK(run("potential " + data("malformed.json")) == 2);
  std::string out = slurp("/tmp/mforge_cli_out.txt");
  CHECK(out.find("parse error") != std::string::npos);
  CHECK(out.find("line") != std::string::npos);
}

TEST_CASE("potential: a non-primitive normal exits 2") {
  CHECK(run("potential " + data("bad_normal.json")) == 2);
  CHECK(slurp("/tmp/mforge_cli_out.txt").find("non-primitive") != std::string::npos);
}

TEST_CASE("potential: an unknown name exits 2") {
  CHECK(run("potential no-such-thing") == 2);
}

TEST_CASE("mirror-check: the line and the plane pass with matching dimensions") {
  json r1 = report("mirror-check " + data("cp1.json"));
  CHECK(r1.at("pass").get<bool>());
  CHECK(r1.at("jac_dim").get<long>() == 2);
  CHECK(r1.at("qh_rank").get<long>() == 2);
  CHECK(r1.at("total_multiplicity").get<long>() == 2);
  CHECK(r1.at("all_morse").get<bool>());

  json r2 = report("mirror-check CP2");
  CHECK(r2.at("pass").get<bool>());
  CHECK(r2.at("jac_dim").get<long>() == 3);
  CHECK(r2.at("qh_rank").get<long>() == 3);
}

TEST_CASE("mirror-check: a corrupted relation file exits 1 with a witness") {
  CHECK(run("mirror-check " + data("cp1_bad_relation.json") + " --format json",
            "/tmp/mforge_cli_rep.json") == 1);
  json r = json::parse(slurp("/tmp/mforge_cli_rep.json"));
  CHECK_FALSE(r.at("pass").get<bool>());
  CHECK(r.at("witness").get<std::string>().find("z1*z2") != std::string::npos);
}

TEST_CASE("theorem: the shipped desks pass") {
  CHECK(run("theorem clifford-w --format json", "/tmp/mforge_cli_rep.json") == 0);
  json r = json::parse(slurp("/tmp/mforge_cli_rep.json"));
  CHECK(r.at("pass").get<bool>());
  for (const auto& id : r.at("identities")) CHECK(id.at("pass").get<bool>());
  CHECK(r.at("ks").get<std::string>() == "1");

  CHECK(run("theorem " + data("setup_u.json") + " --rmax 2") == 0);
}

TEST_CASE("theorem: a corrupted bulk datum fails at a named identity") {
  CHECK(run("theorem " + data("setup_u_corrupt.json") + " --rmax 2 --format json",
            "/tmp/mforge_cli_rep.json") == 1);
  json r = json::parse(slurp("/tmp/mforge_cli_rep.json"));
  CHECK_FALSE(r.at("pass").get<bool>());
  bool named = false;
  for (const auto& id : r.at("identities"))
    if (!id.at("pass").get<bool>() && id.at("name") == "bulk_cocycle") named = true;
  CHECK(named);
}

TEST_CASE("theorem: arity bound zero keeps only the length-zero identities and passes") {
  CHECK(run("theorem clifford-u --rmax 0 --format json", "/tmp/mforge_cli_rep.json") == 0);
  json r = json::parse(slurp("/tmp/mforge_cli_rep.json"));
  CHECK(r.at("pass").get<bool>());
  CHECK(r.at("params").at("rmax").get<int>() == 0);
}

TEST_CASE("hochschild: the Clifford line is stable, the dual numbers warn") {
  CHECK(run("hochschild " + data("clifford_e2_1.json") + " --lmax 5 --format json",
            "/tmp/mforge_cli_rep.json") == 0);
  json r = json::parse(slurp("/tmp/mforge_cli_rep.json"));
  CHECK(r.at("cohomology").at("hh_even").get<long>() == 1);
  CHECK(r.at("cohomology").at("hh_odd").get<long>() == 0);
  CHECK(r.at("cohomology").at("stable").get<bool>());

  CHECK(run("hochschild " + data("dual_numbers.json") + " --lmax 4") == 3);
}

TEST_CASE("mf: validation verdict drives the exit code") {
  CHECK(run("mf " + data("mf_x2.json")) == 0);
  CHECK(run("mf " + data("mf_bad.json") + " --format json", "/tmp/mforge_cli_rep.json") == 1);
  json r = json::parse(slurp("/tmp/mforge_cli_rep.json"));
  CHECK_FALSE(r.at("validation").at("pass").get<bool>());
  CHECK_FALSE(r.at("validation").at("residuals").empty());
}

TEST_CASE("gamma: the double-point bundle passes") {
  CHECK(run("gamma " + data("gamma_x2.json") + " --format json", "/tmp/mforge_cli_rep.json") == 0);
  json r = json::parse(slurp("/tmp/mforge_cli_rep.json"));
  CHECK(r.at("gamma").at("pass").get<bool>());
  CHECK(r.at("gamma").at("ideal_vanishes").get<bool>());
}

TEST_CASE("examples lists the built-ins") {
  CHECK(run("examples --format json", "/tmp/mforge_cli_rep.json") == 0);
  json r = json::parse(slurp("/tmp/mforge_cli_rep.json"));
  CHECK(r.at("polytopes").size() == 5);
  CHECK(r.at("theorem_setups").size() == 2);
}

TEST_CASE("reports are byte-identical across runs modulo the timestamp") {
  CHECK(run("mirror-check " + data("cp1xcp1.json") + " --format json --out /tmp/mforge_det1.json") == 0);
  CHECK(run("mirror-check " + data("cp1xcp1.json") + " --format json --out /tmp/mforge_det2.json") == 0);
  json a = json::parse(slurp("/tmp/mforge_det1.json"));
  json b = json::parse(slurp("/tmp/mforge_det2.json"));
  a.erase("timestamp");
  b.erase("timestamp");
  CHECK(a.dump() == b.dump());
  CHECK(a.at("jac_dim").get<long>() == 4);
  CHECK(a.at("total_multiplicity").get<long>() == 4);

  // markdown path: identical after dropping the generated line
  CHECK(run("potential CP1 --out /tmp/mforge_det1.md") == 0);
  CHECK(run("potential CP1 --out /tmp/mforge_det2.md") == 0);
  auto strip = [](std::string s) {
    auto p = s.find("generated:");
    auto q = s.find('\n', p);
    return s.substr(0, p) + s.substr(q);
  };
  CHECK(strip(slurp("/tmp/mforge_det1.md")) == strip(slurp("/tmp/mforge_det2.md")));
}

TEST_CASE("the seed variable feeds the randomized sampling deterministically") {
  CHECK(std::system(("MIRRORFORGE_SEED=777 " + std::string(MFORGE_CLI_PATH) +
                     " mirror-check CP1 --format json --out /tmp/mforge_seed.json")
                        .c_str()) == 0);
  json r = json::parse(slurp("/tmp/mforge_seed.json"));
  CHECK(r.at("params").at("seed").get<unsigned>() == 777u);
  CHECK(r.at("pass").get<bool>());
}
