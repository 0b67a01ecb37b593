#include "catch_amalgamated.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "ncpick/ncpick.hpp"

using namespace ncpick;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string exe = NCPICK_EXE;
const std::string fixtures = NCPICK_FIXTURES;

struct Run {
  int code = -1;
  std::string out, err;
};

fs::path scratch() {
  fs::path dir = fs::temp_directory_path() / "ncpick_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const std::string& args) {
  fs::path out = scratch() / "stdout.txt", err = scratch() / "stderr.txt";
  std::string cmd = exe + " " + args + " >" + out.string() + " 2>" + err.string();
  int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string fx(const char* name) { return fixtures + "/" + name; }

}  // namespace

TEST_CASE("eval of the point mass at i") {
  Run r = run("eval " + fx("point_mass.json") + " " + fx("point_i.json"));
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  MatPoint f = io::point_from_json(j);
  CHECK(std::abs(f.flat()(0, 0) - kI) <= 1e-15);
}

TEST_CASE("eval of the counterexample matches the closed form") {
  fs::path out = scratch() / "f.json";
  Run r = run("eval " + fx("counterexample.json") + " " + fx("point_c2.json") + " -o " + out.string());
  REQUIRE(r.code == 0);
  MatPoint f = io::point_from_json(io::read_json_file(out.string()));
  auto [g1, g2] = counterexample_closed_form(cplx(0.3, 1), cplx(-0.5, 0.7));
  CHECK(std::abs(f.flat()(0, 0) - g1) <= 1e-12);
  CHECK(std::abs(f.flat()(1, 1) - g2) <= 1e-12);
}

TEST_CASE("input errors exit with 2") {
  fs::path bad = scratch() / "truncated.json";
  io::write_text_file(bad.string(), "{\"B\": [");
  CHECK(run("eval " + bad.string() + " " + fx("point_i.json")).code == 2);
  CHECK(run("eval " + fx("point_mass.json") + " /nonexistent.json").code == 2);
  CHECK(run("check-pick " + fx("counterexample.json") + " --trials 0").code == 2);
  CHECK(run("asymptotics " + fx("counterexample.json") + " --s-min 1e6 --s-max 1e2").code == 2);
  CHECK(run("no-such-command").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("--json --csv counterexample").code == 2);
  Run p = run("ncrat --expr \"inv(\" --vars-file " + fx("vars_i.json"));
  CHECK(p.code == 2);
  CHECK(p.err.find("parse error at 4") != std::string::npos);
  // point at level 1 of C, model on C^2
  CHECK(run("eval " + fx("counterexample.json") + " " + fx("point_i.json")).code == 2);
}

TEST_CASE("check-pick") {
  Run ok = run("check-pick " + fx("counterexample.json") + " --trials 30");
  CHECK(ok.code == 0);
  CHECK(json::parse(ok.out)["status"] == "pass");
  Run bad = run("check-pick " + fx("nonhermitian_A.json") + " --trials 30");
  CHECK(bad.code == 1);
  json j = json::parse(bad.out);
  CHECK(j["status"] == "fail");
  CHECK(j["checks"][0]["witness"].is_object());
  Run csv = run("--csv check-pick " + fx("point_mass.json") + " --trials 10");
  CHECK(csv.code == 0);
  CHECK(csv.out.rfind("name,status,residual,relation,tolerance", 0) == 0);
}

TEST_CASE("asymptotics") {
  fs::path csv = scratch() / "asym.csv";
  Run r = run("asymptotics " + fx("counterexample.json") + " --csv " + csv.string());
  CHECK(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["verdict"] == "cauchy_like");
  CHECK(j["s"].size() == 9);
  std::string text = slurp(csv);
  CHECK(text.rfind("s,residual\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 10);
  Run nh = run("asymptotics " + fx("nonhomomorphic.json"));
  CHECK(nh.code == 1);
  CHECK(json::parse(nh.out)["verdict"] == "fails");
}

TEST_CASE("extract") {
  fs::path out = scratch() / "nev.json";
  Run r = run("extract " + fx("herglotz_classical.json") + " " + out.string());
  REQUIRE(r.code == 0);
  json rep = json::parse(r.out);
  CHECK(rep["is_cauchy"] == true);
  CHECK(rep["roundtrip_residual"].get<double>() <= 1e-8);
  NevanlinnaData nd = io::nevanlinna_from_json(io::read_json_file(out.string()));
  CHECK(nd.is_cauchy);

  Run s = run("extract " + fx("herglotz_shifted.json") + " " + out.string());
  CHECK(s.code == 0);
  CHECK(json::parse(s.out)["is_cauchy"] == false);

  Run bad = run("extract " + fx("herglotz_overlap.json") + " " + out.string());
  CHECK(bad.code == 1);
  CHECK(bad.err.find("liminf condition violated") != std::string::npos);
}

TEST_CASE("moments and tomiyama") {
  CHECK(run("moments " + fx("counterexample.json") + " --k 5").code == 0);
  CHECK(run("moments " + fx("nonhomomorphic.json") + " --k 3 --level 1").code == 1);
  CHECK(run("tomiyama " + fx("counterexample.json") + " --samples 50").code == 0);
  CHECK(run("tomiyama " + fx("nonhomomorphic.json")).code == 1);
}

TEST_CASE("ncrat") {
  Run r = run("ncrat --expr \"-inv(Z1)\" --vars-file " + fx("vars_i.json"));
  REQUIRE(r.code == 0);
  Mat m = io::matrix_from_json(json::parse(r.out));
  CHECK(std::abs(m(0, 0) - kI) <= 1e-15);
  CHECK(run("ncrat --expr \"inv(Z1 - Z1)\" --vars-file " + fx("vars_i.json")).code == 1);
  CHECK(run("ncrat --expr \"Z2\" --vars-file " + fx("vars_i.json")).code == 2);
}

TEST_CASE("counterexample subcommand") {
  Run r = run("counterexample");
  CHECK(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["status"] == "pass");
  CHECK_FALSE(j.contains("wall_time_seconds"));
  Run t = run("--timing counterexample --samples 512");
  CHECK(json::parse(t.out).contains("wall_time_seconds"));
}

TEST_CASE("same seed, same bytes") {
  for (const std::string& args : std::vector<std::string>{"--seed 7 check-pick " + fx("counterexample.json") + " --trials 20",
                           "--seed 3 moments " + fx("classical_two_atom.json"),
                           "--seed 11 counterexample"}) {
    Run a = run(args), b = run(args);
    CHECK(a.code == b.code);
    CHECK(a.out == b.out);
  }
  CHECK(run("--seed 1 check-pick " + fx("counterexample.json") + " --trials 20").out !=
        run("--seed 2 check-pick " + fx("counterexample.json") + " --trials 20").out);
}

TEST_CASE("write-fixtures reproduces the shipped files") {
  fs::path dir = scratch() / "fixtures";
  fs::remove_all(dir);
  REQUIRE(run("write-fixtures " + dir.string()).code == 0);
  for (const auto& entry : fs::directory_iterator(fixtures)) {
    INFO(entry.path().filename());
    CHECK(slurp(dir / entry.path().filename()) == slurp(entry.path()));
  }
}

TEST_CASE("help exits 0") { CHECK(run("--help").code == 0); }
