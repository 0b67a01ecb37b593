#include "catch_amalgamated.hpp"

#include "ncpick/suite.hpp"

using namespace ncpick;

TEST_CASE("report status is the conjunction of checks") {
  SuiteReport r;
  r.suite = "demo";
  r.add("small", 1e-12, 1e-10);
  CHECK(r.passed());
  r.add_above("big", 0.5, 0.1);
  CHECK(r.passed());
  r.add("equal", 1e-10, 1e-10);
  CHECK(r.passed());
  r.add("too_big", 2e-10, 1e-10, nlohmann::json{{"x", 1}});
  CHECK_FALSE(r.passed());
  auto j = r.to_json();
  CHECK(j["status"] == "fail");
  CHECK(j["checks"][3]["witness"]["x"] == 1);
  CHECK_FALSE(j["checks"][0].contains("witness"));
  CHECK(j["checks"][1]["relation"] == ">");
  CHECK_FALSE(j.contains("wall_time_seconds"));
  std::string csv = r.to_csv();
  CHECK(csv.rfind("name,status,residual,relation,tolerance\n", 0) == 0);
  CHECK(csv.find("too_big,fail,") != std::string::npos);
}

TEST_CASE("free pick suite passes on a validated model and is deterministic") {
  CauchyModel m = counterexample_model();
  FreeSuiteOptions opt;
  opt.trials = 40;
  opt.seed = 5;
  SuiteReport a = free_pick_suite(model_function(m), m.b(), opt);
  SuiteReport b = free_pick_suite(model_function(m), m.b(), opt);
  CHECK(a.passed());
  CHECK(a.to_json().dump() == b.to_json().dump());
}

TEST_CASE("free pick suite flags a non-Hermitian A with a witness") {
  CauchyModel m = nonhermitian_fixture();
  FreeSuiteOptions opt;
  opt.trials = 20;
  SuiteReport r = free_pick_suite(model_function(m), m.b(), opt);
  CHECK_FALSE(r.passed());
  REQUIRE(r.checks[0].name == "pick_positivity");
  CHECK_FALSE(r.checks[0].passed);
  REQUIRE(r.checks[0].witness.has_value());
  MatPoint z = io::point_from_json(*r.checks[0].witness);
  CHECK(classify_region(z).in_open_uhp);
  CHECK(linalg::min_hermitian_eigenvalue(linalg::imag_part(eval_unchecked(m, z).flat())) < -1e-9);
}

TEST_CASE("evaluation errors become failures, not crashes") {
  AlgebraSpec c = AlgebraSpec::diagonal(1);
  PointFunction boom = [](const MatPoint&) -> MatPoint { throw SingularResolvent("boom", 0.0, 1.0); };
  FreeSuiteOptions opt;
  opt.trials = 3;
  SuiteReport r = free_pick_suite(boom, c, opt);
  CHECK_FALSE(r.passed());
  CHECK(r.checks[0].witness->contains("error"));
}

TEST_CASE("moment and tomiyama suites") {
  CHECK(moment_suite(counterexample_model(), 5, 2, 2, 1).passed());
  SuiteReport nh = moment_suite(nonhomomorphic_fixture(), 3, 1, 2, 1);
  CHECK_FALSE(nh.passed());
  CHECK(nh.checks[0].passed);  // k = 1 holds for any E with E∘psi = id
  CHECK(tomiyama_suite(counterexample_model(), 50, 2).passed());
  CHECK_FALSE(tomiyama_suite(nonhomomorphic_fixture(), 10, 2).passed());
  CHECK_THROWS_AS(moment_suite(counterexample_model(), 0, 1, 1, 1), InvalidArgument);
}

TEST_CASE("counterexample suite") {
  SuiteReport r = counterexample_suite();
  for (const auto& c : r.checks) {
    INFO(c.name << " residual " << c.residual);
    CHECK(c.passed);
  }
  auto find = [&](const std::string& name) {
    for (const auto& c : r.checks)
      if (c.name == name) return c;
    FAIL("missing check " << name);
    return CheckRecord{};
  };
  CHECK(find("nonpolynomial_witness").residual > 0.1);
  CHECK(find("control_first_component").residual <= 1e-10);
  CHECK(find("closed_form").residual <= 1e-10);
}
