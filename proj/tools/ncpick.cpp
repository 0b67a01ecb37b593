// ncpick command-line front end.
// Exit codes: 0 all checks pass, 1 property violation, 2 input error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ncpick/ncpick.hpp"

namespace {

using namespace ncpick;
using nlohmann::json;

constexpr int kPass = 0;
constexpr int kViolation = 1;
constexpr int kInputError = 2;

struct Globals {
  std::uint64_t seed = 0;
  double tol = 1e-9;
  bool json_out = false;
  bool csv_out = false;
  bool timing = false;
};

int emit(const Globals& g, SuiteReport rep, const Stopwatch& clock) {
  if (g.timing) rep.wall_time_seconds = clock.seconds();
  if (g.csv_out)
    std::cout << rep.to_csv();
  else
    std::cout << io::dump(rep.to_json());
  return rep.passed() ? kPass : kViolation;
}

void write_or_print(const std::string& path, const json& j) {
  if (path.empty() || path == "-")
    std::cout << io::dump(j);
  else
    io::write_text_file(path, io::dump(j));
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string model, point, out;
};

int cmd_eval(const Globals&, const EvalArgs& a) {
  CauchyModel model = io::model_from_json(io::read_json_file(a.model));
  MatPoint z = io::point_from_json(io::read_json_file(a.point), &model.b());
  MatPoint f = model.validated() ? eval(model, z) : eval_unchecked(model, z);
  write_or_print(a.out, io::to_json(f));
  return kPass;
}

struct CheckPickArgs {
  std::string model;
  int trials = 200;
  int levels = 4;
};

int cmd_check_pick(const Globals& g, const CheckPickArgs& a) {
  if (a.trials < 1) throw InvalidArgument("--trials must be >= 1");
  if (a.levels < 1) throw InvalidArgument("--levels must be >= 1");
  Stopwatch clock;
  CauchyModel model = io::model_from_json(io::read_json_file(a.model));
  FreeSuiteOptions opt;
  opt.trials = a.trials;
  opt.levels = a.levels;
  opt.seed = g.seed;
  opt.pick_tol = g.tol;
  opt.intertwining_tol = g.tol;
  SuiteReport rep = free_pick_suite(model_function(model), model.b(), opt);
  rep.suite = "check-pick";
  return emit(g, std::move(rep), clock);
}

struct AsymArgs {
  std::string model, csv, point;
  double s_min = 1e2, s_max = 1e6;
  int points = 9;
  int level = 2;
};

int cmd_asymptotics(const Globals& g, const AsymArgs& a) {
  if (!(a.s_min >= 10.0 && a.s_max > a.s_min)) throw InvalidArgument("need 10 <= --s-min < --s-max");
  if (a.points < 5) throw InvalidArgument("--points must be >= 5");
  if (a.level < 1) throw InvalidArgument("--level must be >= 1");
  Stopwatch clock;
  CauchyModel model = io::model_from_json(io::read_json_file(a.model));
  MatPoint z = a.point.empty() ? sample_uhp(model.b(), a.level, 0.1, g.seed)
                               : io::point_from_json(io::read_json_file(a.point), &model.b());
  AsymptoticReport ar = asymptotic_residual(model_function(model), z, a.s_min, a.s_max, a.points);
  if (!a.csv.empty()) {
    std::string text = "s,residual\n";
    for (size_t i = 0; i < ar.s_grid.size(); ++i)
      text += json(ar.s_grid[i]).dump() + "," + json(ar.residuals[i]).dump() + "\n";
    io::write_text_file(a.csv, text);
  }
  SuiteReport rep;
  rep.suite = "asymptotics";
  rep.seed = g.seed;
  json witness{{"Z", io::to_json(z)}, {"slope", ar.slope}, {"residuals", ar.residuals}};
  rep.add_flag("cauchy_like", ar.verdict == Verdict::cauchy_like, witness);
  json j = rep.to_json();
  j["verdict"] = to_string(ar.verdict);
  j["slope"] = ar.slope;
  j["s"] = ar.s_grid;
  j["residual"] = ar.residuals;
  if (g.timing) j["wall_time_seconds"] = clock.seconds();
  if (g.csv_out)
    std::cout << rep.to_csv();
  else
    std::cout << io::dump(j);
  return rep.passed() ? kPass : kViolation;
}

struct ExtractArgs {
  std::string herglotz, out;
  double tol = 1e-8;
  double roundtrip_tol = 1e-8;
};

int cmd_extract(const Globals& g, const ExtractArgs& a) {
  Stopwatch clock;
  HerglotzData data = io::herglotz_from_json(io::read_json_file(a.herglotz));
  ExtractOptions opt;
  opt.tol_ker = a.tol;
  opt.tol_perp = a.tol;
  NevanlinnaData nd;
  try {
    nd = extract(data, opt);
  } catch (const RangeNotPerpendicular& e) {
    std::cerr << "ncpick: liminf condition violated: " << e.what() << "\n";
    return kViolation;
  }
  io::write_text_file(a.out, io::dump(io::to_json(nd)));
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    MatPoint z = sample_uhp(data.input(), 1 + t % 3, 0.1, derive_seed(g.seed, static_cast<std::uint64_t>(t)));
    Mat lhs = nev_eval(nd, z).flat();
    Mat rhs = herglotz_function(data, z).flat();
    worst = std::max(worst, linalg::op_norm(lhs - rhs) / (1.0 + linalg::op_norm(rhs)));
  }
  SuiteReport rep;
  rep.suite = "extract";
  rep.seed = g.seed;
  rep.add("roundtrip", worst, a.roundtrip_tol);
  if (g.timing) rep.wall_time_seconds = clock.seconds();
  json j = rep.to_json();
  j["is_cauchy"] = nd.is_cauchy;
  j["C"] = io::to_json(nd.c.data());
  j["roundtrip_residual"] = worst;
  if (g.csv_out)
    std::cout << rep.to_csv();
  else
    std::cout << io::dump(j);
  return rep.passed() ? kPass : kViolation;
}

int cmd_counterexample(const Globals& g, int samples) {
  Stopwatch clock;
  CounterexampleOptions opt;
  opt.seed = g.seed;
  opt.witness_samples = samples;
  return emit(g, counterexample_suite(opt), clock);
}

struct MomentArgs {
  std::string model;
  int k = 5;
  int level = 2;
  int draws = 3;
  double tol = 1e-10;
};

int cmd_moments(const Globals& g, const MomentArgs& a) {
  Stopwatch clock;
  CauchyModel model = io::model_from_json(io::read_json_file(a.model));
  return emit(g, moment_suite(model, a.k, a.level, a.draws, g.seed, a.tol), clock);
}

struct TomiyamaArgs {
  std::string model;
  int samples = 100;
  double tol = 1e-10;
};

int cmd_tomiyama(const Globals& g, const TomiyamaArgs& a) {
  Stopwatch clock;
  CauchyModel model = io::model_from_json(io::read_json_file(a.model));
  return emit(g, tomiyama_suite(model, a.samples, g.seed, a.tol), clock);
}

struct NcratArgs {
  std::string expr, vars_file, out;
};

std::vector<Mat> read_vars(const std::string& path) {
  if (path.empty()) return {};
  json j = io::read_json_file(path);
  const json& arr = j.is_object() && j.contains("vars") ? j["vars"] : j;
  if (!arr.is_array()) throw io::InputError("vars file must be a list of matrices or {\"vars\": [...]}");
  std::vector<Mat> vars;
  for (const auto& m : arr) vars.push_back(io::matrix_from_json(m));
  return vars;
}

int cmd_ncrat(const Globals&, const NcratArgs& a) {
  ncrat::Expr e = ncrat::parse(a.expr);
  std::vector<Mat> vars = read_vars(a.vars_file);
  try {
    write_or_print(a.out, io::to_json(ncrat::eval(e, vars)));
  } catch (const ncrat::SingularInverse& err) {
    std::cerr << "ncpick: " << err.what() << "\n";
    return kViolation;
  }
  return kPass;
}

void write_fixtures(const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto put = [&](const std::string& name, const json& j) { io::write_text_file((fs::path(dir) / name).string(), io::dump(j)); };
  put("counterexample.json", io::to_json(counterexample_model()));
  put("classical_two_atom.json", io::to_json(classical_model({-1.0, 1.0}, {0.5, 0.5})));
  put("point_mass.json", io::to_json(classical_model({0.0}, {1.0})));
  put("nonhomomorphic.json", io::to_json(nonhomomorphic_fixture()));
  put("nonhermitian_A.json", io::to_json(nonhermitian_fixture()));
  put("herglotz_classical.json", io::to_json(herglotz_from_classical({-1.0, 1.0}, {0.5, 0.5})));
  HerglotzData classical = herglotz_from_classical({-1.0, 1.0}, {0.5, 0.5});
  put("herglotz_shifted.json", io::to_json(HerglotzData(classical.input(), classical.output(),
                                                        classical.t().data() + Mat::Identity(1, 1), classical.l(),
                                                        classical.v())));
  put("herglotz_overlap.json", io::to_json(random_herglotz_data(1, 8, 0.5)));
  AlgebraSpec c = AlgebraSpec::diagonal(1);
  put("point_i.json", io::to_json(MatPoint::scalar_level(AlgElement::diagonal(c, {kI}))));
  put("point_c2.json", io::to_json(c2_point({0.3, 1.0}, {-0.5, 0.7})));
  put("vars_i.json", json{{"vars", json::array({io::to_json(Mat::Constant(1, 1, kI))})}});
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const io::InputError& e) {
    std::cerr << "ncpick: input error: " << e.what() << "\n";
    return kInputError;
  } catch (const ncrat::ParseError& e) {
    std::cerr << "ncpick: parse error at " << e.span().start << ": " << e.what() << "\n";
    return kInputError;
  } catch (const ncrat::UnboundVariable& e) {
    std::cerr << "ncpick: " << e.what() << "\n";
    return kInputError;
  } catch (const SingularResolvent& e) {
    std::cerr << "ncpick: singular resolvent: " << e.what() << "\n";
    return kViolation;
  } catch (const InvalidArgument& e) {
    std::cerr << "ncpick: invalid argument: " << e.what() << "\n";
    return kInputError;
  } catch (const SpecMismatch& e) {
    std::cerr << "ncpick: spec mismatch: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    std::cerr << "ncpick: " << e.what() << "\n";
    return kViolation;
  } catch (const std::exception& e) {
    std::cerr << "ncpick: internal error: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Free Pick functions, Cauchy transform models and their checks"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every sampled quantity")->capture_default_str();
  app.add_option("--tol", g.tol, "Tolerance for Pick and free-function checks")->capture_default_str();
  auto* fmt = app.add_option_group("format");
  fmt->add_flag("--json", g.json_out, "JSON report (default)");
  fmt->add_flag("--csv", g.csv_out, "CSV report");
  fmt->require_option(0, 1);
  app.add_flag("--timing", g.timing, "Add wall time to reports");

  int rc = kPass;

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a Cauchy model at a matrix point");
  eval_cmd->add_option("model", ea.model, "Model JSON")->required();
  eval_cmd->add_option("point", ea.point, "MatPoint JSON")->required();
  eval_cmd->add_option("-o,--out", ea.out, "Output file (stdout if omitted)");
  eval_cmd->callback([&] { rc = guarded([&] { return cmd_eval(g, ea); }); });

  CheckPickArgs ca;
  auto* pick_cmd = app.add_subcommand("check-pick", "Pick positivity, direct sums and intertwining");
  pick_cmd->add_option("model", ca.model, "Model JSON")->required();
  pick_cmd->add_option("--trials", ca.trials, "Sampled points")->capture_default_str();
  pick_cmd->add_option("--levels", ca.levels, "Levels 1..k")->capture_default_str();
  pick_cmd->callback([&] { rc = guarded([&] { return cmd_check_pick(g, ca); }); });

  AsymArgs aa;
  auto* asym_cmd = app.add_subcommand("asymptotics", "Residual |s f(sZ) + Z^-1| along a geometric grid");
  asym_cmd->add_option("model", aa.model, "Model JSON")->required();
  asym_cmd->add_option("--s-min", aa.s_min)->capture_default_str();
  asym_cmd->add_option("--s-max", aa.s_max)->capture_default_str();
  asym_cmd->add_option("--points", aa.points)->capture_default_str();
  asym_cmd->add_option("--level", aa.level, "Level of the sampled Z")->capture_default_str();
  asym_cmd->add_option("--point", aa.point, "MatPoint JSON to use instead of a sampled Z");
  asym_cmd->add_option("--csv", aa.csv, "Write s,residual CSV here");
  asym_cmd->callback([&] { rc = guarded([&] { return cmd_asymptotics(g, aa); }); });

  ExtractArgs xa;
  auto* ext_cmd = app.add_subcommand("extract", "Nevanlinna data from Herglotz data");
  ext_cmd->add_option("herglotz", xa.herglotz, "HerglotzData JSON")->required();
  ext_cmd->add_option("out", xa.out, "NevanlinnaData output")->required();
  ext_cmd->add_option("--tol", xa.tol, "Kernel and perpendicularity tolerance")->capture_default_str();
  ext_cmd->add_option("--roundtrip-tol", xa.roundtrip_tol)->capture_default_str();
  ext_cmd->callback([&] { rc = guarded([&] { return cmd_extract(g, xa); }); });

  int witness_samples = 1024;
  auto* cex_cmd = app.add_subcommand("counterexample", "All checks on the two-block counterexample");
  cex_cmd->add_option("--samples", witness_samples, "Witness fit samples")->capture_default_str()->check(CLI::PositiveNumber);
  cex_cmd->callback([&] { rc = guarded([&] { return cmd_counterexample(g, witness_samples); }); });

  MomentArgs ma;
  auto* mom_cmd = app.add_subcommand("moments", "E(psi(H1)...psi(Hk)) = H1...Hk");
  mom_cmd->add_option("model", ma.model, "Model JSON")->required();
  mom_cmd->add_option("--k", ma.k, "Largest k")->capture_default_str();
  mom_cmd->add_option("--level", ma.level)->capture_default_str();
  mom_cmd->add_option("--draws", ma.draws, "Random draws per k")->capture_default_str();
  mom_cmd->add_option("--tol", ma.tol)->capture_default_str();
  mom_cmd->callback([&] { rc = guarded([&] { return cmd_moments(g, ma); }); });

  TomiyamaArgs ta;
  auto* tom_cmd = app.add_subcommand("tomiyama", "E(b1 m b2) = E(b1)E(m)E(b2) on the range of psi");
  tom_cmd->add_option("model", ta.model, "Model JSON")->required();
  tom_cmd->add_option("--samples", ta.samples)->capture_default_str();
  tom_cmd->add_option("--tol", ta.tol)->capture_default_str();
  tom_cmd->callback([&] { rc = guarded([&] { return cmd_tomiyama(g, ta); }); });

  NcratArgs na;
  auto* nc_cmd = app.add_subcommand("ncrat", "Evaluate a noncommutative rational expression");
  nc_cmd->add_option("--expr", na.expr, "Expression, e.g. -inv(Z1)")->required();
  nc_cmd->add_option("--vars-file", na.vars_file, "JSON list of matrices Z1, Z2, ...");
  nc_cmd->add_option("-o,--out", na.out, "Output file (stdout if omitted)");
  nc_cmd->callback([&] { rc = guarded([&] { return cmd_ncrat(g, na); }); });

  std::string fixture_dir;
  auto* fix_cmd = app.add_subcommand("write-fixtures", "Regenerate the bundled fixture files");
  fix_cmd->add_option("dir", fixture_dir)->required();
  fix_cmd->callback([&] {
    rc = guarded([&] {
      write_fixtures(fixture_dir);
      return kPass;
    });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kPass : kInputError;
  }
  return rc;
}
