#pragma once

// Property suites over free functions and the report type they emit.

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ncpick/io.hpp"
#include "ncpick/ncrat.hpp"

namespace ncpick {

struct CheckRecord {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  double tolerance = 0.0;
  bool lower_bound = false;  // passes iff residual > tolerance
  std::optional<nlohmann::json> witness;
};

struct SuiteReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<CheckRecord> checks;
  std::optional<double> wall_time_seconds;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }

  /// Residual compared with `tolerance` using <=.
  CheckRecord& add(std::string name, double residual, double tolerance, std::optional<nlohmann::json> witness = {}) {
    bool ok = residual <= tolerance;
    checks.push_back({std::move(name), ok, residual, tolerance, false, ok ? std::nullopt : std::move(witness)});
    return checks.back();
  }

  /// Value that must strictly exceed `threshold`.
  CheckRecord& add_above(std::string name, double value, double threshold, std::optional<nlohmann::json> witness = {}) {
    bool ok = value > threshold;
    checks.push_back({std::move(name), ok, value, threshold, true, ok ? std::nullopt : std::move(witness)});
    return checks.back();
  }

  CheckRecord& add_flag(std::string name, bool ok, std::optional<nlohmann::json> witness = {}) {
    checks.push_back({std::move(name), ok, ok ? 0.0 : 1.0, 0.0, false, ok ? std::nullopt : std::move(witness)});
    return checks.back();
  }

  void append(const SuiteReport& other) {
    for (const auto& c : other.checks) {
      checks.push_back(c);
      checks.back().name = other.suite + "." + c.name;
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : checks) {
      nlohmann::json j{{"name", c.name},
                       {"status", c.passed ? "pass" : "fail"},
                       {"residual", c.residual},
                       {"tolerance", c.tolerance},
                       {"relation", c.lower_bound ? ">" : "<="}};
      if (c.witness) j["witness"] = *c.witness;
      arr.push_back(std::move(j));
    }
    nlohmann::json out{{"suite", suite}, {"seed", seed}, {"status", passed() ? "pass" : "fail"}, {"checks", arr}};
    if (wall_time_seconds) out["wall_time_seconds"] = *wall_time_seconds;
    return out;
  }

  std::string to_csv() const {
    std::string out = "name,status,residual,relation,tolerance\n";
    for (const auto& c : checks) {
      nlohmann::json r = c.residual, t = c.tolerance;
      out += c.name + "," + (c.passed ? "pass" : "fail") + "," + r.dump() + "," + (c.lower_bound ? ">" : "<=") + "," +
             t.dump() + "\n";
    }
    return out;
  }
};

using PointFunction = std::function<MatPoint(const MatPoint&)>;

struct FreeSuiteOptions {
  int trials = 200;
  int levels = 4;
  double margin = 0.1;
  double pick_tol = 1e-9;
  double intertwining_tol = 1e-9;
  double direct_sum_tol = 1e-10;
  std::uint64_t seed = 0;
};

/// Pick positivity, direct sums and intertwining for a function on Pi(B).
/// Evaluation errors count as violations with the offending point as witness.
inline SuiteReport free_pick_suite(const PointFunction& f, const AlgebraSpec& spec, const FreeSuiteOptions& opt) {
  SuiteReport rep;
  rep.suite = "free_pick";
  rep.seed = opt.seed;
  double worst_pick = -1e300;  // largest violation, i.e. -min eigenvalue
  double worst_sum = 0.0, worst_int = 0.0;
  std::optional<nlohmann::json> pick_witness, sum_witness, int_witness, error_witness;
  for (int t = 0; t < opt.trials; ++t) {
    const int level = 1 + t % opt.levels;
    MatPoint z = sample_uhp(spec, level, opt.margin, derive_seed(opt.seed, static_cast<std::uint64_t>(t)));
    try {
      MatPoint fz = f(z);
      double neg = -linalg::min_hermitian_eigenvalue(linalg::imag_part(fz.flat()));
      if (neg > worst_pick) {
        worst_pick = neg;
        if (neg > opt.pick_tol) pick_witness = io::to_json(z);
      }
      MatPoint w = sample_uhp(spec, 1 + (t + 1) % 2, opt.margin, derive_seed(opt.seed ^ 0x5a5a5a5aULL, static_cast<std::uint64_t>(t)));
      Mat sum_expected = linalg::direct_sum(fz.flat(), f(w).flat());
      double sres = (f(direct_sum(z, w)).flat() - sum_expected).norm() / (1.0 + sum_expected.norm());
      if (sres > worst_sum) {
        worst_sum = sres;
        if (sres > opt.direct_sum_tol) sum_witness = io::to_json(z);
      }
      const int d = fz.spec().total_dim();
      for (const auto& c : make_intertwiner_cases(z, derive_seed(opt.seed + 1, static_cast<std::uint64_t>(t)))) {
        MatPoint fx = f(c.x);
        MatPoint fy = f(c.y);
        double scale = 1.0 + linalg::op_norm(c.gamma) * (fx.norm() + fy.norm());
        double res = intertwining_residual(c.gamma, fx.flat(), fy.flat(), d) / scale;
        if (res > worst_int) {
          worst_int = res;
          if (res > opt.intertwining_tol) int_witness = nlohmann::json{{"case", c.kind}, {"X", io::to_json(c.x)}};
        }
      }
    } catch (const Error& e) {
      worst_pick = std::max(worst_pick, std::numeric_limits<double>::infinity());
      error_witness = nlohmann::json{{"error", e.what()}, {"Z", io::to_json(z)}};
      pick_witness = error_witness;
      break;
    }
  }
  rep.add("pick_positivity", worst_pick, opt.pick_tol, pick_witness);
  rep.add("direct_sum", worst_sum, opt.direct_sum_tol, sum_witness);
  rep.add("intertwining", worst_int, opt.intertwining_tol, int_witness);
  return rep;
}

/// Level-1 point of Pi(C^2) with Re in [-2, 2] and Im in [0.05, 2].
inline std::pair<cplx, cplx> random_c2_uhp(Rng& rng) {
  cplx z1(rng.uniform(-2.0, 2.0), rng.uniform(0.05, 2.0));
  cplx z2(rng.uniform(-2.0, 2.0), rng.uniform(0.05, 2.0));
  return {z1, z2};
}

/// f evaluated on the model; unchecked models skip the region test.
inline PointFunction model_function(const CauchyModel& model) {
  if (model.validated()) return [&model](const MatPoint& z) { return eval(model, z); };
  return [&model](const MatPoint& z) { return eval_unchecked(model, z); };
}

inline SuiteReport moment_suite(const CauchyModel& model, int kmax, int level, int draws, std::uint64_t seed,
                                double tol = 1e-10) {
  if (kmax < 1) throw InvalidArgument("moments: k must be >= 1");
  if (level < 1) throw InvalidArgument("moments: level must be >= 1");
  SuiteReport rep;
  rep.suite = "moments";
  rep.seed = seed;
  Rng rng(seed);
  for (int k = 1; k <= kmax; ++k) {
    double worst = 0.0;
    std::optional<nlohmann::json> witness;
    for (int t = 0; t < draws; ++t) {
      std::vector<MatPoint> hs;
      for (int j = 0; j < k; ++j) hs.push_back(random_point(model.b(), level, rng));
      double res = moment(model, hs).residual;
      if (res > worst) {
        worst = res;
        if (res > tol) {
          witness = nlohmann::json::array();
          for (const auto& h : hs) witness->push_back(io::to_json(h));
        }
      }
    }
    rep.add("k=" + std::to_string(k), worst, tol, witness);
  }
  return rep;
}

inline SuiteReport tomiyama_suite(const CauchyModel& model, int samples, std::uint64_t seed, double tol = 1e-10) {
  if (samples < 1) throw InvalidArgument("tomiyama: samples must be >= 1");
  SuiteReport rep;
  rep.suite = "tomiyama";
  rep.seed = seed;
  TomiyamaReport tr;
  try {
    tr = tomiyama_check(model.e(), range_basis(model.psi()), samples, tol, seed);
  } catch (const InvalidArgument& e) {
    rep.add_flag("homomorphic_on_range", false, nlohmann::json{{"error", e.what()}});
    return rep;
  }
  rep.add_flag("homomorphic_on_range", true);
  std::optional<nlohmann::json> witness;
  if (tr.witness)
    witness = nlohmann::json{{"b1", io::to_json(tr.witness->b1)}, {"m", io::to_json(tr.witness->m)}, {"b2", io::to_json(tr.witness->b2)}};
  rep.add("bimodule", tr.max_residual, tol, witness);
  rep.add("projection_step", tr.max_projection_residual, tol);
  return rep;
}

struct CounterexampleOptions {
  int points = 100;
  int witness_degree = 3;
  int witness_samples = 1024;
  double closed_form_tol = 1e-10;
  double ncrat_tol = 1e-12;
  double witness_threshold = 0.1;
  double control_tol = 1e-10;
  double stability_tol = 0.1;
  std::uint64_t seed = 0;
};

/// Everything checkable about the two-block counterexample in one report.
inline SuiteReport counterexample_suite(const CounterexampleOptions& opt = {}) {
  SuiteReport rep;
  rep.suite = "counterexample";
  rep.seed = opt.seed;
  const CauchyModel model = counterexample_model();
  const AlgebraSpec& b = model.b();
  const AlgebraSpec& m = model.m();

  Mat e_out = apply(model.e(), AlgElement::diagonal(m, {3.0, 4.0, 5.0})).data();
  rep.add("E(3,4,5)=(3,4)", (e_out - AlgElement::diagonal(b, {3.0, 4.0}).data()).norm(), 1e-14);
  Mat psi_out = apply(model.psi(), AlgElement::diagonal(b, {1.0, 2.0})).data();
  rep.add("psi(1,2)=(1,2,1.5)", (psi_out - AlgElement::diagonal(m, {1.0, 2.0, 1.5}).data()).norm(), 1e-14);
  rep.add_flag("conditional_expectation_pair", check_dilation_pair(model.e(), model.psi()));
  rep.add_flag("homomorphic_certified", model.homomorphic_certified());

  const ncrat::Expr first = ncrat::parse(kCounterexampleFirst);
  const ncrat::Expr second = ncrat::parse(kCounterexampleSecond);
  Rng rng(opt.seed);
  double worst_cf = 0.0, worst_nc = 0.0;
  std::optional<nlohmann::json> cf_witness, nc_witness;
  for (int t = 0; t < opt.points; ++t) {
    auto [z1, z2] = random_c2_uhp(rng);
    Mat f = eval(model, c2_point(z1, z2)).flat();
    auto [g1, g2] = counterexample_closed_form(z1, z2);
    double cf = std::max(std::abs(f(0, 0) - g1), std::abs(f(1, 1) - g2));
    if (cf > worst_cf) {
      worst_cf = cf;
      if (cf > opt.closed_form_tol) cf_witness = nlohmann::json{io::to_json(z1), io::to_json(z2)};
    }
    std::vector<Mat> vars{Mat::Constant(1, 1, z1), Mat::Constant(1, 1, z2)};
    double nc = std::max(std::abs(ncrat::eval(first, vars)(0, 0) - f(0, 0)), std::abs(ncrat::eval(second, vars)(0, 0) - f(1, 1)));
    if (nc > worst_nc) {
      worst_nc = nc;
      if (nc > opt.ncrat_tol) nc_witness = nlohmann::json{io::to_json(z1), io::to_json(z2)};
    }
  }
  rep.add("closed_form", worst_cf, opt.closed_form_tol, cf_witness);
  rep.add("ncrat_expression", worst_nc, opt.ncrat_tol, nc_witness);

  const int deg = opt.witness_degree;
  WitnessResult w = nonpolynomial_witness(deg, opt.witness_samples, opt.seed);
  WitnessResult w2 = nonpolynomial_witness(deg, 2 * opt.witness_samples, opt.seed);
  WitnessResult control = nonpolynomial_witness(1, opt.witness_samples, opt.seed, 1);
  rep.add_above("nonpolynomial_witness", w.residual, opt.witness_threshold);
  rep.add("witness_doubling_change", std::abs(w2.residual - w.residual) / w.residual, opt.stability_tol);
  rep.add("control_first_component", control.residual, opt.control_tol);

  FreeSuiteOptions fo;
  fo.seed = opt.seed;
  rep.append(free_pick_suite(model_function(model), b, fo));
  rep.append(moment_suite(model, 5, 2, 3, opt.seed));
  MatPoint z = sample_uhp(b, 2, 0.1, opt.seed);
  AsymptoticReport ar = asymptotic_residual(model, z, 1e2, 1e6, 9);
  rep.add_flag("asymptotics_cauchy_like", ar.verdict == Verdict::cauchy_like, io::to_json(z));
  return rep;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace ncpick
