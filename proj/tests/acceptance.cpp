// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <cstdio>
#include <functional>
#include <string>

#include "ncpick/ncpick.hpp"

using namespace ncpick;

namespace {

int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
  std::printf("%s  %2d  %-34s %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::vector<CauchyModel> homomorphic_models() {
  std::vector<CauchyModel> out{counterexample_model()};
  for (std::uint64_t s = 1; out.size() < 11; ++s) out.push_back(random_homomorphic_model(s));
  return out;
}

void counterexample_fidelity() {
  Stopwatch sw;
  CauchyModel m = counterexample_model();
  Rng rng(101);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    auto [z1, z2] = random_c2_uhp(rng);
    Mat f = eval(m, c2_point(z1, z2)).flat();
    auto [g1, g2] = counterexample_closed_form(z1, z2);
    worst = std::max({worst, std::abs(f(0, 0) - g1), std::abs(f(1, 1) - g2)});
  }
  double secs = sw.seconds();
  report(1, "counterexample fidelity", worst <= 1e-10 && secs < 1.0, fmt("max err %.2e, %.3f s", worst, secs));
}

void counterexample_failure() {
  WitnessResult w = nonpolynomial_witness(3, 1024, 0);
  WitnessResult c = nonpolynomial_witness(1, 1024, 0, 1);
  report(2, "non-polynomial witness", w.residual > 0.1 && c.residual <= 1e-10,
         fmt("degree-3 residual %.3f, control %.2e", w.residual, c.residual));
}

void moment_lemma() {
  double worst = 0;
  int model_id = 0;
  for (const CauchyModel& m : homomorphic_models()) {
    const int level = 1 + model_id++ % 3;
    for (const auto& c : moment_suite(m, 5, level, 3, 200 + static_cast<std::uint64_t>(model_id)).checks)
      worst = std::max(worst, c.residual);
  }
  double nh = 0;
  for (const auto& c : moment_suite(nonhomomorphic_fixture(), 3, 1, 3, 7).checks) nh = std::max(nh, c.residual);
  report(3, "moment lemma", worst <= 1e-10 && nh > 1e-3, fmt("homomorphic max %.2e, non-homomorphic %.3f", worst, nh));
}

void asymptotics() {
  double smin = 1e300, smax = -1e300;
  bool decade = true;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    CauchyModel m = random_homomorphic_model(s);
    AsymptoticReport r = asymptotic_residual(m, sample_uhp(m.b(), 2, 0.1, s), 1e2, 1e6, 9);
    smin = std::min(smin, r.slope);
    smax = std::max(smax, r.slope);
    decade = decade && r.residuals.back() <= r.residuals.front() / 10.0;
  }
  CauchyModel cx = counterexample_model();
  AsymptoticReport rc = asymptotic_residual(cx, sample_uhp(cx.b(), 2, 0.1, 0), 1e2, 1e6, 9);
  CauchyModel nh = nonhomomorphic_fixture();
  AsymptoticReport rn =
      asymptotic_residual([&](const MatPoint& z) { return eval_unchecked(nh, z); }, sample_uhp(nh.b(), 2, 0.1, 0), 1e2, 1e6, 9);
  double plateau = *std::min_element(rn.residuals.begin(), rn.residuals.end());
  bool ok = smin >= -1.3 && smax <= -0.7 && decade && rc.verdict == Verdict::cauchy_like && plateau > 1e-3;
  report(4, "asymptotics", ok,
         fmt("random slopes [%.3f, %.3f], non-homomorphic floor %.3f", smin, smax, plateau) +
             ", counterexample " + to_string(rc.verdict) + fmt(" (slope %.2f)", rc.slope));
}

void extraction_roundtrip() {
  double worst = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    HerglotzData d = random_herglotz_data(s);
    NevanlinnaData nd = extract(d);
    for (int t = 0; t < 50; ++t) {
      MatPoint z = sample_uhp(d.input(), 1 + t % 3, 0.1, derive_seed(s, static_cast<std::uint64_t>(t)));
      Mat rhs = linalg::amplify(d.t().data(), z.level()) + kI * herglotz_eval(d, cayley(z)).flat();
      worst = std::max(worst, linalg::op_norm(nev_eval(nd, z).flat() - rhs));
    }
  }
  report(5, "extraction round trip", worst <= 1e-8, fmt("max err %.2e over 1000 points", worst));
}

void kernel_lemma() {
  int ok = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    HerglotzData bad = random_herglotz_data(s, 8, 0.5);
    bool rejected = false;
    try {
      extract(bad);
    } catch (const RangeNotPerpendicular&) {
      rejected = true;
    }
    KernelSplit ks = kernel_split(bad.l());
    bool accepted = true;
    try {
      extract(HerglotzData(bad.input(), bad.output(), bad.t().data(), bad.l(), ks.projector * bad.v()));
    } catch (const Error&) {
      accepted = false;
    }
    ok += rejected && accepted;
  }
  report(6, "kernel condition", ok == 20, fmt("%.0f/20 pairs", ok));
}

void tomiyama() {
  double worst = 0, proj = 0;
  std::uint64_t seed = 0;
  for (const CauchyModel& m : homomorphic_models()) {
    if (seed == 10) break;
    TomiyamaReport r = tomiyama_check(m.e(), range_basis(m.psi()), 100, 1e-10, seed++);
    worst = std::max(worst, r.max_residual);
    proj = std::max(proj, r.max_projection_residual);
  }
  report(7, "Tomiyama property", worst <= 1e-10 && proj <= 1e-10, fmt("bimodule %.2e, projection step %.2e", worst, proj));
}

void free_axioms() {
  struct Named {
    const char* name;
    CauchyModel model;
  };
  std::vector<Named> models{{"counterexample", counterexample_model()},
                            {"classical_two_atom", classical_model({-1.0, 1.0}, {0.5, 0.5})},
                            {"point_mass", classical_model({0.0}, {1.0})},
                            {"nonhomomorphic", nonhomomorphic_fixture()},
                            {"nonhermitian_A", nonhermitian_fixture()}};
  FreeSuiteOptions opt;
  opt.trials = 500;
  opt.levels = 4;
  opt.direct_sum_tol = 1e-9;
  bool ok = true;
  double pick = -1e300, sum = 0, inter = 0;
  for (const auto& nm : models) {
    SuiteReport r = free_pick_suite(model_function(nm.model), nm.model.b(), opt);
    sum = std::max(sum, r.checks[1].residual);
    inter = std::max(inter, r.checks[2].residual);
    ok = ok && r.checks[1].passed && r.checks[2].passed;
    if (nm.model.validated()) {
      pick = std::max(pick, r.checks[0].residual);
      ok = ok && r.checks[0].passed;
    }
  }
  report(8, "free-function axioms", ok,
         fmt("min eig Im f %.2e, direct sum %.2e, intertwining %.2e", -pick, sum, inter));
}

void cayley_contraction() {
  AlgebraSpec s({2, 1});
  double max_norm = 0, worst = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    MatPoint z = sample_uhp(s, 1 + static_cast<int>(seed % 3), 0.1, seed);
    MatPoint lam = cayley(z);
    max_norm = std::max(max_norm, lam.norm());
    worst = std::max(worst, (inverse_cayley(lam).flat() - z.flat()).norm() / (1.0 + z.norm()));
  }
  report(9, "Cayley contraction", max_norm < 1.0 && worst <= 1e-10,
         fmt("margin %.3e, inverse err %.2e", 1.0 - max_norm, worst));
}

void classical_case() {
  CauchyModel m = classical_model({-1.0, 1.0}, {0.5, 0.5});
  AlgebraSpec c = AlgebraSpec::diagonal(1);
  auto at = [&](cplx z) { return eval(m, MatPoint::scalar_level(AlgElement::diagonal(c, {z}))).flat()(0, 0); };
  double err = std::abs(at(kI) - 0.5 * kI);
  Rng rng(10);
  double min_im = 1e300;
  for (int t = 0; t < 1000; ++t) min_im = std::min(min_im, at(cplx(rng.uniform(-3, 3), rng.uniform(1e-3, 3))).imag());
  report(10, "classical base case", err <= 1e-14 && min_im > 0, fmt("|f(i) - i/2| %.1e, min Im f %.2e", err, min_im));
}

ncrat::Expr random_expr(Rng& rng, int depth) {
  int pick = depth <= 1 ? rng.uniform_int(0, 1) : rng.uniform_int(0, 5);
  switch (pick) {
    case 0:
      return ncrat::Expr::var(rng.uniform_int(1, 3));
    case 1:
      return ncrat::Expr::constant(cplx(std::round(rng.uniform(0, 5) * 8) / 8, rng.uniform_int(0, 1) ? rng.uniform(-3, 3) : 0.0));
    case 2:
      return ncrat::Expr::neg(random_expr(rng, depth - 1));
    case 3:
      return ncrat::Expr::inv(random_expr(rng, depth - 1));
    default: {
      std::vector<ncrat::Expr> kids;
      for (int k = rng.uniform_int(2, 3); k > 0; --k) kids.push_back(random_expr(rng, depth - 1));
      return pick == 4 ? ncrat::Expr::add(std::move(kids)) : ncrat::Expr::mul(std::move(kids));
    }
  }
}

void parser() {
  Rng rng(11);
  int round_trips = 0;
  for (int t = 0; t < 1000; ++t) {
    ncrat::Expr e = random_expr(rng, 1 + t % 6);
    round_trips += ncrat::parse(ncrat::format(e)) == e;
  }
  ncrat::Expr first = ncrat::parse(kCounterexampleFirst), second = ncrat::parse(kCounterexampleSecond);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    auto [z1, z2] = random_c2_uhp(rng);
    std::vector<Mat> vars{Mat::Constant(1, 1, z1), Mat::Constant(1, 1, z2)};
    auto [g1, g2] = counterexample_closed_form(z1, z2);
    worst = std::max({worst, std::abs(ncrat::eval(first, vars)(0, 0) - g1), std::abs(ncrat::eval(second, vars)(0, 0) - g2)});
  }
  report(11, "parser", round_trips == 1000 && worst <= 1e-12, fmt("round trips %.0f/1000, expression err %.2e", round_trips, worst));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria{counterexample_fidelity, counterexample_failure, moment_lemma,
                                                    asymptotics, extraction_roundtrip, kernel_lemma, tomiyama,
                                                    free_axioms, cayley_contraction, classical_case, parser};
  for (size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), "(exception)", false, e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
