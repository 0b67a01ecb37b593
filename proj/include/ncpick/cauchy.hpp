#pragma once

// Noncommutative Cauchy-transform models
//
//   f(Z) = (E (x) id_n)[ (A (x) I_n - (psi (x) id_n)(Z))^-1 ]
//
// with B, M block algebras, A Hermitian in M, E: M -> B and psi: B -> M unital
// completely positive, E∘psi = id. Also the moment lemma, the asymptotic
// test s f(sZ) -> -Z^-1, the classical discrete-measure case and the
// two-dimensional counterexample where E is a coordinate projection.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ncpick/cpmaps.hpp"

namespace ncpick {

class CauchyModel {
 public:
  CauchyModel() = default;

  /// Validated construction: A Hermitian (symmetrized), E and psi unital CP, E∘psi = id.
  static CauchyModel make(AlgebraSpec b, AlgebraSpec m, const Mat& a, LinMap e, LinMap psi, std::string name = {}) {
    check_shapes(b, m, a, e, psi);
    Mat herm = linalg::enforce_hermitian(a, "CauchyModel: A");
    if (!is_completely_positive(e)) throw InvalidArgument("CauchyModel: E is not completely positive");
    if (!is_unital(e)) throw InvalidArgument("CauchyModel: E is not unital");
    if (!is_completely_positive(psi)) throw InvalidArgument("CauchyModel: psi is not completely positive");
    if (!is_unital(psi)) throw InvalidArgument("CauchyModel: psi is not unital");
    if (!check_dilation_pair(e, psi, 1e-10)) throw InvalidArgument("CauchyModel: E∘psi is not the identity");
    LinMapFlags ef = e.flags();
    ef.unital = ef.cp_verified = true;
    LinMapFlags pf = psi.flags();
    pf.unital = pf.cp_verified = true;
    AlgElement a_elem = AlgElement::project(m, herm);
    CauchyModel out(std::move(b), std::move(m), std::move(a_elem), e.with_flags(ef), psi.with_flags(pf),
                    std::move(name));
    out.validated_ = true;
    return out;
  }

  /// No positivity or dilation checks; shapes only. For negative controls.
  static CauchyModel unchecked(AlgebraSpec b, AlgebraSpec m, const Mat& a, LinMap e, LinMap psi,
                               std::string name = {}) {
    check_shapes(b, m, a, e, psi);
    AlgElement a_elem = AlgElement::project(m, a);
    return CauchyModel(std::move(b), std::move(m), std::move(a_elem), std::move(e), std::move(psi),
                       std::move(name));
  }

  const AlgebraSpec& b() const { return b_; }
  const AlgebraSpec& m() const { return m_; }
  const AlgElement& a() const { return a_; }
  const LinMap& e() const { return e_; }
  const LinMap& psi() const { return psi_; }
  const std::string& name() const { return name_; }
  bool validated() const { return validated_; }
  bool homomorphic_certified() const { return homomorphic_; }

 private:
  CauchyModel(AlgebraSpec b, AlgebraSpec m, AlgElement a, LinMap e, LinMap psi, std::string name)
      : b_(std::move(b)), m_(std::move(m)), a_(std::move(a)), e_(std::move(e)), psi_(std::move(psi)),
        name_(std::move(name)) {
    homomorphic_ = is_homomorphic_on(e_, range_basis(psi_), 4, 1e-10);
  }

  static void check_shapes(const AlgebraSpec& b, const AlgebraSpec& m, const Mat& a, const LinMap& e,
                           const LinMap& psi) {
    require_same_spec(e.dom(), m, "CauchyModel E domain");
    require_same_spec(e.cod(), b, "CauchyModel E codomain");
    require_same_spec(psi.dom(), b, "CauchyModel psi domain");
    require_same_spec(psi.cod(), m, "CauchyModel psi codomain");
    if (a.rows() != m.total_dim() || a.cols() != m.total_dim()) throw InvalidArgument("CauchyModel: A has wrong size");
  }

  AlgebraSpec b_;
  AlgebraSpec m_;
  AlgElement a_;
  LinMap e_;
  LinMap psi_;
  std::string name_;
  bool validated_ = false;
  bool homomorphic_ = false;
};

/// (A (x) I_n - (psi (x) id)(Z))^-1 over M, without a region check.
inline MatPoint model_resolvent(const CauchyModel& model, const MatPoint& z) {
  require_same_spec(model.b(), z.spec(), "eval");
  MatPoint psi_z = apply_amplified(model.psi(), z);
  Mat op = linalg::amplify(model.a().data(), z.level()) - psi_z.flat();
  Mat inv = linalg::guarded_inverse(op, "eval: A (x) I - psi(Z)");
  return MatPoint::from_flat(model.m(), inv, 1e-9);
}

/// f(Z) without requiring Z in the upper half plane (used by series extraction).
inline MatPoint eval_unchecked(const CauchyModel& model, const MatPoint& z) {
  return apply_amplified(model.e(), model_resolvent(model, z));
}

/// f(Z) for Z in the open upper half plane over B.
inline MatPoint eval(const CauchyModel& model, const MatPoint& z) {
  require_same_spec(model.b(), z.spec(), "eval");
  RegionReport r = classify_region(z);
  if (!r.in_open_uhp) throw InvalidArgument("eval: Z is not in the open upper half plane (min eig Im Z = " +
                                            std::to_string(r.min_im_eigenvalue) + ")");
  return eval_unchecked(model, z);
}

// ---------------------------------------------------------------------------
// Asymptotics

enum class Verdict { cauchy_like, fails };

inline const char* to_string(Verdict v) { return v == Verdict::cauchy_like ? "cauchy_like" : "fails"; }

struct AsymptoticReport {
  std::vector<double> s_grid;
  std::vector<double> residuals;  // |s f(sZ) + Z^-1|
  double slope = 0.0;             // least-squares slope of log r against log s
  Verdict verdict = Verdict::fails;
};

inline std::vector<double> geometric_grid(double lo, double hi, int points) {
  std::vector<double> out(static_cast<size_t>(points));
  for (int k = 0; k < points; ++k)
    out[static_cast<size_t>(k)] = lo * std::pow(hi / lo, static_cast<double>(k) / (points - 1));
  return out;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double mx = 0, my = 0;
  for (size_t k = 0; k < n; ++k) {
    mx += std::log(x[k]);
    my += std::log(std::max(y[k], 1e-300));
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0;
  for (size_t k = 0; k < n; ++k) {
    double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(std::max(y[k], 1e-300)) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

/// Residual decay r(s) = |s f(sZ) + Z^-1| over a geometric grid. Works for any
/// function of Z, so the reconstructed Nevanlinna form can reuse it.
inline AsymptoticReport asymptotic_residual(const std::function<MatPoint(const MatPoint&)>& f, const MatPoint& z,
                                            double s_min, double s_max, int points) {
  if (!(s_min >= 10.0)) throw InvalidArgument("asymptotic_residual: s_min must be >= 10");
  if (!(s_max > s_min)) throw InvalidArgument("asymptotic_residual: s_max must exceed s_min");
  if (points < 5) throw InvalidArgument("asymptotic_residual: need at least 5 points");
  Mat zinv = linalg::guarded_inverse(z.flat(), "asymptotic_residual: Z");
  AsymptoticReport rep;
  rep.s_grid = geometric_grid(s_min, s_max, points);
  for (double s : rep.s_grid) {
    MatPoint fs = f(cplx(s) * z);
    rep.residuals.push_back(linalg::op_norm(s * fs.flat() + zinv));
  }
  rep.slope = loglog_slope(rep.s_grid, rep.residuals);
  const double floor = 1e-13 * (1.0 + linalg::op_norm(zinv));
  bool exact = rep.residuals.front() <= floor;
  bool decays = rep.slope <= -0.7 && rep.residuals.back() <= rep.residuals.front() / 10.0;
  rep.verdict = (exact || decays) ? Verdict::cauchy_like : Verdict::fails;
  return rep;
}

inline AsymptoticReport asymptotic_residual(const CauchyModel& model, const MatPoint& z, double s_min, double s_max,
                                            int points) {
  return asymptotic_residual([&](const MatPoint& w) { return eval(model, w); }, z, s_min, s_max, points);
}

// ---------------------------------------------------------------------------
// Moment lemma: E(psi(H_1) ... psi(H_k)) = H_1 ... H_k

struct MomentResult {
  MatPoint value;   // block (1, k+1) of (E (x) id)[(psi (x) id)(H)^k]
  MatPoint target;  // H_1 ... H_k
  double residual = 0.0;
};

/// H = block superdiagonal matrix with H_1..H_k, level n(k+1).
inline MatPoint superdiagonal_point(const std::vector<MatPoint>& hs) {
  const auto& spec = hs.front().spec();
  const int n = hs.front().level();
  const int k = static_cast<int>(hs.size());
  const Eigen::Index blk = static_cast<Eigen::Index>(n) * spec.total_dim();
  Mat big = Mat::Zero(blk * (k + 1), blk * (k + 1));
  for (int i = 0; i < k; ++i) big.block(i * blk, (i + 1) * blk, blk, blk) = hs[static_cast<size_t>(i)].flat();
  return MatPoint::from_flat(spec, big);
}

inline MomentResult moment(const CauchyModel& model, const std::vector<MatPoint>& hs) {
  if (hs.empty()) throw InvalidArgument("moment: need k >= 1 points");
  const int n = hs.front().level();
  for (const auto& h : hs) {
    require_same_spec(model.b(), h.spec(), "moment");
    if (h.level() != n) throw InvalidArgument("moment: all H_i must share a level");
  }
  const int k = static_cast<int>(hs.size());
  MatPoint big = superdiagonal_point(hs);
  MatPoint psi_h = apply_amplified(model.psi(), big);
  Mat power = Mat::Identity(psi_h.flat_dim(), psi_h.flat_dim());
  for (int j = 0; j < k; ++j) power = power * psi_h.flat();
  MatPoint e_pow = apply_amplified(model.e(), MatPoint::from_flat(model.m(), power, 1e-9));
  const Eigen::Index blk = static_cast<Eigen::Index>(n) * model.b().total_dim();
  MatPoint value = MatPoint::from_flat(model.b(), e_pow.flat().block(0, k * blk, blk, blk));
  Mat prod = hs.front().flat();
  for (int j = 1; j < k; ++j) prod = prod * hs[static_cast<size_t>(j)].flat();
  MatPoint target = MatPoint::from_flat(model.b(), prod);
  double residual = linalg::op_norm(value.flat() - prod);
  return MomentResult{std::move(value), std::move(target), residual};
}

// ---------------------------------------------------------------------------
// Bundled models

/// B = C, M = C^k, A = diag(atoms), psi(z) = z 1, E(x) = sum w_i x_i.
/// At level 1, f(z) = sum w_i / (t_i - z).
inline CauchyModel classical_model(const std::vector<double>& atoms, const std::vector<double>& weights) {
  if (atoms.empty() || atoms.size() != weights.size())
    throw InvalidArgument("classical_model: atoms and weights must be non-empty and of equal length");
  double total = 0;
  for (double w : weights) {
    if (!(w > 0)) throw InvalidArgument("classical_model: weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("classical_model: weights must sum to 1");
  const int k = static_cast<int>(atoms.size());
  AlgebraSpec b = AlgebraSpec::diagonal(1);
  AlgebraSpec m = AlgebraSpec::diagonal(k);
  Mat a = Mat::Zero(k, k);
  for (int i = 0; i < k; ++i) a(i, i) = atoms[static_cast<size_t>(i)];
  LinMap psi = LinMap::from_function(b, m, [k](const Mat& x) { return Mat(x(0, 0) * Mat::Identity(k, k)); });
  LinMap e = LinMap::from_function(m, b, [&weights, k](const Mat& x) {
    cplx acc = 0;
    for (int i = 0; i < k; ++i) acc += weights[static_cast<size_t>(i)] * x(i, i);
    return Mat::Constant(1, 1, acc);
  });
  return CauchyModel::make(b, m, a, e, psi, "classical");
}

/// B = C^2, M = M_3, psi(z1, z2) = diag(z1, z2, (z1 + z2)/2), E(m) = (m11, m22),
/// A the Hermitian 0/1 matrix killing e1 and swapping e2, e3.
inline CauchyModel counterexample_model() {
  AlgebraSpec b = AlgebraSpec::diagonal(2);
  AlgebraSpec m = AlgebraSpec::full(3);
  LinMap psi = LinMap::from_function(b, m, [](const Mat& x) {
    Mat out = Mat::Zero(3, 3);
    out(0, 0) = x(0, 0);
    out(1, 1) = x(1, 1);
    out(2, 2) = (x(0, 0) + x(1, 1)) / 2.0;
    return out;
  });
  LinMap e = LinMap::from_function(m, b, [](const Mat& x) {
    Mat out = Mat::Zero(2, 2);
    out(0, 0) = x(0, 0);
    out(1, 1) = x(1, 1);
    return out;
  });
  Mat a = Mat::Zero(3, 3);
  a(1, 2) = a(2, 1) = 1.0;
  return CauchyModel::make(b, m, a, e, psi, "counterexample");
}

/// Scalar closed form of the counterexample, pinned by the 3x3 resolvent:
/// (-z1^-1, -(z2 - 2 (z1 + z2)^-1)^-1).
inline std::pair<cplx, cplx> counterexample_closed_form(cplx z1, cplx z2) {
  return {-1.0 / z1, -1.0 / (z2 - 2.0 / (z1 + z2))};
}

/// Noncommutative form of the second component, as an ncrat expression.
inline constexpr const char* kCounterexampleFirst = "-inv(Z1)";
inline constexpr const char* kCounterexampleSecond = "-inv(Z2)*inv(1 - 2*inv(Z1+Z2)*inv(Z2))";

/// Random homomorphic model: B random with d_B <= max_db, M = M_{d_B + r},
/// psi(b) = b + phi(b) with phi a random unital CP map into M_r,
/// E(m) = pinching onto B of the top-left d_B corner, A random Hermitian.
inline CauchyModel random_homomorphic_model(std::uint64_t seed, int max_db = 3, int max_extra = 3) {
  Rng rng(seed);
  static const std::vector<std::vector<int>> shapes{{1}, {2}, {3}, {1, 1}, {1, 2}, {2, 1}, {1, 1, 1}};
  std::vector<std::vector<int>> allowed;
  for (const auto& s : shapes) {
    int tot = 0;
    for (int v : s) tot += v;
    if (tot <= max_db) allowed.push_back(s);
  }
  AlgebraSpec b(allowed[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(allowed.size()) - 1))]);
  const int db = b.total_dim();
  const int extra = rng.uniform_int(1, max_extra);
  const int dm = db + extra;
  AlgebraSpec m = AlgebraSpec::full(dm);

  // Isometry K: (extra * db) x extra, split into Kraus blocks K_i (db x extra).
  Mat g = rng.ginibre(static_cast<Eigen::Index>(extra) * db, extra);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat iso = qr.householderQ() * Mat::Identity(g.rows(), extra);
  std::vector<Mat> kraus;
  for (int i = 0; i < extra; ++i) kraus.push_back(iso.middleRows(static_cast<Eigen::Index>(i) * db, db));

  LinMap psi = LinMap::from_function(b, m, [&](const Mat& x) {
    Mat out = Mat::Zero(dm, dm);
    out.topLeftCorner(db, db) = x;
    Mat phi = Mat::Zero(extra, extra);
    for (const auto& k : kraus) phi += k.adjoint() * x * k;
    out.bottomRightCorner(extra, extra) = phi;
    return out;
  });
  LinMap e = LinMap::from_function(m, b, [&](const Mat& x) { return b.project(x.topLeftCorner(db, db)); });
  Mat a = rng.hermitian(dm);
  return CauchyModel::make(b, m, a, e, psi, "random_homomorphic");
}

/// E∘psi = id with E not multiplicative on alg(range psi): B = M = M_2,
/// psi = E = transpose. Positive and unital but not completely positive;
/// any unital CP pair with E∘psi = id is automatically homomorphic.
inline CauchyModel nonhomomorphic_fixture() {
  AlgebraSpec b = AlgebraSpec::full(2);
  Mat a(2, 2);
  a << 0.5, 0.2, 0.2, -0.3;
  return CauchyModel::unchecked(b, b, a, LinMap::transpose(b), LinMap::transpose(b), "nonhomomorphic_transpose");
}

/// Counterexample model with A + 10i injected (not Hermitian).
inline CauchyModel nonhermitian_fixture() {
  CauchyModel base = counterexample_model();
  Mat a = base.a().data() + 10.0 * kI * Mat::Identity(3, 3);
  return CauchyModel::unchecked(base.b(), base.m(), a, base.e(), base.psi(), "nonhermitian_A");
}

/// Herglotz-style level-1 point (z1, z2) of C^2.
inline MatPoint c2_point(cplx z1, cplx z2) {
  return MatPoint::scalar_level(AlgElement::diagonal(AlgebraSpec::diagonal(2), {z1, z2}));
}

// ---------------------------------------------------------------------------
// Non-polynomial witness

struct WitnessResult {
  double residual = 0.0;   // |y - Phi c| / |y| of the monomial fit
  double condition = 0.0;  // condition number of the monomial design matrix
  int samples = 0;
};

/// Coefficient of t^degree in t -> g(z1/t, z2/t), from samples on a circle |t| = radius.
inline cplx homogeneous_coefficient(const std::function<cplx(cplx, cplx)>& g, cplx z1, cplx z2, int degree,
                                    double radius, int nodes = 64) {
  cplx acc = 0;
  for (int j = 0; j < nodes; ++j) {
    cplx t = std::polar(radius, 2.0 * std::numbers::pi * j / nodes);
    acc += g(z1 / t, z2 / t) * std::pow(t, -degree);
  }
  return acc / static_cast<double>(nodes);
}

inline double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  for (; i > 0; i /= base) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
  }
  return r;
}

/// Relative least-squares residual of the degree-homogeneous part of g against
/// span{z1^-a z2^-b : a + b = degree}. Points are a seed-shifted Halton sequence in
/// Re z in [-2, 2], Im z in [0.5, 2]; each row is scaled by |z|^degree, so the fit is
/// the one on the unit sphere and large-magnitude points do not dominate.
inline WitnessResult homogeneous_fit(const std::function<cplx(cplx, cplx)>& g, int degree, int samples,
                                     std::uint64_t seed) {
  if (degree < 1) throw InvalidArgument("homogeneous_fit: degree must be >= 1");
  if (samples < degree + 1) throw InvalidArgument("homogeneous_fit: too few samples");
  Rng rng(seed);
  double shift[4];
  for (double& s : shift) s = rng.uniform(0.0, 1.0);
  static constexpr std::uint64_t primes[4] = {2, 3, 5, 7};
  Mat phi(samples, degree + 1);
  Vec y(samples);
  for (int s = 0; s < samples; ++s) {
    double u[4];
    for (int k = 0; k < 4; ++k) u[k] = std::fmod(radical_inverse(static_cast<std::uint64_t>(s) + 1, primes[k]) + shift[k], 1.0);
    cplx z1(-2.0 + 4.0 * u[0], 0.5 + 1.5 * u[1]);
    cplx z2(-2.0 + 4.0 * u[2], 0.5 + 1.5 * u[3]);
    // Keep |t^2 / (z2 (z1+z2)/2)| <= 1/4 on the circle.
    double radius = 0.5 * std::sqrt(std::abs(z2) * std::abs(z1 + z2) / 2.0);
    double w = std::pow(std::sqrt(std::norm(z1) + std::norm(z2)), degree);
    y(s) = w * homogeneous_coefficient(g, z1, z2, degree, radius);
    for (int a = 0; a <= degree; ++a) phi(s, a) = w * std::pow(z1, -a) * std::pow(z2, -(degree - a));
  }
  Eigen::JacobiSVD<Mat> svd(phi, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  WitnessResult out;
  out.samples = samples;
  out.condition = sv(0) / sv(sv.size() - 1);
  if (!(out.condition < 1e10)) throw IllConditioned("homogeneous_fit: monomial design matrix", out.condition);
  // A vanishing homogeneous part is the zero polynomial.
  double ny = y.norm();
  if (ny <= 1e-10 * phi.norm()) return out;
  Vec coef = svd.solve(y);
  out.residual = (y - phi * coef).norm() / ny;
  return out;
}

/// Certifies that the degree-homogeneous part of a counterexample component is not a
/// polynomial in z1^-1, z2^-1. component is 1 or 2; values come from the model itself.
inline WitnessResult nonpolynomial_witness(int degree, int samples, std::uint64_t seed, int component = 2) {
  if (component != 1 && component != 2) throw InvalidArgument("nonpolynomial_witness: component must be 1 or 2");
  if (component == 2 && degree < 2) throw InvalidArgument("nonpolynomial_witness: degree must be >= 2");
  if (samples < 4 * degree) throw InvalidArgument("nonpolynomial_witness: samples must be >= 4 degree");
  CauchyModel model = counterexample_model();
  const Eigen::Index idx = component - 1;
  auto g = [&](cplx z1, cplx z2) { return eval_unchecked(model, c2_point(z1, z2)).flat()(idx, idx); };
  return homogeneous_fit(g, degree, samples, seed);
}

}  // namespace ncpick
