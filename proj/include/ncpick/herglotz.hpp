#pragma once

// Ball / half-plane pictures and the constructive Nevanlinna extraction.
//
// Herglotz data (T, L, V) with L unitary on C^{d'} describes
//
//   h(X) = V* (L - X)^-1 (L + X) V,      f(Z) = T + i h(cayley(Z)),
//
// where points over the input algebra B1 (size d) act on C^{d'} through the
// unital embedding b -> I_m (x) b, d' = m d. Extraction splits C^{d'} into
// ker(1 - L) and its complement (projection P, compressed unitary L0) and
// rewrites f as
//
//   f(Z) = C + W* (A - P Z P*)^-1 W,
//   A = i (1 + L0)(1 - L0)^-1,  W = 2 (1 - L0*)^-1 P V,  C = T - V* P* A P V,
//
// valid whenever range(V) is orthogonal to ker(1 - L).

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ncpick/algebra.hpp"

namespace ncpick {

/// Cayley transform (Z + i)^-1 (Z - i); Z must lie in the open upper half plane.
inline MatPoint cayley(const MatPoint& z) {
  RegionReport r = classify_region(z);
  if (!r.in_open_uhp) throw InvalidArgument("cayley: Im Z must be strictly positive");
  const Eigen::Index n = z.flat_dim();
  Mat id = Mat::Identity(n, n);
  Mat inv = linalg::guarded_inverse(z.flat() + kI * id, "cayley: Z + i");
  return MatPoint::from_flat(z.spec(), inv * (z.flat() - kI * id));
}

/// i (1 + L)(1 - L)^-1; the two-sided inverse of cayley on the open ball.
inline MatPoint inverse_cayley(const MatPoint& lam) {
  if (!(lam.norm() < 1.0)) throw InvalidArgument("inverse_cayley: |Lambda| must be < 1");
  const Eigen::Index n = lam.flat_dim();
  Mat id = Mat::Identity(n, n);
  Mat inv = linalg::guarded_inverse(id - lam.flat(), "inverse_cayley: 1 - Lambda");
  return MatPoint::from_flat(lam.spec(), kI * (id + lam.flat()) * inv);
}

/// Flat form of (iota (x) id_n)(X) for iota(b) = I_m (x) b.
inline Mat embed_flat(const MatPoint& x, int multiplicity) {
  const int d = x.spec().total_dim();
  const int n = x.level();
  const Eigen::Index dp = static_cast<Eigen::Index>(multiplicity) * d;
  Mat out = Mat::Zero(n * dp, n * dp);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.block(i * dp, j * dp, dp, dp) = linalg::amplify(x.at(i, j).data(), multiplicity);
  return out;
}

class HerglotzData {
 public:
  HerglotzData() = default;

  /// T: r x r Hermitian in `output`; L: d' x d' unitary; V: d' x r; d' a multiple of input.total_dim().
  HerglotzData(AlgebraSpec input, AlgebraSpec output, const Mat& t, Mat l, Mat v)
      : input_(std::move(input)), output_(std::move(output)), l_(std::move(l)), v_(std::move(v)) {
    const Eigen::Index dp = l_.rows();
    if (l_.cols() != dp || dp == 0) throw InvalidArgument("HerglotzData: L must be square and non-empty");
    if (dp % input_.total_dim() != 0) throw InvalidArgument("HerglotzData: size of L is not a multiple of the input algebra");
    if (v_.rows() != dp) throw InvalidArgument("HerglotzData: V must have as many rows as L");
    if (v_.cols() != output_.total_dim()) throw InvalidArgument("HerglotzData: V columns must match the output algebra");
    if ((l_.adjoint() * l_ - Mat::Identity(dp, dp)).norm() > 1e-10) throw InvalidArgument("HerglotzData: L is not unitary");
    t_ = AlgElement::project(output_, linalg::enforce_hermitian(t, "HerglotzData: T"));
    // V* x V must land in the output algebra for every matrix unit x of M_{d'}.
    for (Eigen::Index a = 0; a < dp; ++a)
      for (Eigen::Index b = 0; b < dp; ++b) {
        Mat img = v_.row(a).adjoint() * v_.row(b);
        if (output_.off_block_norm(img) > 1e-10 * (1.0 + img.norm()))
          throw InvalidArgument("HerglotzData: V* x V leaves the output algebra");
      }
  }

  const AlgebraSpec& input() const { return input_; }
  const AlgebraSpec& output() const { return output_; }
  const AlgElement& t() const { return t_; }
  const Mat& l() const { return l_; }
  const Mat& v() const { return v_; }
  int dim() const { return static_cast<int>(l_.rows()); }
  int multiplicity() const { return dim() / input_.total_dim(); }

 private:
  AlgebraSpec input_;
  AlgebraSpec output_;
  AlgElement t_;
  Mat l_;
  Mat v_;
};

/// h(X) = V* (L (x) I - X)^-1 (L (x) I + X) V for a strict contraction X over the input algebra.
inline MatPoint herglotz_eval(const HerglotzData& data, const MatPoint& x) {
  require_same_spec(data.input(), x.spec(), "herglotz_eval");
  if (!(x.norm() < 1.0)) throw InvalidArgument("herglotz_eval: |X| must be < 1");
  const int n = x.level();
  Mat xe = embed_flat(x, data.multiplicity());
  Mat lb = linalg::amplify(data.l(), n);
  Mat vb = linalg::amplify(data.v(), n);
  Mat res = linalg::guarded_inverse(lb - xe, "herglotz_eval: L - X");
  return MatPoint::from_flat(data.output(), vb.adjoint() * res * (lb + xe) * vb, 1e-9);
}

/// T (x) I + i h(cayley(Z)): the half-plane function described by the data.
inline MatPoint herglotz_function(const HerglotzData& data, const MatPoint& z) {
  MatPoint h = herglotz_eval(data, cayley(z));
  Mat out = linalg::amplify(data.t().data(), z.level()) + kI * h.flat();
  return MatPoint::from_flat(data.output(), out);
}

struct KernelSplit {
  Mat complement;                // d' x c, orthonormal basis of ker(1 - L)^perp
  Mat kernel;                    // d' x k, orthonormal basis of ker(1 - L)
  Mat projector;                 // complement complement*
  Mat l0;                        // complement* L complement
  int kernel_dim = 0;
  std::vector<cplx> eigenvalues;  // spectrum of L on the unit circle
};

/// Eigenvectors of L with |lambda - 1| <= tol_ker span the kernel; the rest is compressed.
inline KernelSplit kernel_split(const Mat& l, double tol_ker = 1e-8) {
  const Eigen::Index dp = l.rows();
  if (l.cols() != dp) throw InvalidArgument("kernel_split: L must be square");
  if ((l.adjoint() * l - Mat::Identity(dp, dp)).norm() > 1e-10) throw InvalidArgument("kernel_split: L is not unitary");
  KernelSplit ks;
  Eigen::ComplexSchur<Mat> schur(l);
  const Mat& tri = schur.matrixT();
  const Mat& u = schur.matrixU();
  std::vector<Eigen::Index> in_kernel, outside;
  for (Eigen::Index k = 0; k < dp; ++k) {
    ks.eigenvalues.push_back(tri(k, k));
    (std::abs(tri(k, k) - 1.0) <= tol_ker ? in_kernel : outside).push_back(k);
  }
  ks.kernel_dim = static_cast<int>(in_kernel.size());
  ks.kernel = Mat(dp, static_cast<Eigen::Index>(in_kernel.size()));
  ks.complement = Mat(dp, static_cast<Eigen::Index>(outside.size()));
  for (size_t k = 0; k < in_kernel.size(); ++k) ks.kernel.col(static_cast<Eigen::Index>(k)) = u.col(in_kernel[k]);
  for (size_t k = 0; k < outside.size(); ++k) ks.complement.col(static_cast<Eigen::Index>(k)) = u.col(outside[k]);
  ks.projector = ks.complement * ks.complement.adjoint();
  ks.l0 = ks.complement.adjoint() * l * ks.complement;
  return ks;
}

/// Size of the component of V inside ker(1 - L).
inline double range_overlap(const Mat& v, const KernelSplit& split) {
  return (v - split.projector * v).norm();
}

/// range(V) is orthogonal to ker(1 - L) up to tol (1 + |V|).
inline bool check_range_perp(const Mat& v, const KernelSplit& split, double tol = 1e-8) {
  return range_overlap(v, split) <= tol * (1.0 + linalg::op_norm(v));
}

struct NevanlinnaData {
  AlgebraSpec input;
  AlgebraSpec output;
  int multiplicity = 1;
  Mat a;  // c x c Hermitian
  Mat p;  // c x d', coisometry; psi(Z) = P Z P*
  Mat w;  // c x r
  AlgElement c;
  bool is_cauchy = false;
};

struct ExtractOptions {
  double tol_ker = 1e-8;
  double tol_perp = 1e-8;
  double tol_cauchy = 1e-9;
};

inline NevanlinnaData extract(const HerglotzData& data, const ExtractOptions& opt = {}) {
  KernelSplit split = kernel_split(data.l(), opt.tol_ker);
  double overlap = range_overlap(data.v(), split);
  if (overlap > opt.tol_perp * (1.0 + linalg::op_norm(data.v())))
    throw RangeNotPerpendicular("extract: range(V) meets ker(1 - L); liminf condition violated (overlap " +
                                    std::to_string(overlap) + ")",
                                overlap);
  const Eigen::Index c = split.complement.cols();
  Mat id = Mat::Identity(c, c);
  if (c > 0) {
    Eigen::ComplexEigenSolver<Mat> es(split.l0, false);
    for (Eigen::Index k = 0; k < c; ++k)
      if (std::abs(es.eigenvalues()(k) - 1.0) <= opt.tol_ker)
        throw SingularCompression("extract: compressed unitary still has eigenvalue 1");
  }
  NevanlinnaData nd;
  nd.input = data.input();
  nd.output = data.output();
  nd.multiplicity = data.multiplicity();
  nd.p = split.complement.adjoint();
  Mat vc = nd.p * data.v();
  if (c > 0) {
    Mat a = kI * (id + split.l0) * linalg::guarded_inverse(id - split.l0, "extract: 1 - L0");
    if (linalg::hermitian_defect(a) > 1e-9 * (1.0 + linalg::op_norm(a)))
      throw SingularCompression("extract: A = i(1 + L0)(1 - L0)^-1 is not Hermitian");
    nd.a = linalg::hermitian_part(a);
    nd.w = 2.0 * linalg::guarded_inverse(id - split.l0.adjoint(), "extract: 1 - L0*") * vc;
  } else {
    nd.a = Mat(0, 0);
    nd.w = Mat(0, data.v().cols());
  }
  Mat cmat = data.t().data() - vc.adjoint() * nd.a * vc;
  nd.c = AlgElement::project(nd.output, linalg::hermitian_part(cmat), 1e-9);
  nd.is_cauchy = nd.c.norm() <= opt.tol_cauchy;
  return nd;
}

/// C (x) I + W* (A (x) I - (P Z P*))^-1 W for Z in the open upper half plane.
inline MatPoint nev_eval(const NevanlinnaData& nd, const MatPoint& z) {
  require_same_spec(nd.input, z.spec(), "nev_eval");
  if (!classify_region(z).in_open_uhp) throw InvalidArgument("nev_eval: Im Z must be strictly positive");
  const int n = z.level();
  Mat out = linalg::amplify(nd.c.data(), n);
  if (nd.a.rows() > 0) {
    Mat pb = linalg::amplify(nd.p, n);
    Mat zpsi = pb * embed_flat(z, nd.multiplicity) * pb.adjoint();
    Mat res = linalg::guarded_inverse(linalg::amplify(nd.a, n) - zpsi, "nev_eval: A - P Z P*");
    Mat wb = linalg::amplify(nd.w, n);
    out += wb.adjoint() * res * wb;
  }
  return MatPoint::from_flat(nd.output, out, 1e-9);
}

/// Inverse construction with trivial kernel: Herglotz data whose extraction
/// returns (A, W, C) up to unitary equivalence. A is d' x d' with d' a multiple of input size.
inline HerglotzData to_herglotz(const AlgebraSpec& input, const AlgebraSpec& output, const Mat& a, const Mat& w,
                                const Mat& c) {
  Mat ah = linalg::enforce_hermitian(a, "to_herglotz: A");
  const Eigen::Index dp = ah.rows();
  Mat id = Mat::Identity(dp, dp);
  // Cayley image of A: eigenvalues (t - i)/(t + i), never equal to 1.
  Mat l0 = (ah - kI * id) * linalg::guarded_inverse(ah + kI * id, "to_herglotz: A + i");
  Mat v = (id - l0.adjoint()) * w / 2.0;
  Mat t = c + v.adjoint() * ah * v;
  return HerglotzData(input, output, linalg::hermitian_part(t), l0, v);
}

/// Herglotz data of the scalar Cauchy transform sum w_i / (t_i - z).
inline HerglotzData herglotz_from_classical(const std::vector<double>& atoms, const std::vector<double>& weights) {
  if (atoms.empty() || atoms.size() != weights.size()) throw InvalidArgument("herglotz_from_classical: bad measure");
  const auto k = static_cast<Eigen::Index>(atoms.size());
  Mat a = Mat::Zero(k, k);
  Mat w(k, 1);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(weights[static_cast<size_t>(i)] > 0)) throw InvalidArgument("herglotz_from_classical: weights must be positive");
    a(i, i) = atoms[static_cast<size_t>(i)];
    w(i, 0) = std::sqrt(weights[static_cast<size_t>(i)]);
  }
  AlgebraSpec scalar = AlgebraSpec::diagonal(1);
  return to_herglotz(scalar, scalar, a, w, Mat::Zero(1, 1));
}

/// Random Herglotz data with range(V) orthogonal to a non-trivial ker(1 - L).
/// With overlap > 0 a kernel component of that size is added to V.
inline HerglotzData random_herglotz_data(std::uint64_t seed, int max_dim = 8, double overlap = 0.0) {
  Rng rng(seed);
  const int d = rng.uniform_int(1, 2);
  AlgebraSpec input = d == 1 ? AlgebraSpec::diagonal(1) : (rng.uniform_int(0, 1) ? AlgebraSpec::full(2) : AlgebraSpec::diagonal(2));
  const int m = rng.uniform_int(1, max_dim / d);
  const int dp = m * d;
  const int r = rng.uniform_int(1, 3);
  AlgebraSpec output = AlgebraSpec::full(r);
  int kdim = dp > 1 ? rng.uniform_int(1, std::min(2, dp - 1)) : 0;
  if (overlap > 0.0 && kdim == 0) kdim = 1;
  Mat u = rng.unitary(dp);
  Vec lam(dp);
  for (int k = 0; k < dp; ++k)
    lam(k) = k < kdim ? cplx(1.0) : std::polar(1.0, rng.uniform(0.2, 2.0 * std::numbers::pi - 0.2));
  Mat l = u * lam.asDiagonal() * u.adjoint();
  Mat comp = u.rightCols(dp - kdim);
  Mat v = comp * rng.ginibre(dp - kdim, r);
  if (overlap > 0.0) v += overlap * u.leftCols(kdim) * rng.ginibre(kdim, r);
  Mat t = rng.hermitian(r);
  return HerglotzData(input, output, t, l, v);
}

/// Strict contraction over the input algebra, |X| = radius * u with u uniform in (0, 1).
inline MatPoint sample_contraction(const AlgebraSpec& spec, int n, double radius, std::uint64_t seed) {
  Rng rng(seed);
  MatPoint g = random_point(spec, n, rng);
  double target = radius * rng.uniform(0.05, 1.0);
  return cplx(target / std::max(g.norm(), 1e-300)) * g;
}

}  // namespace ncpick
