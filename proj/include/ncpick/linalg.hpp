#pragma once

// Dense complex linear algebra shared by all modules.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "ncpick/errors.hpp"

namespace ncpick {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealVec = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

/// Eigenvalue threshold for positivity tests on symmetrized matrices.
inline constexpr double kTolPsd = 1e-9;
/// Relative smallest-singular-value guard applied before every inverse.
inline constexpr double kSingularGuard = 1e-12;
/// Relative Hermiticity defect accepted (and then symmetrized away).
inline constexpr double kHermitianAccept = 1e-8;

namespace linalg {

inline Mat hermitian_part(const Mat& x) { return (x + x.adjoint()) / 2.0; }

/// (X - X*) / (2i), symmetrized.
inline Mat imag_part(const Mat& x) {
  Mat im = (x - x.adjoint()) / (2.0 * kI);
  return hermitian_part(im);
}

inline double op_norm(const Mat& x) {
  if (x.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(x);
  return svd.singularValues()(0);
}

inline double min_singular(const Mat& x) {
  if (x.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(x);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

/// Eigenvalues (ascending) of the Hermitian part of x.
inline RealVec hermitian_eigenvalues(const Mat& x) {
  if (x.rows() == 0) return RealVec();
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(x), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline double min_hermitian_eigenvalue(const Mat& x) {
  if (x.rows() == 0) return 0.0;
  return hermitian_eigenvalues(x)(0);
}

inline double hermitian_defect(const Mat& x) { return (x - x.adjoint()).norm(); }

/// Symmetrizes h if it is Hermitian up to 1e-8 (1 + |h|); throws otherwise.
inline Mat enforce_hermitian(const Mat& h, const std::string& what) {
  if (h.rows() != h.cols()) throw InvalidArgument(what + ": matrix is not square");
  double defect = hermitian_defect(h);
  if (defect > kHermitianAccept * (1.0 + op_norm(h))) {
    std::ostringstream os;
    os << what << ": not Hermitian (|H - H*| = " << defect << ")";
    throw InvalidArgument(os.str());
  }
  return hermitian_part(h);
}

/// Inverse guarded by sigma_min >= 1e-12 |x|.
inline Mat guarded_inverse(const Mat& x, const std::string& what) {
  if (x.rows() != x.cols()) throw InvalidArgument(what + ": matrix is not square");
  if (x.rows() == 0) return Mat(0, 0);
  Eigen::JacobiSVD<Mat> svd(x);
  const auto& sv = svd.singularValues();
  double smax = sv(0);
  double smin = sv(sv.size() - 1);
  if (!(smin >= kSingularGuard * smax) || smax == 0.0) {
    std::ostringstream os;
    os << what << ": numerically singular (sigma_min = " << smin << ", |x| = " << smax << ")";
    throw SingularResolvent(os.str(), smin, smax);
  }
  return x.partialPivLu().inverse();
}

/// Kronecker product a (x) b.
inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// I_n (x) b: n copies of b on the block diagonal.
inline Mat amplify(const Mat& b, Eigen::Index n) {
  Mat out = Mat::Zero(n * b.rows(), n * b.cols());
  for (Eigen::Index k = 0; k < n; ++k) out.block(k * b.rows(), k * b.cols(), b.rows(), b.cols()) = b;
  return out;
}

/// Column-stacked vectorization.
inline Vec vec(const Mat& x) { return Eigen::Map<const Vec>(x.data(), x.size()); }

inline Mat unvec(const Vec& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

inline Mat direct_sum(const Mat& a, const Mat& b) {
  Mat out = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace linalg

/// Deterministic generator plumbing. Every random routine takes an explicit seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  cplx complex_normal() { return cplx(normal(), normal()) / std::sqrt(2.0); }

  Mat ginibre(Eigen::Index rows, Eigen::Index cols) {
    Mat m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = complex_normal();
    return m;
  }

  Mat hermitian(Eigen::Index n) { return linalg::hermitian_part(ginibre(n, n)); }

  /// Haar-like unitary from QR of a Ginibre matrix with phase fix.
  Mat unitary(Eigen::Index n) {
    Mat g = ginibre(n, n);
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ() * Mat::Identity(n, n);
    Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index k = 0; k < n; ++k) {
      cplx d = r(k, k);
      if (std::abs(d) > 0) q.col(k) *= d / std::abs(d);
    }
    return q;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Per-trial seed derived from (seed, index) with a splitmix64 step.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace ncpick
