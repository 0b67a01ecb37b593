#pragma once

// Linear maps between block algebras, stored as matrices on column-stacked
// coordinates of the enveloping full matrix algebras. Off-block matrix units
// of the domain are sent to zero, so a map is always map∘pinching and its
// Choi matrix over M_{d_dom} certifies complete positivity on the block algebra.

#include <functional>
#include <optional>
#include <sstream>
#include <vector>

#include "ncpick/algebra.hpp"

namespace ncpick {

struct LinMapFlags {
  bool unital = false;
  bool cp_verified = false;
  std::optional<std::vector<AlgElement>> homomorphic_on;
};

class LinMap {
 public:
  LinMap() : LinMap(AlgebraSpec(), AlgebraSpec(), Mat::Identity(1, 1)) {}

  LinMap(AlgebraSpec dom, AlgebraSpec cod, Mat matrix, LinMapFlags flags = {})
      : dom_(std::move(dom)), cod_(std::move(cod)), matrix_(std::move(matrix)), flags_(std::move(flags)) {
    const Eigen::Index dd = dom_.total_dim(), dc = cod_.total_dim();
    if (matrix_.rows() != dc * dc || matrix_.cols() != dd * dd) {
      std::ostringstream os;
      os << "LinMap: matrix must be " << dc * dc << "x" << dd * dd << ", got " << matrix_.rows() << "x" << matrix_.cols();
      throw InvalidArgument(os.str());
    }
    for (Eigen::Index b = 0; b < dd; ++b)
      for (Eigen::Index a = 0; a < dd; ++a)
        if (!dom_.in_block(static_cast<int>(a), static_cast<int>(b))) matrix_.col(b * dd + a).setZero();
  }

  /// Tabulates f on the matrix units of dom.
  static LinMap from_function(const AlgebraSpec& dom, const AlgebraSpec& cod, const std::function<Mat(const Mat&)>& f,
                              LinMapFlags flags = {}) {
    const Eigen::Index dd = dom.total_dim(), dc = cod.total_dim();
    Mat m = Mat::Zero(dc * dc, dd * dd);
    for (Eigen::Index b = 0; b < dd; ++b)
      for (Eigen::Index a = 0; a < dd; ++a) {
        if (!dom.in_block(static_cast<int>(a), static_cast<int>(b))) continue;
        Mat e = Mat::Zero(dd, dd);
        e(a, b) = 1.0;
        Mat img = f(e);
        if (img.rows() != dc || img.cols() != dc) throw InvalidArgument("LinMap::from_function: image has wrong size");
        m.col(b * dd + a) = linalg::vec(img);
      }
    return LinMap(dom, cod, std::move(m), std::move(flags));
  }

  static LinMap identity(const AlgebraSpec& spec) {
    LinMapFlags fl;
    fl.unital = true;
    return from_function(spec, spec, [](const Mat& x) { return x; }, fl);
  }

  static LinMap zero(const AlgebraSpec& dom, const AlgebraSpec& cod) {
    return LinMap(dom, cod, Mat::Zero(cod.total_dim() * cod.total_dim(), dom.total_dim() * dom.total_dim()));
  }

  /// x -> x^T on a single algebra.
  static LinMap transpose(const AlgebraSpec& spec) {
    return from_function(spec, spec, [](const Mat& x) { return Mat(x.transpose()); });
  }

  const AlgebraSpec& dom() const { return dom_; }
  const AlgebraSpec& cod() const { return cod_; }
  const Mat& matrix() const { return matrix_; }
  const LinMapFlags& flags() const { return flags_; }
  LinMap with_flags(LinMapFlags f) const { return LinMap(dom_, cod_, matrix_, std::move(f)); }

  /// Raw image of a d_dom x d_dom matrix (no projection onto cod).
  Mat apply_raw(const Mat& x) const {
    return linalg::unvec(matrix_ * linalg::vec(x), cod_.total_dim(), cod_.total_dim());
  }

  friend LinMap operator*(cplx s, const LinMap& m) { return LinMap(m.dom_, m.cod_, s * m.matrix_); }
  friend LinMap operator+(const LinMap& a, const LinMap& b) {
    require_same_spec(a.dom_, b.dom_, "LinMap +");
    require_same_spec(a.cod_, b.cod_, "LinMap +");
    return LinMap(a.dom_, a.cod_, a.matrix_ + b.matrix_);
  }

 private:
  AlgebraSpec dom_;
  AlgebraSpec cod_;
  Mat matrix_;
  LinMapFlags flags_;
};

/// outer ∘ inner.
inline LinMap compose(const LinMap& outer, const LinMap& inner) {
  require_same_spec(outer.dom(), inner.cod(), "compose");
  return LinMap(inner.dom(), outer.cod(), outer.matrix() * inner.matrix());
}

inline AlgElement apply(const LinMap& map, const AlgElement& x) {
  require_same_spec(map.dom(), x.spec(), "apply");
  return AlgElement::project(map.cod(), map.apply_raw(x.data()));
}

/// (map (x) id_n)(X): map applied to every grid entry.
inline MatPoint apply_amplified(const LinMap& map, const MatPoint& x) {
  require_same_spec(map.dom(), x.spec(), "apply_amplified");
  std::vector<AlgElement> grid;
  grid.reserve(x.grid().size());
  for (const auto& e : x.grid()) grid.push_back(apply(map, e));
  return MatPoint(map.cod(), x.level(), std::move(grid));
}

struct ChoiMatrix {
  Mat data;
  double min_eigenvalue = 0.0;
  double hermitian_defect = 0.0;
};

/// sum_ab e_ab (x) map(e_ab) over the matrix units of M_{d_dom}.
inline ChoiMatrix choi(const LinMap& map) {
  const Eigen::Index dd = map.dom().total_dim(), dc = map.cod().total_dim();
  Mat c = Mat::Zero(dd * dc, dd * dc);
  for (Eigen::Index a = 0; a < dd; ++a)
    for (Eigen::Index b = 0; b < dd; ++b)
      c.block(a * dc, b * dc, dc, dc) = linalg::unvec(map.matrix().col(b * dd + a), dc, dc);
  ChoiMatrix out;
  out.hermitian_defect = linalg::hermitian_defect(c);
  out.data = linalg::hermitian_part(c);
  out.min_eigenvalue = linalg::min_hermitian_eigenvalue(out.data);
  return out;
}

inline bool is_completely_positive(const LinMap& map, double tol = kTolPsd) {
  ChoiMatrix c = choi(map);
  if (c.hermitian_defect > 1e-10 * (1.0 + c.data.norm())) return false;
  return c.min_eigenvalue >= -tol;
}

/// Kraus operators from the Choi eigendecomposition; map(x) = sum K x K*.
inline std::vector<Mat> kraus_operators(const LinMap& map, double tol = kTolPsd) {
  const Eigen::Index dd = map.dom().total_dim(), dc = map.cod().total_dim();
  ChoiMatrix c = choi(map);
  Eigen::SelfAdjointEigenSolver<Mat> es(c.data);
  std::vector<Mat> out;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    double lam = es.eigenvalues()(k);
    if (lam <= tol) continue;
    Vec v = std::sqrt(lam) * es.eigenvectors().col(k);
    Mat kr(dc, dd);
    for (Eigen::Index a = 0; a < dd; ++a)
      for (Eigen::Index r = 0; r < dc; ++r) kr(r, a) = v(a * dc + r);
    out.push_back(std::move(kr));
  }
  return out;
}

inline bool is_unital(const LinMap& map, double tol = 1e-10) {
  Mat one = map.apply_raw(map.dom().identity());
  return (one - map.cod().identity()).norm() <= tol;
}

/// Orthonormal-ish basis of the span of words (length <= depth) in the generators,
/// starting from the unit. Words dependent on earlier ones are dropped.
inline std::vector<Mat> word_basis(const AlgebraSpec& spec, const std::vector<AlgElement>& generators, int depth) {
  std::vector<Mat> kept;
  std::vector<Vec> ortho;
  auto try_keep = [&](const Mat& w) {
    Vec v = linalg::vec(w);
    double n0 = v.norm();
    if (n0 == 0.0) return false;
    for (const auto& q : ortho) v -= q.dot(v) * q;
    if (v.norm() <= 1e-9 * n0) return false;
    ortho.push_back(v / v.norm());
    kept.push_back(w);
    return true;
  };
  try_keep(spec.identity());
  std::vector<Mat> frontier{spec.identity()};
  for (int level = 1; level <= depth && !frontier.empty(); ++level) {
    std::vector<Mat> next;
    for (const auto& g : generators) {
      require_same_spec(spec, g.spec(), "word_basis");
      for (const auto& w : frontier) {
        Mat p = g.data() * w;
        if (try_keep(p)) next.push_back(p);
      }
    }
    frontier = std::move(next);
  }
  return kept;
}

struct HomomorphismReport {
  bool passed = true;
  double max_product_residual = 0.0;  // relative to 1 + |w1||w2|
  double max_adjoint_residual = 0.0;
  std::size_t basis_size = 0;
};

inline HomomorphismReport homomorphism_report(const LinMap& map, const std::vector<AlgElement>& generators, int depth,
                                              double tol) {
  HomomorphismReport r;
  std::vector<Mat> words = word_basis(map.dom(), generators, depth);
  r.basis_size = words.size();
  std::vector<Mat> images;
  images.reserve(words.size());
  for (const auto& w : words) images.push_back(map.apply_raw(w));
  for (size_t i = 0; i < words.size(); ++i) {
    double ni = linalg::op_norm(words[i]);
    double adj = (map.apply_raw(words[i].adjoint()) - images[i].adjoint()).norm() / (1.0 + ni);
    r.max_adjoint_residual = std::max(r.max_adjoint_residual, adj);
    for (size_t j = 0; j < words.size(); ++j) {
      double nj = linalg::op_norm(words[j]);
      double res = (map.apply_raw(words[i] * words[j]) - images[i] * images[j]).norm() / (1.0 + ni * nj);
      r.max_product_residual = std::max(r.max_product_residual, res);
    }
  }
  r.passed = r.max_product_residual <= tol && r.max_adjoint_residual <= tol;
  return r;
}

inline bool is_homomorphic_on(const LinMap& map, const std::vector<AlgElement>& generators, int depth = 4,
                              double tol = 1e-10) {
  return homomorphism_report(map, generators, depth, tol).passed;
}

/// psi applied to the matrix-unit basis of its domain, deduplicated to a linearly independent set.
inline std::vector<AlgElement> range_basis(const LinMap& psi) {
  std::vector<AlgElement> out;
  std::vector<Vec> ortho;
  for (const auto& b : psi.dom().basis()) {
    Mat img = psi.apply_raw(b);
    Vec v = linalg::vec(img);
    double n0 = v.norm();
    if (n0 == 0.0) continue;
    for (const auto& q : ortho) v -= q.dot(v) * q;
    if (v.norm() <= 1e-9 * n0) continue;
    ortho.push_back(v / v.norm());
    out.push_back(AlgElement::project(psi.cod(), img));
  }
  return out;
}

/// E∘psi = id on a basis of B.
inline bool check_dilation_pair(const LinMap& e, const LinMap& psi, double tol = 1e-10) {
  require_same_spec(psi.cod(), e.dom(), "check_dilation_pair");
  require_same_spec(psi.dom(), e.cod(), "check_dilation_pair");
  for (const auto& b : psi.dom().basis()) {
    Mat back = e.apply_raw(psi.apply_raw(b));
    if ((back - b).norm() > tol * (1.0 + linalg::op_norm(b))) return false;
  }
  return true;
}

struct TomiyamaWitness {
  Mat b1, m, b2;
};

struct TomiyamaReport {
  bool passed = true;
  int samples = 0;
  double max_residual = 0.0;             // |E(b1 m b2) - E(b1)E(m)E(b2)| with unit-norm inputs
  double max_projection_residual = 0.0;  // |E(exe) - E(e)E(exe)E(e)|, e a projection in B^, x >= 0
  int projections_checked = 0;
  std::optional<TomiyamaWitness> witness;
};

namespace detail {

inline Mat random_combination(const std::vector<Mat>& words, Rng& rng) {
  Mat out = Mat::Zero(words.front().rows(), words.front().cols());
  for (const auto& w : words) out += rng.complex_normal() * w;
  return out;
}

/// Spectral projections of a Hermitian element, eigenvalues clustered with gap 1e-6.
inline std::vector<Mat> spectral_projections(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(linalg::hermitian_part(h));
  const auto& ev = es.eigenvalues();
  std::vector<Mat> out;
  Eigen::Index start = 0;
  for (Eigen::Index k = 1; k <= ev.size(); ++k) {
    if (k == ev.size() || ev(k) - ev(k - 1) > 1e-6) {
      Mat vecs = es.eigenvectors().middleCols(start, k - start);
      out.push_back(vecs * vecs.adjoint());
      start = k;
    }
  }
  return out;
}

}  // namespace detail

/// Numerical homomorphic Tomiyama property: E(b1 m b2) = E(b1) E(m) E(b2) for
/// b1, b2 in the algebra generated by bhat_generators and m anywhere in M.
inline TomiyamaReport tomiyama_check(const LinMap& e, const std::vector<AlgElement>& bhat_generators, int m_samples,
                                     double tol, std::uint64_t seed, int depth = 4) {
  if (!is_homomorphic_on(e, bhat_generators, 2, tol))
    throw InvalidArgument("tomiyama_check: map is not homomorphic on the generated subalgebra");
  const AlgebraSpec& mspec = e.dom();
  std::vector<Mat> words = word_basis(mspec, bhat_generators, depth);
  Rng rng(seed);
  TomiyamaReport r;
  r.samples = m_samples;
  auto unit_norm = [](Mat x) {
    double n = linalg::op_norm(x);
    return n > 0 ? Mat(x / n) : x;
  };
  for (int s = 0; s < m_samples; ++s) {
    Mat b1 = unit_norm(detail::random_combination(words, rng));
    Mat b2 = unit_norm(detail::random_combination(words, rng));
    Mat m = unit_norm(mspec.project(rng.ginibre(mspec.total_dim(), mspec.total_dim())));
    Mat lhs = e.apply_raw(b1 * m * b2);
    Mat rhs = e.apply_raw(b1) * e.apply_raw(m) * e.apply_raw(b2);
    double res = (lhs - rhs).norm();
    if (res > r.max_residual) {
      r.max_residual = res;
      if (res > tol) r.witness = TomiyamaWitness{b1, m, b2};
    }
  }
  // Projection step: spectral projections of a random Hermitian element of B^.
  for (int trial = 0; trial < 4; ++trial) {
    Mat h = Mat::Zero(mspec.total_dim(), mspec.total_dim());
    for (const auto& w : words) h += rng.normal() * (w + w.adjoint());
    for (const auto& proj : detail::spectral_projections(h)) {
      Mat g = mspec.project(rng.ginibre(mspec.total_dim(), mspec.total_dim()));
      Mat x = unit_norm(g * g.adjoint());
      Mat exe = e.apply_raw(proj * x * proj);
      Mat ee = e.apply_raw(proj);
      r.max_projection_residual = std::max(r.max_projection_residual, (exe - ee * exe * ee).norm());
      ++r.projections_checked;
    }
  }
  r.passed = r.max_residual <= tol && r.max_projection_residual <= tol;
  return r;
}

}  // namespace ncpick
