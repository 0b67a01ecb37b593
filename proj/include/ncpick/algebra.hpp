#pragma once

// Finite-dimensional C*-algebras realised as block-diagonal matrix algebras
// B = M_{b_1} + ... + M_{b_k} inside M_d, and level-n points over them.
//
// Flat layout of a level-n point: an n x n grid of d x d blocks, grid index
// outer, algebra index inner. Amplification b (x) I_n is therefore
// I_n (x) b in Kronecker terms, i.e. b repeated on the grid diagonal.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <utility>
#include <vector>

#include "ncpick/linalg.hpp"

namespace ncpick {

class AlgebraSpec {
 public:
  AlgebraSpec() : AlgebraSpec(std::vector<int>{1}) {}

  explicit AlgebraSpec(std::vector<int> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw InvalidArgument("AlgebraSpec: blocks must be non-empty");
    offsets_.reserve(blocks_.size());
    int off = 0;
    for (int b : blocks_) {
      if (b < 1) throw InvalidArgument("AlgebraSpec: block dimensions must be >= 1");
      offsets_.push_back(off);
      off += b;
    }
    total_ = off;
  }

  /// C^m: m one-dimensional blocks.
  static AlgebraSpec diagonal(int m) { return AlgebraSpec(std::vector<int>(static_cast<size_t>(m), 1)); }
  /// M_d: a single full block.
  static AlgebraSpec full(int d) { return AlgebraSpec(std::vector<int>{d}); }

  const std::vector<int>& blocks() const { return blocks_; }
  int total_dim() const { return total_; }
  int block_offset(size_t k) const { return offsets_.at(k); }
  bool is_commutative() const {
    return std::all_of(blocks_.begin(), blocks_.end(), [](int b) { return b == 1; });
  }
  /// Linear dimension of the algebra, sum of b_k^2.
  int algebra_dim() const {
    return std::accumulate(blocks_.begin(), blocks_.end(), 0, [](int s, int b) { return s + b * b; });
  }

  /// Block index of flat coordinate a, or -1 if out of range.
  int block_of(int a) const {
    for (size_t k = 0; k < blocks_.size(); ++k)
      if (a >= offsets_[k] && a < offsets_[k] + blocks_[k]) return static_cast<int>(k);
    return -1;
  }
  bool in_block(int a, int b) const { return block_of(a) == block_of(b); }

  /// Orthogonal projection of a d x d matrix onto the block-diagonal subspace.
  Mat project(const Mat& m) const {
    check_square(m);
    Mat out = Mat::Zero(total_, total_);
    for (size_t k = 0; k < blocks_.size(); ++k)
      out.block(offsets_[k], offsets_[k], blocks_[k], blocks_[k]) =
          m.block(offsets_[k], offsets_[k], blocks_[k], blocks_[k]);
    return out;
  }

  /// Frobenius norm of the off-block part.
  double off_block_norm(const Mat& m) const {
    check_square(m);
    return (m - project(m)).norm();
  }

  Mat identity() const { return Mat::Identity(total_, total_); }

  /// Matrix units e_{ab} lying inside the blocks; a linear basis of the algebra.
  std::vector<Mat> basis() const {
    std::vector<Mat> out;
    for (size_t k = 0; k < blocks_.size(); ++k)
      for (int j = 0; j < blocks_[k]; ++j)
        for (int i = 0; i < blocks_[k]; ++i) {
          Mat e = Mat::Zero(total_, total_);
          e(offsets_[k] + i, offsets_[k] + j) = 1.0;
          out.push_back(std::move(e));
        }
    return out;
  }

  friend bool operator==(const AlgebraSpec& a, const AlgebraSpec& b) { return a.blocks_ == b.blocks_; }
  friend bool operator!=(const AlgebraSpec& a, const AlgebraSpec& b) { return !(a == b); }

  std::string to_string() const {
    std::ostringstream os;
    os << "[";
    for (size_t k = 0; k < blocks_.size(); ++k) os << (k ? "," : "") << blocks_[k];
    os << "]";
    return os.str();
  }

 private:
  void check_square(const Mat& m) const {
    if (m.rows() != total_ || m.cols() != total_) {
      std::ostringstream os;
      os << "AlgebraSpec" << to_string() << ": expected " << total_ << "x" << total_ << " matrix, got "
         << m.rows() << "x" << m.cols();
      throw InvalidArgument(os.str());
    }
  }

  std::vector<int> blocks_;
  std::vector<int> offsets_;
  int total_ = 0;
};

inline void require_same_spec(const AlgebraSpec& a, const AlgebraSpec& b, const char* what) {
  if (a != b) throw SpecMismatch(std::string(what) + ": algebra " + a.to_string() + " vs " + b.to_string());
}

/// An element of a block algebra. Off-block entries are exactly zero.
class AlgElement {
 public:
  AlgElement() : spec_(), data_(Mat::Zero(1, 1)) {}

  /// Strict: every off-block entry of data must already be zero.
  AlgElement(AlgebraSpec spec, Mat data) : spec_(std::move(spec)), data_(std::move(data)) {
    if (spec_.off_block_norm(data_) != 0.0) throw InvalidArgument("AlgElement: off-block entries are not zero");
  }

  /// Checks |off-block| <= tol (1 + |m|), then projects.
  static AlgElement project(const AlgebraSpec& spec, const Mat& m, double tol = 1e-10) {
    double off = spec.off_block_norm(m);
    if (off > tol * (1.0 + m.norm())) {
      std::ostringstream os;
      os << "AlgElement: matrix leaves algebra " << spec.to_string() << " (off-block norm " << off << ")";
      throw InvalidArgument(os.str());
    }
    return AlgElement(spec, spec.project(m));
  }

  static AlgElement zero(const AlgebraSpec& spec) { return AlgElement(spec, Mat::Zero(spec.total_dim(), spec.total_dim())); }
  static AlgElement unit(const AlgebraSpec& spec) { return AlgElement(spec, spec.identity()); }

  /// Diagonal element of C^m (or the diagonal of any spec) from its coordinates.
  static AlgElement diagonal(const AlgebraSpec& spec, const std::vector<cplx>& coords) {
    if (static_cast<int>(coords.size()) != spec.total_dim()) throw InvalidArgument("AlgElement::diagonal: size mismatch");
    Mat m = Mat::Zero(spec.total_dim(), spec.total_dim());
    for (size_t k = 0; k < coords.size(); ++k) m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = coords[k];
    return AlgElement(spec, m);
  }

  const AlgebraSpec& spec() const { return spec_; }
  const Mat& data() const { return data_; }
  int dim() const { return spec_.total_dim(); }

  AlgElement adjoint() const { return AlgElement(spec_, data_.adjoint()); }
  double norm() const { return linalg::op_norm(data_); }
  bool is_hermitian(double tol = 1e-12) const { return linalg::hermitian_defect(data_) <= tol * (1.0 + norm()); }

  friend AlgElement operator+(const AlgElement& a, const AlgElement& b) {
    require_same_spec(a.spec_, b.spec_, "AlgElement +");
    return AlgElement(a.spec_, a.data_ + b.data_);
  }
  friend AlgElement operator-(const AlgElement& a, const AlgElement& b) {
    require_same_spec(a.spec_, b.spec_, "AlgElement -");
    return AlgElement(a.spec_, a.data_ - b.data_);
  }
  friend AlgElement operator*(const AlgElement& a, const AlgElement& b) {
    require_same_spec(a.spec_, b.spec_, "AlgElement *");
    return AlgElement(a.spec_, a.data_ * b.data_);
  }
  friend AlgElement operator*(cplx s, const AlgElement& a) { return AlgElement(a.spec_, s * a.data_); }

 private:
  AlgebraSpec spec_;
  Mat data_;
};

/// A level-n matrix over a block algebra: canonical n x n grid plus cached flat form.
class MatPoint {
 public:
  MatPoint() : MatPoint(AlgebraSpec(), 1, {AlgElement()}) {}

  /// grid is row-major, n*n entries, all over spec.
  MatPoint(AlgebraSpec spec, int level, std::vector<AlgElement> grid)
      : spec_(std::move(spec)), level_(level), grid_(std::move(grid)) {
    if (level_ < 1) throw InvalidArgument("MatPoint: level must be >= 1");
    if (grid_.size() != static_cast<size_t>(level_) * static_cast<size_t>(level_))
      throw InvalidArgument("MatPoint: grid must have level^2 entries");
    for (const auto& g : grid_) require_same_spec(spec_, g.spec(), "MatPoint grid");
    const int d = spec_.total_dim();
    flat_ = Mat::Zero(static_cast<Eigen::Index>(level_) * d, static_cast<Eigen::Index>(level_) * d);
    for (int i = 0; i < level_; ++i)
      for (int j = 0; j < level_; ++j) flat_.block(i * d, j * d, d, d) = at(i, j).data();
  }

  /// From an nd x nd matrix; each d x d block is projected onto the algebra after a tolerance check.
  static MatPoint from_flat(const AlgebraSpec& spec, const Mat& flat, double tol = 1e-10) {
    const int d = spec.total_dim();
    if (flat.rows() != flat.cols() || flat.rows() % d != 0 || flat.rows() == 0)
      throw InvalidArgument("MatPoint::from_flat: dimension is not a positive multiple of the algebra size");
    const int n = static_cast<int>(flat.rows() / d);
    std::vector<AlgElement> grid;
    grid.reserve(static_cast<size_t>(n) * static_cast<size_t>(n));
    double scale = 1.0 + flat.norm();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Mat blk = flat.block(i * d, j * d, d, d);
        double off = spec.off_block_norm(blk);
        if (off > tol * scale) {
          std::ostringstream os;
          os << "MatPoint::from_flat: grid entry (" << i << "," << j << ") leaves algebra " << spec.to_string()
             << " (off-block norm " << off << ")";
          throw InvalidArgument(os.str());
        }
        grid.emplace_back(spec, spec.project(blk));
      }
    return MatPoint(spec, n, std::move(grid));
  }

  /// Level-1 wrapper.
  static MatPoint scalar_level(const AlgElement& b) { return MatPoint(b.spec(), 1, {b}); }

  const AlgebraSpec& spec() const { return spec_; }
  int level() const { return level_; }
  const AlgElement& at(int i, int j) const { return grid_.at(static_cast<size_t>(i) * static_cast<size_t>(level_) + static_cast<size_t>(j)); }
  const std::vector<AlgElement>& grid() const { return grid_; }
  const Mat& flat() const { return flat_; }
  Eigen::Index flat_dim() const { return flat_.rows(); }

  MatPoint adjoint() const { return from_flat(spec_, flat_.adjoint()); }
  double norm() const { return linalg::op_norm(flat_); }

  friend MatPoint operator+(const MatPoint& a, const MatPoint& b) {
    require_same_spec(a.spec_, b.spec_, "MatPoint +");
    if (a.level_ != b.level_) throw InvalidArgument("MatPoint +: level mismatch");
    return from_flat(a.spec_, a.flat_ + b.flat_);
  }
  friend MatPoint operator-(const MatPoint& a, const MatPoint& b) {
    require_same_spec(a.spec_, b.spec_, "MatPoint -");
    if (a.level_ != b.level_) throw InvalidArgument("MatPoint -: level mismatch");
    return from_flat(a.spec_, a.flat_ - b.flat_);
  }
  friend MatPoint operator*(const MatPoint& a, const MatPoint& b) {
    require_same_spec(a.spec_, b.spec_, "MatPoint *");
    if (a.level_ != b.level_) throw InvalidArgument("MatPoint *: level mismatch");
    return from_flat(a.spec_, a.flat_ * b.flat_);
  }
  friend MatPoint operator*(cplx s, const MatPoint& a) { return from_flat(a.spec_, s * a.flat_); }

 private:
  AlgebraSpec spec_;
  int level_ = 1;
  std::vector<AlgElement> grid_;
  Mat flat_;
};

struct RegionReport {
  bool in_open_uhp = false;
  bool in_closed_uhp = false;
  bool in_ball = false;
  bool in_closed_rhp = false;
  double min_im_eigenvalue = 0.0;
  double operator_norm = 0.0;
  double min_re_eigenvalue = 0.0;
};

/// Scalar matrix lifted to act on flat points: Gamma (x) 1_d in the grid-outer layout.
inline Mat scalar_lift(const Mat& gamma, int d) { return linalg::kron(gamma, Mat::Identity(d, d)); }

/// (X - X*) / (2i).
inline MatPoint imaginary_part(const MatPoint& x) { return MatPoint::from_flat(x.spec(), linalg::imag_part(x.flat())); }

inline MatPoint real_part(const MatPoint& x) { return MatPoint::from_flat(x.spec(), linalg::hermitian_part(x.flat())); }

inline RegionReport classify_region(const MatPoint& x, double tol = kTolPsd) {
  if (tol < 0) throw InvalidArgument("classify_region: tol must be >= 0");
  RegionReport r;
  r.min_im_eigenvalue = linalg::min_hermitian_eigenvalue(linalg::imag_part(x.flat()));
  r.min_re_eigenvalue = linalg::min_hermitian_eigenvalue(x.flat());
  r.operator_norm = x.norm();
  r.in_open_uhp = r.min_im_eigenvalue > tol;
  r.in_closed_uhp = r.min_im_eigenvalue >= -tol;
  r.in_ball = r.operator_norm < 1.0 - tol;
  r.in_closed_rhp = r.min_re_eigenvalue >= -tol;
  return r;
}

/// b (x) I_n: b on the grid diagonal.
inline MatPoint amplify(const AlgElement& b, int n) {
  if (n < 1) throw InvalidArgument("amplify: n must be >= 1");
  std::vector<AlgElement> grid;
  grid.reserve(static_cast<size_t>(n) * static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) grid.push_back(i == j ? b : AlgElement::zero(b.spec()));
  return MatPoint(b.spec(), n, std::move(grid));
}

inline MatPoint identity_point(const AlgebraSpec& spec, int n) { return amplify(AlgElement::unit(spec), n); }

/// Block-diagonal sum X + Y at level n_X + n_Y.
inline MatPoint direct_sum(const MatPoint& x, const MatPoint& y) {
  require_same_spec(x.spec(), y.spec(), "direct_sum");
  return MatPoint::from_flat(x.spec(), linalg::direct_sum(x.flat(), y.flat()));
}

/// Level-n point whose grid holds diagonal entries of C^m built from n x n component matrices.
/// components[k] is the k-th coordinate matrix; this is the natural point of M_n(C^m).
inline MatPoint from_components(const std::vector<Mat>& components) {
  if (components.empty()) throw InvalidArgument("from_components: need at least one component");
  const int m = static_cast<int>(components.size());
  const auto n = components[0].rows();
  AlgebraSpec spec = AlgebraSpec::diagonal(m);
  Mat flat = Mat::Zero(n * m, n * m);
  for (int k = 0; k < m; ++k) {
    if (components[static_cast<size_t>(k)].rows() != n || components[static_cast<size_t>(k)].cols() != n)
      throw InvalidArgument("from_components: component size mismatch");
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) flat(i * m + k, j * m + k) = components[static_cast<size_t>(k)](i, j);
  }
  return MatPoint::from_flat(spec, flat);
}

/// Inverse of from_components for points over a diagonal algebra.
inline std::vector<Mat> components(const MatPoint& x) {
  const int m = x.spec().total_dim();
  const int n = x.level();
  std::vector<Mat> out(static_cast<size_t>(m), Mat::Zero(n, n));
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[static_cast<size_t>(k)](i, j) = x.flat()(i * m + k, j * m + k);
  return out;
}

/// Random element of B (Ginibre entries projected onto the blocks).
inline AlgElement random_element(const AlgebraSpec& spec, Rng& rng) {
  return AlgElement(spec, spec.project(rng.ginibre(spec.total_dim(), spec.total_dim())));
}

/// Random level-n point over B with Ginibre grid entries.
inline MatPoint random_point(const AlgebraSpec& spec, int n, Rng& rng) {
  std::vector<AlgElement> grid;
  for (int k = 0; k < n * n; ++k) grid.push_back(random_element(spec, rng));
  return MatPoint(spec, n, std::move(grid));
}

/// Z = H + iP with H Hermitian over B and P = s G*G + margin I; Im Z >= margin I.
/// gram_scale = 0 drops the Gram term so that Im Z = margin I exactly.
inline MatPoint sample_uhp(const AlgebraSpec& spec, int n, double margin, std::uint64_t seed, double gram_scale = 1.0) {
  if (!(margin > 0)) throw InvalidArgument("sample_uhp: margin must be > 0");
  if (n < 1) throw InvalidArgument("sample_uhp: n must be >= 1");
  Rng rng(seed);
  MatPoint h = random_point(spec, n, rng);
  MatPoint g = random_point(spec, n, rng);
  Mat herm = linalg::hermitian_part(h.flat());
  Mat pos = gram_scale * (g.flat().adjoint() * g.flat());
  pos = linalg::hermitian_part(pos);
  pos.diagonal().array() += margin;
  return MatPoint::from_flat(spec, herm + kI * pos);
}

/// Triple with Gamma X' = Y Gamma for a scalar rectangular Gamma.
struct IntertwinerCase {
  MatPoint x;
  MatPoint y;
  Mat gamma;  // level(Y) x level(X'), scalar entries
  std::string kind;
};

/// |Gamma X' - Y Gamma| on flat forms.
inline double intertwining_residual(const Mat& gamma, const Mat& left_flat, const Mat& right_flat, int d) {
  Mat g = scalar_lift(gamma, d);
  return (g * left_flat - right_flat * g).norm();
}

/// Intertwiner cases around X: direct-sum injections (both slots), identity,
/// and a same-level similarity by an invertible scalar S with S X S^-1 kept in
/// the open upper half plane.
inline std::vector<IntertwinerCase> make_intertwiner_cases(const MatPoint& x, std::uint64_t seed) {
  Rng rng(seed);
  const int n = x.level();
  const int d = x.spec().total_dim();
  std::vector<IntertwinerCase> out;

  const int m = rng.uniform_int(1, 2);
  MatPoint extra = sample_uhp(x.spec(), m, 0.5, derive_seed(seed, 1));

  Mat inject_top = Mat::Zero(n + m, n);
  inject_top.topRows(n) = Mat::Identity(n, n);
  out.push_back({x, direct_sum(x, extra), inject_top, "direct_sum_first"});

  Mat inject_bottom = Mat::Zero(n + m, n);
  inject_bottom.bottomRows(n) = Mat::Identity(n, n);
  out.push_back({x, direct_sum(extra, x), inject_bottom, "direct_sum_second"});

  out.push_back({x, x, Mat::Identity(n, n), "identity"});

  // Similarity: S = U (I + eps K); shrink eps until S X S^-1 stays in Pi(B).
  Mat u = rng.unitary(n);
  Mat k = rng.ginibre(n, n);
  k /= std::max(1.0, linalg::op_norm(k));
  for (double eps = 0.5; eps > 1e-4; eps /= 2) {
    Mat s = u * (Mat::Identity(n, n) + eps * k);
    if (linalg::min_singular(s) < 1e-3) continue;
    Mat sl = scalar_lift(s, d);
    Mat y = sl * x.flat() * sl.inverse();
    MatPoint yp = MatPoint::from_flat(x.spec(), y);
    if (classify_region(yp).in_open_uhp) {
      out.push_back({x, yp, s, "similarity"});
      break;
    }
  }
  // Unitary similarity always preserves Pi(B).
  Mat ul = scalar_lift(u, d);
  out.push_back({x, MatPoint::from_flat(x.spec(), ul * x.flat() * ul.adjoint()), u, "unitary_similarity"});
  return out;
}

}  // namespace ncpick
