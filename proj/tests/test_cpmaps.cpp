#include "catch_amalgamated.hpp"

#include "ncpick/cauchy.hpp"

using namespace ncpick;

namespace {

const AlgebraSpec c2 = AlgebraSpec::diagonal(2);
const AlgebraSpec c3 = AlgebraSpec::diagonal(3);
const AlgebraSpec m3 = AlgebraSpec::full(3);

Mat diag(std::initializer_list<cplx> v) {
  Vec d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (cplx x : v) d(i++) = x;
  return d.asDiagonal();
}

}  // namespace

TEST_CASE("conditional expectation and dilation of the two-block example") {
  CauchyModel m = counterexample_model();
  CHECK(apply(m.e(), AlgElement::diagonal(m3, {3.0, 4.0, 5.0})).data() == diag({3, 4}));
  CHECK((apply(m.psi(), AlgElement::diagonal(c2, {1.0, 2.0})).data() - diag({1, 2, 1.5})).norm() == 0.0);
  AlgElement x = AlgElement::diagonal(c2, {cplx(1, 2), cplx(-3, 0.5)});
  CHECK(apply(LinMap::identity(c2), x).data() == x.data());
  CHECK_THROWS_AS(apply(m.e(), x), SpecMismatch);
}

TEST_CASE("apply_amplified acts entrywise") {
  CauchyModel m = counterexample_model();
  AlgElement a = AlgElement::diagonal(m3, {3.0, 4.0, 5.0});
  AlgElement b = AlgElement::diagonal(m3, {6.0, 7.0, 8.0});
  MatPoint x(m3, 2, {a, AlgElement::zero(m3), AlgElement::zero(m3), b});
  MatPoint y = apply_amplified(m.e(), x);
  Mat want = Mat::Zero(4, 4);
  want.diagonal() << 3, 4, 6, 7;
  CHECK(y.flat() == want);
  CHECK(apply_amplified(m.e(), MatPoint::scalar_level(a)).flat() == apply(m.e(), a).data());
  MatPoint z = sample_uhp(c3, 3, 0.1, 9);
  CHECK(apply_amplified(LinMap::identity(c3), z).flat() == z.flat());
}

TEST_CASE("Choi certificates") {
  AlgebraSpec m2 = AlgebraSpec::full(2);
  ChoiMatrix id = choi(LinMap::identity(m2));
  // sum_ab e_ab (x) e_ab = vec(I) vec(I)^*
  Vec omega = Vec::Zero(4);
  omega(0) = omega(3) = 1;
  CHECK((id.data - omega * omega.adjoint()).norm() == 0.0);
  CHECK(id.data.trace() == cplx(2));
  CHECK(is_completely_positive(LinMap::identity(m2)));

  ChoiMatrix tr = choi(LinMap::transpose(m2));
  CHECK(std::abs(tr.min_eigenvalue + 1.0) < 1e-12);
  CHECK_FALSE(is_completely_positive(LinMap::transpose(m2)));

  CauchyModel m = counterexample_model();
  ChoiMatrix e = choi(m.e());
  // only diagonal units survive: blockdiag(E(e11), E(e22), E(e33)) = diag(1,0, 0,1, 0,0)
  Mat want = Mat::Zero(6, 6);
  want(0, 0) = 1;
  want(3, 3) = 1;
  CHECK((e.data - want).norm() == 0.0);
  CHECK(is_completely_positive(m.e()));
  CHECK(is_completely_positive(m.psi()));
}

TEST_CASE("Choi is linear in the map") {
  CauchyModel m = counterexample_model();
  LinMap sum = m.e() + cplx(2.0) * m.e();
  CHECK((choi(sum).data - 3.0 * choi(m.e()).data).norm() < 1e-14);
}

TEST_CASE("unitality") {
  CauchyModel m = counterexample_model();
  CHECK(is_unital(m.psi()));
  CHECK(is_unital(m.e()));
  CHECK_FALSE(is_unital(LinMap::zero(c2, c2)));
  CHECK_FALSE(is_unital(cplx(2.0) * LinMap::identity(c2)));
}

TEST_CASE("homomorphism certification") {
  CauchyModel m = counterexample_model();
  CHECK(is_homomorphic_on(m.e(), range_basis(m.psi())));
  std::vector<AlgElement> units;
  for (const auto& b : c3.basis()) units.push_back(AlgElement(m3, b));
  CHECK(is_homomorphic_on(m.e(), units));
  // average of the two coordinates into both outputs: unital CP, not multiplicative
  LinMap avg = LinMap::from_function(c2, c2, [](const Mat& x) {
    cplx mean = (x(0, 0) + x(1, 1)) / 2.0;
    return Mat(mean * Mat::Identity(2, 2));
  });
  CHECK(is_unital(avg));
  CHECK(is_completely_positive(avg));
  CHECK_FALSE(is_homomorphic_on(avg, {AlgElement::diagonal(c2, {1.0, 0.0})}));
}

TEST_CASE("dilation pairs") {
  CauchyModel m = counterexample_model();
  CHECK(check_dilation_pair(m.e(), m.psi()));
  CHECK(check_dilation_pair(LinMap::identity(c2), LinMap::identity(c2)));
  CHECK_FALSE(check_dilation_pair(m.e(), cplx(2.0) * m.psi()));
}

TEST_CASE("Kraus operators reproduce the map") {
  CauchyModel m = random_homomorphic_model(3);
  auto ks = kraus_operators(m.psi());
  Rng rng(1);
  AlgElement b = random_element(m.b(), rng);
  Mat acc = Mat::Zero(m.m().total_dim(), m.m().total_dim());
  for (const auto& k : ks) acc += k * b.data() * k.adjoint();
  CHECK((acc - apply(m.psi(), b).data()).norm() < 1e-10);
}

TEST_CASE("CP maps preserve positivity and order units under amplification") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    CauchyModel m = random_homomorphic_model(seed);
    Rng rng(seed);
    for (int n = 1; n <= 4; ++n) {
      MatPoint g = random_point(m.b(), n, rng);
      MatPoint pos = MatPoint::from_flat(m.b(), g.flat() * g.flat().adjoint());
      CHECK(linalg::min_hermitian_eigenvalue(apply_amplified(m.psi(), pos).flat()) >= -1e-9);
      MatPoint z = sample_uhp(m.b(), n, 0.3, seed * 10 + static_cast<std::uint64_t>(n), 0.0);
      double low = linalg::min_hermitian_eigenvalue(linalg::imag_part(apply_amplified(m.psi(), z).flat()));
      CHECK(low >= 0.3 - 1e-9);
    }
  }
}

TEST_CASE("Tomiyama property") {
  CauchyModel m = counterexample_model();
  TomiyamaReport r = tomiyama_check(m.e(), range_basis(m.psi()), 100, 1e-10, 4);
  CHECK(r.passed);
  CHECK(r.max_residual <= 1e-10);
  CHECK(r.max_projection_residual <= 1e-10);
  CHECK(r.projections_checked > 0);

  // b1 = b2 = 1 is E(m) = E(m)
  Rng rng(2);
  Mat x = m.m().project(rng.ginibre(3, 3));
  Mat one = m.m().identity();
  CHECK((m.e().apply_raw(one * x * one) - m.e().apply_raw(one) * m.e().apply_raw(x) * m.e().apply_raw(one)).norm() == 0.0);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CauchyModel h = random_homomorphic_model(seed);
    CHECK(tomiyama_check(h.e(), range_basis(h.psi()), 50, 1e-10, seed).passed);
  }
  CauchyModel nh = nonhomomorphic_fixture();
  Mat e12 = Mat::Zero(2, 2);
  e12(0, 1) = 1;
  std::vector<AlgElement> gens{AlgElement(nh.m(), e12), AlgElement(nh.m(), Mat(e12.transpose()))};
  CHECK_THROWS_AS(tomiyama_check(nh.e(), gens, 10, 1e-10, 1), InvalidArgument);
}

TEST_CASE("LinMap validates shape and zeroes off-block columns") {
  CHECK_THROWS_AS(LinMap(c2, c2, Mat::Identity(3, 3)), InvalidArgument);
  LinMap full(c2, c2, Mat::Ones(4, 4));
  CHECK(full.matrix().col(1).isZero());
  CHECK(full.matrix().col(2).isZero());
  CHECK_FALSE(full.matrix().col(0).isZero());
}
