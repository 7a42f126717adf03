#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace pimsner;

namespace {

// U^* diag(alpha_i(a)) U assembled entry by entry.
AMatrix phi1_oracle(const Correspondence& c, const AElement& a) {
  const int n = c.n();
  AMatrix d = AMatrix::zero(c.algebra(), n, n);
  for (int i = 0; i < n; ++i) d.set_entry(i, i, c.alphas()[static_cast<size_t>(i)].apply(a));
  return c.U().adjoint() * d * c.U();
}

// phi_{k+1}(a): replace every entry of phi_k(a) by its phi_1 image.
AMatrix phik_oracle(const Correspondence& c, const AElement& a, int k) {
  AMatrix x = AMatrix::from_element(a);
  for (int step = 0; step < k; ++step) {
    const int p = x.rows();
    const int n = c.n();
    AMatrix y = AMatrix::zero(c.algebra(), p * n, p * n);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) y.set_sub(i * n, j * n, phi1_oracle(c, x.entry(i, j)));
    }
    x = y;
  }
  return x;
}

}  // namespace

TEST(Helpers, PowersAndLogs) {
  EXPECT_EQ(ipow(2, 10), 1024);
  EXPECT_EQ(ipow(1, 50), 1);
  EXPECT_EQ(log_n(3, 27), 3);
  EXPECT_EQ(log_n(2, 6), -1);
  EXPECT_THROW(ipow(2, 40), ShapeError);
}

TEST(Correspondence, AlphaHatInvertsAlphaTilde) {
  const auto c = fixtures::generic();
  const AElement a = sample(c->algebra(), SampleKind::element, 21);
  const AMatrix back = c->alpha_hat(c->alpha_tilde(a));
  for (int i = 0; i < c->n(); ++i) {
    for (int j = 0; j < c->n(); ++j) {
      const AElement expect = i == j ? a : AElement::zero(c->algebra());
      EXPECT_LT(back.entry(i, j).max_abs_diff(expect), 1e-13);
    }
  }
  AMatrix off = sample_amatrix(c->algebra(), 2, 2, 3);
  off.set_entry(0, 0, AElement::zero(c->algebra()));
  off.set_entry(1, 1, AElement::zero(c->algebra()));
  EXPECT_TRUE(c->alpha_hat(off).is_zero());
}

TEST(Correspondence, PhiZeroAndOne) {
  const auto c = fixtures::generic();
  const AElement a = sample(c->algebra(), SampleKind::element, 5);
  EXPECT_LT(c->phi(0, a).max_abs_diff(AMatrix::from_element(a)), 1e-15);
  EXPECT_LT(c->phi(1, a).max_abs_diff(phi1_oracle(*c, a)), 1e-12);
}

class PhiTower : public ::testing::TestWithParam<std::string> {};

TEST_P(PhiTower, MatchesEntrywiseRecursion) {
  const auto c = GetParam() == "generic" ? fixtures::generic() : fixtures::preset(GetParam());
  const AElement a = sample(c->algebra(), SampleKind::element, 31);
  const AElement b = sample(c->algebra(), SampleKind::element, 32);
  for (int k = 0; k <= 3; ++k) {
    const AMatrix pa = c->phi(k, a);
    EXPECT_LT(pa.max_abs_diff(phik_oracle(*c, a, k)), 1e-11) << "k=" << k;
    EXPECT_LT(c->amplify(AMatrix::from_element(a), k).max_abs_diff(pa), 1e-11);
    // unital *-homomorphism
    EXPECT_LT(c->phi(k, a * b).max_abs_diff(pa * c->phi(k, b)), 1e-11);
    EXPECT_LT(c->phi(k, a.adjoint()).max_abs_diff(pa.adjoint()), 1e-11);
    EXPECT_LT(c->phi(k, AElement::unit(c->algebra())).max_abs_diff(AMatrix::identity(c->algebra(), c->rank(k))),
              1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Presets, PhiTower, ::testing::Values("generic", "cuntz2", "crossed-z3", "twisted2", "rotation-m2"));

TEST(Correspondence, AmplifyIsEntrywisePhi) {
  const auto c = fixtures::generic();
  const AMatrix x = sample_amatrix(c->algebra(), 2, 4, 9);
  EXPECT_LT(c->amplify(x, 0).max_abs_diff(x), 1e-15);
  const AMatrix y = c->amplify(x, 2);
  ASSERT_EQ(y.rows(), 8);
  ASSERT_EQ(y.cols(), 16);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 4; ++j) EXPECT_LT(y.sub(4 * i, 4 * j, 4, 4).max_abs_diff(c->phi(2, x.entry(i, j))), 1e-12);
  }
  EXPECT_LT(c->amplify(AMatrix::identity(c->algebra(), 2), 2).max_abs_diff(AMatrix::identity(c->algebra(), 8)), 1e-12);
  EXPECT_THROW(c->amplify_entrywise(sample_amatrix(c->algebra(), 3, 2, 1), 1), ShapeError);
  EXPECT_THROW(c->amplify(x, -1), ShapeError);
}

TEST(Correspondence, BetaInverse) {
  const auto c = fixtures::generic_bimodule();
  const AElement a = sample(c->algebra(), SampleKind::element, 1);
  EXPECT_LT(c->beta(c->beta(a, 3), -3).max_abs_diff(a), 1e-12);
  EXPECT_LT(c->beta(a, 1).max_abs_diff(c->phi(1, a).entry(0, 0)), 1e-12);
  EXPECT_LT(c->amplify(c->amplify(AMatrix::from_element(a), 2), -2).max_abs_diff(AMatrix::from_element(a)), 1e-12);
}

TEST(Correspondence, TensorInnerProduct) {
  // <xi (x) eta, xi' (x) eta'> = <eta, phi_k(<xi, xi'>) eta'>
  const auto c = fixtures::generic();
  const AlgebraSpec& spec = c->algebra();
  for (int j = 1; j <= 2; ++j) {
    for (int k = 0; k <= 2; ++k) {
      const AMatrix xi = sample_amatrix(spec, c->rank(j), 1, 10 + j);
      const AMatrix xi2 = sample_amatrix(spec, c->rank(j), 1, 20 + j);
      const AMatrix eta = sample_amatrix(spec, c->rank(k), 1, 30 + k);
      const AMatrix eta2 = sample_amatrix(spec, c->rank(k), 1, 40 + k);
      const AElement lhs = inner(c->tensor_vec(xi, eta, k), c->tensor_vec(xi2, eta2, k));
      const AElement rhs = inner(eta, c->phi(k, inner(xi, xi2)) * eta2);
      EXPECT_LT(lhs.max_abs_diff(rhs), 1e-11) << j << "," << k;
    }
  }
}

TEST(Validate, PresetsPass) {
  for (const auto& name : lab::preset_names()) {
    const ValidationReport r = validate_spec(*fixtures::preset(name));
    EXPECT_TRUE(r.pass) << name << ": " << r.failures();
  }
  EXPECT_TRUE(validate_spec(*fixtures::generic()).pass);
  EXPECT_TRUE(validate_spec(*fixtures::generic_bimodule()).pass);
}

TEST(Validate, ScaledUnitaryFailsWithDeviationThree) {
  const AlgebraSpec spec({1});
  const AMatrix U = 2.0 * AMatrix::identity(spec, 2);
  const Correspondence c(spec, 2, U, {Automorphism::identity(spec), Automorphism::identity(spec)});
  const ValidationReport r = validate_spec(c);
  EXPECT_FALSE(r.pass);
  ASSERT_NE(r.find("U unitary"), nullptr);
  EXPECT_NEAR(r.find("U unitary")->deviation, 3.0, 1e-12);
  EXPECT_THROW(require_valid(c), ValidationError);
}

TEST(Validate, WrongShapesAreRejected) {
  const AlgebraSpec spec({1, 1});
  EXPECT_ANY_THROW(Correspondence(spec, 2, AMatrix::identity(spec, 3), {Automorphism::identity(spec)}));
  EXPECT_ANY_THROW(Correspondence(spec, 0, AMatrix::identity(spec, 0), {}));
}
