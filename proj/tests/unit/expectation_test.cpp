#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace pimsner;

namespace {

AElement ex1_oracle(const Correspondence& c, const AMatrix& X) {
  const AMatrix Y = c.U() * X * c.U().adjoint();
  AElement acc = AElement::zero(c.algebra());
  for (int i = 0; i < c.n(); ++i) acc += c.alphas()[static_cast<size_t>(i)].inverse().apply(Y.entry(i, i));
  return cplx(1.0 / c.n()) * acc;
}

// Ex_1 on every innermost n x n block, repeated k times.
AElement exk_oracle(const Correspondence& c, const AMatrix& X, int k) {
  AMatrix x = X;
  const int n = c.n();
  for (int step = 0; step < k; ++step) {
    const int p = x.rows() / n;
    AMatrix y = AMatrix::zero(c.algebra(), p, p);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) y.set_entry(i, j, ex1_oracle(c, x.sub(i * n, j * n, n, n)));
    }
    x = y;
  }
  return x.entry(0, 0);
}

}  // namespace

TEST(Trace, NormalisedTrace) {
  const auto c = fixtures::preset("cuntz2");
  const AlgebraSpec& spec = c->algebra();
  AMatrix d = AMatrix::zero(spec, 2, 2);
  d.set_entry(0, 0, AElement::diagonal(spec, {1.0}));
  d.set_entry(1, 1, AElement::diagonal(spec, {3.0}));
  EXPECT_LT(ex_trace(*c, d).max_abs_diff(AElement::diagonal(spec, {2.0})), 1e-15);
  AMatrix off = AMatrix::zero(spec, 2, 2);
  off.set_entry(0, 1, AElement::diagonal(spec, {5.0}));
  EXPECT_LT(ex_trace(*c, off).norm(), 1e-15);
}

TEST(Embedding, IsTensorWithIdentity) {
  const auto c = fixtures::generic();
  const AMatrix T = sample_amatrix(c->algebra(), 2, 2, 4);
  EXPECT_LT(embed_jk(*c, 1, T).max_abs_diff(c->amplify(T, 1)), 1e-15);
  const AElement a = sample(c->algebra(), SampleKind::element, 3);
  EXPECT_LT(embed_jk(*c, 0, AMatrix::from_element(a)).max_abs_diff(c->phi(1, a)), 1e-12);
}

class Tower : public ::testing::TestWithParam<std::string> {};

TEST_P(Tower, MatchesIndependentRecursion) {
  const auto c = GetParam() == "generic" ? fixtures::generic() : fixtures::preset(GetParam());
  for (int k = 0; k <= 3 && k <= c->max_degree(); ++k) {
    const AMatrix X = sample_amatrix(c->algebra(), c->rank(k), c->rank(k), 50 + k);
    EXPECT_LT(ex_k(*c, k, X).max_abs_diff(exk_oracle(*c, X, k)), 1e-11) << "k=" << k;
    EXPECT_LT(ex_k(*c, k, AMatrix::identity(c->algebra(), c->rank(k))).max_abs_diff(AElement::unit(c->algebra())),
              1e-12);
  }
}

TEST_P(Tower, ConditionalExpectationAxioms) {
  const auto c = GetParam() == "generic" ? fixtures::generic() : fixtures::preset(GetParam());
  for (int K = 0; K <= 3 && K + 1 <= c->max_degree(); ++K) {
    const CondExpReport rep = verify_cond_exp(*c, K);
    EXPECT_TRUE(rep.pass) << "K=" << K;
    for (const auto& a : rep.results) EXPECT_TRUE(a.pass) << a.axiom << " " << a.max_deviation;
  }
}

INSTANTIATE_TEST_SUITE_P(Presets, Tower, ::testing::Values("generic", "cuntz2", "crossed-z3", "twisted2", "rotation-m2"));

TEST(Tower, LeftInverseOfPhi) {
  const auto c = fixtures::generic();
  const AElement a = sample(c->algebra(), SampleKind::element, 77);
  EXPECT_LT(ex_k(*c, 1, c->phi(1, a)).max_abs_diff(a), 1e-12);
  EXPECT_LT(ex_k(*c, 3, c->phi(3, a)).max_abs_diff(a), 1e-11);
}

TEST(Tower, CorruptedUnitaryIsDetected) {
  const AlgebraSpec spec({1});
  const Correspondence bad(spec, 2, 2.0 * AMatrix::identity(spec, 2),
                           {Automorphism::identity(spec), Automorphism::identity(spec)});
  const CondExpReport rep = verify_cond_exp(bad, 1);
  EXPECT_FALSE(rep.pass);
  const auto it = std::find_if(rep.results.begin(), rep.results.end(),
                               [](const AxiomResult& r) { return r.axiom == "Ex_K o phi_K = id"; });
  ASSERT_NE(it, rep.results.end());
  // Ex_1(phi_1(a)) = 16 a for U = 2
  EXPECT_FALSE(it->pass);
  EXPECT_GT(it->max_deviation, 1.0);
}

TEST(Tower, ExpectationMapIsUcp) {
  const auto c = fixtures::preset("twisted2");
  const CPReport r = choi_cp_check(ex_map(*c, 2));
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.unital_defect, 0.0, 1e-12);
}

TEST(EpsBar, UnitAndModuleTensors) {
  const auto c = fixtures::generic(3, 4);
  const EInftyContext ctx(c, 1);
  const AlgebraSpec& spec = c->algebra();
  const AMatrix xi = sample_amatrix(spec, 2, 1, 1);
  const AMatrix one = AMatrix::identity(spec, 2);
  EXPECT_LT(eps_bar(*c, 1, ctx.embed(xi, one)).max_abs_diff(xi), 1e-12);
  const AElement a = sample(spec, SampleKind::element, 2);
  EXPECT_LT(eps_bar(*c, 1, ctx.embed(xi, c->phi(1, a))).max_abs_diff(xi * AMatrix::from_element(a)), 1e-12);
}

TEST(EpsBar, Contraction) {
  const auto c = fixtures::preset("twisted2");
  for (int K = 1; K <= 2; ++K) {
    const int b = c->rank(K);
    for (int t = 0; t < 20; ++t) {
      const AMatrix z = sample_amatrix(c->algebra(), 2 * b, b, 1000 + static_cast<std::uint64_t>(t));
      EXPECT_LE(eps_bar(*c, K, z).norm(), z.norm() * (1 + 1e-12));
    }
  }
}

TEST(EpsHat, UnitalCompletelyPositiveRankOne) {
  const auto c = fixtures::generic(8, 4);
  const int K = 1;
  const EInftyContext ctx(c, K);
  const AlgebraSpec& spec = c->algebra();
  EXPECT_LT(eps_hat(*c, K, AMatrix::identity(spec, 4)).max_abs_diff(AMatrix::identity(spec, 2)), 1e-12);
  EXPECT_TRUE(choi_cp_check(eps_hat_map(*c, K, 2)).pass);
  const AMatrix xi = sample_amatrix(spec, 2, 1, 1);
  const AMatrix eta = sample_amatrix(spec, 2, 1, 2);
  const AMatrix b = sample_amatrix(spec, 2, 2, 3);
  const AMatrix cc = sample_amatrix(spec, 2, 2, 4);
  const AMatrix lhs = eps_hat(*c, K, ctx.embed(xi, b) * ctx.embed(eta, cc).adjoint());
  const AMatrix rhs = rank_one(xi * AMatrix::from_element(ex_k(*c, K, b * cc.adjoint())), eta);
  EXPECT_LT(lhs.max_abs_diff(rhs), 1e-11);
}
