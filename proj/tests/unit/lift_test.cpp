#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace pimsner;

TEST(EInfty, InnerProductsAndBimoduleIdentity) {
  const auto c = fixtures::generic(4, 4);
  for (int K = 0; K <= 2; ++K) {
    const EInftyContext ctx(c, K);
    const AlgebraSpec& spec = c->algebra();
    const int b = ctx.b_rank();
    const AMatrix xi = sample_amatrix(spec, 2, 1, 1);
    const AMatrix eta = sample_amatrix(spec, 2, 1, 2);
    const AMatrix b1 = sample_amatrix(spec, b, b, 3);
    const AMatrix b2 = sample_amatrix(spec, b, b, 4);
    // <xi (x) b1, eta (x) b2> = b1^* phi_K(<xi, eta>) b2
    const AMatrix lhs = ctx.right_inner(ctx.embed(xi, b1), ctx.embed(eta, b2));
    EXPECT_LT(lhs.max_abs_diff(b1.adjoint() * c->phi(K, inner(xi, eta)) * b2), 1e-11);
    // left inner product of elementary tensors: e_{xi, eta} (x) b1 b2^*
    const AMatrix left = einfty_inner(ctx, ctx.embed(xi, b1), ctx.embed(eta, b2), InnerSide::left);
    EXPECT_LT(left.max_abs_diff(c->amplify(xi, K) * b1 * b2.adjoint() * c->amplify(eta, K).adjoint()), 1e-11);
    const AMatrix x = sample_amatrix(spec, 2 * b, b, 5);
    const AMatrix y = sample_amatrix(spec, 2 * b, b, 6);
    const AMatrix z = sample_amatrix(spec, 2 * b, b, 7);
    EXPECT_LT(ctx.bimodule_defect(x, y, z), 1e-11);
  }
  EXPECT_THROW(EInftyContext(c, 99), ConfigError);
}

TEST(PiI, UnitalCase) {
  const auto c = fixtures::generic();
  const FockWindow w = FockWindow::one_sided(3);
  const AElement a = sample(c->algebra(), SampleKind::element, 8);
  const GradedOperator p = pi_i(c, 0, AMatrix::from_element(a), w);
  for (int j = 0; j <= 3; ++j) EXPECT_LT(p.block(j, j).max_abs_diff(c->phi(j, a)), 1e-12);
  EXPECT_EQ(p.blocks().size(), 4u);
}

TEST(LiftDefect, TrivialCoefficientsVanish) {
  const auto c = fixtures::generic(6, 5);
  const EInftyContext ctx(c, 2);
  const FockWindow w = FockWindow::one_sided(3);
  const AlgebraSpec& spec = c->algebra();
  const AMatrix mu = generator_vector(*c, 1, 1);
  const AMatrix nu = generator_vector(*c, 2, 2);
  const AMatrix one = AMatrix::identity(spec, 1);
  const LiftDefect d = lift_defect(ctx, mu, 1, nu, 2, one, one, 0, w, 1e-9);
  EXPECT_TRUE(d.pass);
  EXPECT_TRUE(d.support.empty());
  EXPECT_LT(d.defect.max_abs(), 1e-11);
}

TEST(LiftDefect, SupportBelowI) {
  for (const char* name : {"cuntz2", "twisted2", "crossed-z3", "rotation-m2"}) {
    const auto c = fixtures::preset(name);
    const FockWindow w = FockWindow::one_sided(4);
    for (int K = 1; K <= 2; ++K) {
      const EInftyContext ctx(c, K);
      for (int i = 0; i <= K; ++i) {
        const AMatrix mu = generator_vector(*c, 1, 11);
        const AMatrix nu = generator_vector(*c, 1, 12);
        const AMatrix b = sample_amatrix(c->algebra(), c->rank(i), c->rank(i), 13);
        const AMatrix cc = sample_amatrix(c->algebra(), c->rank(i), c->rank(i), 14);
        const LiftDefect d = lift_defect(ctx, mu, 1, nu, 1, b, cc, i, w, 1e-9);
        EXPECT_TRUE(d.pass) << name << " K=" << K << " i=" << i;
        EXPECT_LT(d.above_i, 1e-9);
        for (int k : d.support) EXPECT_LT(k, i);
      }
    }
  }
}

TEST(LiftDefect, RejectsBadLevels) {
  const auto c = fixtures::preset("cuntz2");
  const EInftyContext ctx(c, 1);
  const AMatrix one = AMatrix::identity(c->algebra(), 1);
  EXPECT_THROW(lift_defect(ctx, one, 0, one, 0, one, one, 2, FockWindow::one_sided(3), 1e-9), ConfigError);
}

TEST(BilateralLift, DefectIsTheNegativeDegreeDetour) {
  // P s_mu s_nu^* P - t_mu t_nu^* = P s_mu (1 - P) s_nu^* P, computed on the
  // two-sided window and restricted to the nonnegative half.
  const auto c = fixtures::generic_bimodule();
  const int M = 6;
  const FockWindow w2 = FockWindow::bilateral(M);
  for (int r = 0; r <= 3; ++r) {
    for (int s = 0; s <= 3; ++s) {
      const AMatrix mu = generator_vector(*c, r, 10 + r);
      const AMatrix nu = generator_vector(*c, s, 20 + s);
      const BilateralLift bl = bilateral_lift(c, mu, r, nu, s, w2, 1e-9);
      const GradedOperator S = creation_op(c, mu, r, w2);
      const GradedOperator T = creation_op(c, nu, s, w2);
      const GradedOperator neg = GradedOperator::projection(c, w2, -M, -1);
      const GradedOperator detour = S * neg * T.adjoint();
      const GradedOperator diff = bl.lifted - bl.toeplitz;
      double dev = 0.0;
      for (int i = 0; i <= M; ++i) {
        for (int j = 0; j <= M; ++j) dev = std::max(dev, diff.block(i, j).max_abs_diff(detour.block(i, j)));
      }
      EXPECT_LT(dev, 1e-12) << r << "," << s;
      // the detour lives exactly on offsets -min(r, s) .. -1
      std::vector<int> expect;
      for (int k = -std::min(r, s); k <= -1; ++k) expect.push_back(k);
      EXPECT_EQ(bl.differing_offsets, expect) << r << "," << s;
      EXPECT_EQ(bl.pass, std::min(r, s) == 0);
      EXPECT_LT(bl.tail.tail_deviation, 1e-12);
    }
  }
}

TEST(BilateralLift, CompressionIsCompletelyPositive) {
  const auto c = fixtures::preset("rotation-m2");
  const CPReport r = choi_cp_check(compression_lift_map(c, FockWindow::bilateral(3)));
  EXPECT_TRUE(r.pass);
}

TEST(Certificate, BilateralRateOneOverNPlusOne) {
  const auto c = fixtures::preset("crossed-z3");
  const CPAPCertificate cert = cpap_certificate(c, 5, {{1, 0}, {0, 0}, {2, 0}}, FockWindow::bilateral(8), 3);
  ASSERT_EQ(cert.generators.size(), 3u);
  const GeneratorResult& g = cert.generators[0];
  EXPECT_EQ(g.coeff_expected, Rational::make(5, 6));
  EXPECT_NEAR(g.error, g.g_norm / 6.0, 1e-12);
  EXPECT_NEAR(cert.generators[1].error, 0.0, 1e-12);
  EXPECT_NEAR(cert.generators[2].error, 2.0 * cert.generators[2].g_norm / 6.0, 1e-12);
  EXPECT_TRUE(cert.pass);
  EXPECT_EQ(cert.D, 6);
  EXPECT_EQ(cert.flatten_dim, 18);
}

TEST(Certificate, OneSidedTailCoefficient) {
  const auto c = fixtures::preset("cuntz2");
  const CPAPCertificate cert = cpap_certificate(c, 4, {{1, 0}}, FockWindow::one_sided(6), 1);
  EXPECT_EQ(cert.generators[0].coeff_expected, Rational::make(4, 5));
  EXPECT_NEAR(cert.generators[0].coeff_measured, 0.8, 1e-12);
  EXPECT_TRUE(cert.pass);
  for (const auto& fm : cert.factor_maps) {
    EXPECT_TRUE(fm.cp.pass) << fm.direction;
    EXPECT_LE(fm.norm, 1.0 + 1e-9);
  }
}

TEST(Certificate, TwistedPresetCompletelyPositive) {
  const auto c = fixtures::preset("twisted2");
  const CPAPCertificate cert = cpap_certificate(c, 4, {{0, 0}, {1, 0}, {1, 2}}, FockWindow::one_sided(6), 9);
  EXPECT_TRUE(cert.pass);
  EXPECT_EQ(cert.factor_maps.size(), 2u);
  EXPECT_EQ(cert.generators[1].seed, 9u + 7919u);
  EXPECT_THROW(cpap_certificate(c, 7, {{0, 0}}, FockWindow::one_sided(6), 9), ConfigError);
}

TEST(Certificate, FingerprintSeparatesPresets) {
  EXPECT_EQ(spec_fingerprint(*fixtures::preset("twisted2")), spec_fingerprint(*fixtures::preset("twisted2")));
  EXPECT_NE(spec_fingerprint(*fixtures::preset("twisted2")), spec_fingerprint(*fixtures::preset("cuntz2")));
}

TEST(Compose, IdentityPairLeavesErrorsUnchanged) {
  const AlgebraSpec spec({2, 1});
  const FactorPair outer = isometry_pair(spec, 3, 2, 4);
  std::vector<FlatElement> probes;
  for (std::uint64_t t = 0; t < 4; ++t) {
    const AMatrix x = sample_amatrix(spec, 3, 3, 50 + t);
    probes.push_back(x.blocks());
  }
  const ComposedReport rep = compose_certificates(outer, identity_pair(outer.down.codomain), probes);
  EXPECT_TRUE(rep.pass);
  for (size_t i = 0; i < probes.size(); ++i) {
    const double alone = flat_norm(flat_sub(outer.up(outer.down(probes[i])), probes[i]));
    EXPECT_NEAR(rep.errors[i], alone, 1e-12);
  }
  EXPECT_THROW(compose_certificates(outer, identity_pair(FlatShape{{7}}), probes), ShapeError);
}

TEST(Compose, TriangleBoundHolds) {
  const AlgebraSpec spec({2});
  const FactorPair outer = isometry_pair(spec, 4, 3, 1);
  const FactorPair inner = isometry_pair(spec, 3, 2, 2);
  std::vector<FlatElement> probes;
  for (std::uint64_t t = 0; t < 6; ++t) probes.push_back(sample_amatrix(spec, 4, 4, 70 + t).blocks());
  const ComposedReport rep = compose_certificates(outer, inner, probes);
  EXPECT_TRUE(rep.pass);
  for (size_t i = 0; i < probes.size(); ++i) EXPECT_LE(rep.errors[i], rep.bounds[i] + 1e-12);
}
