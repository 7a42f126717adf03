#include "pimsner/hilbert_module.hpp"

#include <gtest/gtest.h>

using namespace pimsner;

namespace {

LinearMap transpose_map(int d) {
  return LinearMap{FlatShape{{d}}, FlatShape{{d}}, [](const FlatElement& x) { return FlatElement{x[0].transpose()}; }};
}

LinearMap identity_map(const FlatShape& s) {
  return LinearMap{s, s, [](const FlatElement& x) { return x; }};
}

// M_2(M_2) -> M_2, [x_ij] -> (x_11 + x_22) / 2.
LinearMap partial_trace_map() {
  return LinearMap{FlatShape{{4}}, FlatShape{{2}}, [](const FlatElement& x) {
                     return FlatElement{0.5 * (x[0].topLeftCorner(2, 2) + x[0].bottomRightCorner(2, 2))};
                   }};
}

}  // namespace

TEST(AMatrix, IdentityIsNeutral) {
  const AlgebraSpec spec({2, 1});
  const AMatrix x = sample_amatrix(spec, 3, 2, 1);
  EXPECT_LT((AMatrix::identity(spec, 3) * x).max_abs_diff(x), 1e-15);
  EXPECT_LT((x * AMatrix::identity(spec, 2)).max_abs_diff(x), 1e-15);
}

TEST(AMatrix, FlattenOverM2IsTheMatrix) {
  const AlgebraSpec spec({2});
  const AElement a = sample(spec, SampleKind::element, 3);
  const Mat f = AMatrix::from_element(a).flatten();
  EXPECT_LT((f - a.block(0)).norm(), 1e-15);
}

TEST(AMatrix, FlattenOverC2IsDirectSum) {
  const AlgebraSpec c2({1, 1});
  const AMatrix x = sample_amatrix(c2, 2, 2, 8);
  const Mat f = x.flatten();
  ASSERT_EQ(f.rows(), 4);
  for (int s = 0; s < 2; ++s) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) EXPECT_EQ(f(2 * s + i, 2 * s + j), x.entry(i, j).block(s)(0, 0));
    }
  }
  EXPECT_EQ(f(0, 2), cplx(0.0));
}

TEST(AMatrix, ProductMatchesEntrywiseDefinition) {
  const AlgebraSpec spec({2, 3});
  const AMatrix x = sample_amatrix(spec, 2, 3, 4);
  const AMatrix y = sample_amatrix(spec, 3, 2, 5);
  const AMatrix p = x * y;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      AElement acc = AElement::zero(spec);
      for (int k = 0; k < 3; ++k) acc += x.entry(i, k) * y.entry(k, j);
      EXPECT_LT(p.entry(i, j).max_abs_diff(acc), 1e-13);
    }
  }
  EXPECT_LT(x.adjoint().entry(2, 1).max_abs_diff(x.entry(1, 2).adjoint()), 1e-15);
  EXPECT_THROW(x * x, ShapeError);
}

TEST(AMatrix, KronIdentityAndSubBlocks) {
  const AlgebraSpec spec({1, 2});
  const AMatrix x = sample_amatrix(spec, 2, 1, 6);
  const AMatrix k = AMatrix::kron_identity(3, x);
  EXPECT_EQ(k.rows(), 6);
  EXPECT_EQ(k.cols(), 3);
  EXPECT_LT(k.sub(4, 2, 2, 1).max_abs_diff(x), 1e-15);
  EXPECT_TRUE(k.sub(0, 1, 2, 1).is_zero());
}

TEST(InnerProduct, UnitVectorAndRankOne) {
  const AlgebraSpec c1({1});
  AMatrix e1 = AMatrix::zero(c1, 3, 1);
  e1.set_entry(0, 0, AElement::unit(c1));
  EXPECT_LT(inner(e1, e1).max_abs_diff(AElement::unit(c1)), 1e-15);

  const AMatrix p = rank_one(e1, e1);
  EXPECT_LT((p * p).max_abs_diff(p), 1e-15);
  EXPECT_LT(p.hermitian_defect(), 1e-15);
  EXPECT_NEAR(p.entry(0, 0).block(0)(0, 0).real(), 1.0, 1e-15);
}

TEST(InnerProduct, RankOneActsByInnerProduct) {
  const AlgebraSpec spec({2, 1});
  const AMatrix mu = sample_amatrix(spec, 3, 1, 1);
  const AMatrix nu = sample_amatrix(spec, 3, 1, 2);
  const AMatrix xi = sample_amatrix(spec, 3, 1, 3);
  const AMatrix lhs = rank_one(mu, nu) * xi;
  const AMatrix rhs = mu * AMatrix::from_element(inner(nu, xi));
  EXPECT_LT(lhs.max_abs_diff(rhs), 1e-13);
  EXPECT_THROW(rank_one(mu, sample_amatrix(spec, 3, 2, 4)), ShapeError);
}

TEST(InnerProduct, ModuleNormIsSqrtOfInnerNorm) {
  const AlgebraSpec spec({2, 2});
  const AMatrix xi = sample_amatrix(spec, 4, 1, 12);
  EXPECT_NEAR(module_norm(xi), std::sqrt(inner(xi, xi).norm()), 1e-12);
  EXPECT_NEAR(module_norm(sample_unit_vector(spec, 4, 3)), 1.0, 1e-12);
}

TEST(Choi, IdentityMapIsCompletelyPositive) {
  const CPReport r = choi_cp_check(identity_map(FlatShape{{2}}));
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.min_eigenvalue, 0.0, 1e-14);
  EXPECT_EQ(r.choi_side, 4);
  EXPECT_NEAR(r.unital_defect, 0.0, 1e-15);
}

TEST(Choi, TransposeIsNotCompletelyPositive) {
  const CPReport r = choi_cp_check(transpose_map(2));
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.min_eigenvalue, -1.0, 1e-12);
}

TEST(Choi, PartialTraceIsCompletelyPositive) {
  const CPReport r = choi_cp_check(partial_trace_map());
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.unital_defect, 0.0, 1e-15);
  const LinearMapTable t = LinearMapTable::from_map(partial_trace_map());
  EXPECT_TRUE(choi_cp_check(t).pass);
}

TEST(Choi, ComponentsAgreeWithFullMatrix) {
  // Compression by a fixed isometry between direct sums: the Choi matrix
  // splits, and its spectrum must match the dense assembly.
  std::mt19937_64 rng(2);
  const Mat V = random_unitary(3, rng).leftCols(2);
  const LinearMap m{FlatShape{{3, 1}}, FlatShape{{2}}, [V](const FlatElement& x) {
                      return FlatElement{V.adjoint() * x[0] * V + x[1](0, 0) * Mat::Identity(2, 2)};
                    }};
  Mat dense = Mat::Zero(3 * 2, 3 * 2);
  for (int p = 0; p < 3; ++p) {
    for (int q = 0; q < 3; ++q) {
      FlatElement e{Mat::Zero(3, 3), Mat::Zero(1, 1)};
      e[0](p, q) = 1.0;
      dense.block(2 * p, 2 * q, 2, 2) = m(e)[0];
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(dense);
  const double expect = std::min(es.eigenvalues().minCoeff(), 1.0);
  const CPReport r = choi_cp_check(m);
  EXPECT_NEAR(r.min_eigenvalue, expect, 1e-12);
  EXPECT_TRUE(r.pass);
}

TEST(Choi, CapThrows) {
  EXPECT_THROW(choi_cp_check(identity_map(FlatShape{{10}}), {}, 64), ChoiCapExceeded);
  const CPReport r = certify_cp(identity_map(FlatShape{{10}}), {}, 64, 20, 1);
  EXPECT_EQ(r.method, CPReport::Method::probe);
  EXPECT_TRUE(r.pass);
}

TEST(Probe, IdentityAndTranspose) {
  EXPECT_TRUE(positivity_probe(identity_map(FlatShape{{3}}), 2, 50, 1).pass);
  const CPReport t = positivity_probe(transpose_map(2), 2, 10, 1);
  EXPECT_FALSE(t.pass);
  EXPECT_LT(t.min_eigenvalue, -1e-3);
  // transpose is positive, so k = 1 cannot see the violation
  EXPECT_TRUE(positivity_probe(transpose_map(2), 1, 50, 1).pass);
}

TEST(LinearMapTable, ReproducesTheMap) {
  const LinearMap m = partial_trace_map();
  const LinearMapTable t = LinearMapTable::from_map(m);
  std::mt19937_64 rng(4);
  const FlatElement x{random_gaussian(4, 4, rng)};
  EXPECT_LT(flat_norm(flat_sub(t.apply(x), m(x))), 1e-14);
  EXPECT_TRUE(t.image(0, 0, 2).empty());
  EXPECT_FALSE(t.image(0, 0, 1).empty());
}
