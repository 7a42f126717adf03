#include "pimsner/star_core.hpp"

#include <gtest/gtest.h>

using namespace pimsner;

namespace {

Mat m2(cplx a, cplx b, cplx c, cplx d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

AElement scalars(const AlgebraSpec& spec, std::vector<cplx> v) { return AElement::diagonal(spec, v); }

}  // namespace

TEST(AlgebraSpec, Dimensions) {
  EXPECT_EQ(AlgebraSpec({2}).total_dim(), 2);
  EXPECT_EQ(AlgebraSpec({1, 1, 1}).total_dim(), 3);
  EXPECT_EQ(AlgebraSpec({1, 1, 1}).linear_dim(), 3);
  const AlgebraSpec s({2, 3});
  EXPECT_EQ(s.total_dim(), 5);
  EXPECT_EQ(s.linear_dim(), 13);
  EXPECT_EQ(s.num_blocks(), 2);
}

TEST(AlgebraSpec, RejectsBadDims) {
  EXPECT_THROW(AlgebraSpec({}), ConfigError);
  EXPECT_THROW(AlgebraSpec({0}), ConfigError);
  EXPECT_THROW(AlgebraSpec({2, -1}), ConfigError);
}

TEST(AElement, CommutativeArithmetic) {
  const AlgebraSpec c2({1, 1});
  const AElement p = scalars(c2, {1.0, 2.0}) * scalars(c2, {3.0, 4.0});
  EXPECT_LT(p.max_abs_diff(scalars(c2, {3.0, 8.0})), 1e-15);
  const AElement s = a_arithmetic(scalars(c2, {1.0, 2.0}), scalars(c2, {3.0, 4.0}), ArithOp::add);
  EXPECT_LT(s.max_abs_diff(scalars(c2, {4.0, 6.0})), 1e-15);
}

TEST(AElement, AdjointConjugates) {
  const AlgebraSpec c1({1});
  const AElement i = scalars(c1, {cplx(0, 1)});
  EXPECT_LT(i.adjoint().max_abs_diff(scalars(c1, {cplx(0, -1)})), 1e-15);
  EXPECT_LT(a_arithmetic(i, i, ArithOp::adjoint).max_abs_diff(scalars(c1, {cplx(0, -1)})), 1e-15);
}

TEST(AElement, ShapeMismatchThrows) {
  EXPECT_THROW(AElement(AlgebraSpec({2}), {Mat::Zero(3, 3)}), ShapeError);
  EXPECT_THROW(AElement(AlgebraSpec({1, 1}), {Mat::Zero(1, 1)}), ShapeError);
  EXPECT_THROW(scalars(AlgebraSpec({1}), {1.0}) * scalars(AlgebraSpec({1, 1}), {1.0, 1.0}), ShapeError);
}

TEST(AElement, NormAndPositivity) {
  const AlgebraSpec c2({1, 1});
  const NormPos np = a_norm_pos(scalars(c2, {3.0, -4.0}));
  EXPECT_DOUBLE_EQ(np.norm, 4.0);
  EXPECT_FALSE(np.is_positive);

  const AlgebraSpec m2spec({2});
  const AElement shift(m2spec, {m2(0, 1, 0, 0)});
  EXPECT_NEAR(shift.norm(), 1.0, 1e-12);
  EXPECT_FALSE(shift.is_positive({}));
  EXPECT_NEAR(shift.hermitian_defect(), 1.0, 1e-15);
}

TEST(AElement, NormMatchesSingularValues) {
  const AlgebraSpec spec({3, 2});
  const AElement x = sample(spec, SampleKind::element, 4);
  double expect = 0.0;
  for (const Mat& b : x.blocks()) {
    Eigen::JacobiSVD<Mat> svd(b);
    expect = std::max(expect, svd.singularValues()(0));
  }
  EXPECT_NEAR(x.norm(), expect, 1e-12 * expect);
}

TEST(OperatorNorm, PowerIterationAgreesWithSvd) {
  std::mt19937_64 rng(11);
  const Mat big = random_gaussian(600, 600, rng);
  Eigen::BDCSVD<Mat> svd(big);
  EXPECT_NEAR(operator_norm(big, 1e-12), svd.singularValues()(0), 1e-6 * svd.singularValues()(0));
}

TEST(Automorphism, SwapOnC2) {
  const AlgebraSpec c2({1, 1});
  const Automorphism swap = Automorphism::permutation(c2, {1, 0});
  const AElement y = swap.apply(scalars(c2, {2.0, 5.0}));
  EXPECT_LT(y.max_abs_diff(scalars(c2, {5.0, 2.0})), 1e-15);
}

TEST(Automorphism, AdjointActionOfFlip) {
  const AlgebraSpec spec({2});
  const Automorphism ad = Automorphism::inner(spec, {m2(0, 1, 1, 0)});
  const AElement y = ad.apply(AElement(spec, {m2(1, 2, 3, 4)}));
  EXPECT_LT(y.max_abs_diff(AElement(spec, {m2(4, 3, 2, 1)})), 1e-15);
}

TEST(Automorphism, InverseRoundTripAndHomomorphism) {
  const AlgebraSpec spec({2, 2, 1});
  std::mt19937_64 rng(3);
  const Automorphism a(spec, {1, 0, 2}, {random_unitary(2, rng), random_unitary(2, rng), random_unitary(1, rng)});
  const AElement x = sample(spec, SampleKind::element, 1);
  const AElement y = sample(spec, SampleKind::element, 2);
  EXPECT_LT(a.apply(a.apply(x), Direction::inverse).max_abs_diff(x), 1e-13);
  EXPECT_LT(a.inverse().apply(a.apply(x)).max_abs_diff(x), 1e-13);
  EXPECT_LT(a.apply(x * y).max_abs_diff(a.apply(x) * a.apply(y)), 1e-13);
  EXPECT_LT(a.apply(x.adjoint()).max_abs_diff(a.apply(x).adjoint()), 1e-13);
  // block 0 lands in block 1
  EXPECT_NEAR((a.apply(x).block(1) - a.unitary(1).adjoint() * x.block(0) * a.unitary(1)).norm(), 0.0, 1e-13);
}

TEST(Automorphism, RejectsInvalidData) {
  const AlgebraSpec spec({2, 1});
  EXPECT_THROW(Automorphism::permutation(spec, {1, 0}), ConfigError);
  EXPECT_THROW(Automorphism::permutation(spec, {0, 0}), ConfigError);
  EXPECT_THROW(Automorphism::inner(spec, {2.0 * Mat::Identity(2, 2), Mat::Identity(1, 1)}), ConfigError);
}

TEST(Sample, Kinds) {
  const AlgebraSpec c2({1, 1});
  const AElement u = sample(c2, SampleKind::unitary, 17);
  for (const Mat& b : u.blocks()) EXPECT_NEAR(std::abs(b(0, 0)), 1.0, 1e-14);

  const AlgebraSpec spec({2});
  EXPECT_LT(sample(spec, SampleKind::element, 9).max_abs_diff(sample(spec, SampleKind::element, 9)), 0.0 + 1e-300);
  EXPECT_GT(sample(spec, SampleKind::element, 9).max_abs_diff(sample(spec, SampleKind::element, 10)), 0.0);
  EXPECT_TRUE(sample(spec, SampleKind::positive, 4).is_positive({}));
  EXPECT_LT(sample(spec, SampleKind::hermitian, 4).hermitian_defect(), 1e-15);
}
