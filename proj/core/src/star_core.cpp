#include "pimsner/star_core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pimsner {

void Tolerances::validate() const {
  if (!(eq_tol > 0.0) || !(psd_tol > 0.0) || !(norm_rel_tol > 0.0)) {
    throw ConfigError("tolerances must be strictly positive");
  }
}

AlgebraSpec::AlgebraSpec(std::vector<int> block_dims) : dims_(std::move(block_dims)) {
  if (dims_.empty()) throw ConfigError("algebra needs at least one block");
  for (int d : dims_) {
    if (d < 1) throw ConfigError("algebra block dimension must be >= 1, got " + std::to_string(d));
    total_ += d;
    linear_ += d * d;
  }
}

AlgebraSpec make_algebra(std::vector<int> block_dims) { return AlgebraSpec(std::move(block_dims)); }

AElement::AElement(AlgebraSpec spec, std::vector<Mat> blocks)
    : spec_(std::move(spec)), blocks_(std::move(blocks)) {
  if (static_cast<int>(blocks_.size()) != spec_.num_blocks()) {
    throw ShapeError("element has " + std::to_string(blocks_.size()) + " blocks, algebra has " +
                     std::to_string(spec_.num_blocks()));
  }
  for (int s = 0; s < spec_.num_blocks(); ++s) {
    const auto& b = blocks_[static_cast<size_t>(s)];
    if (b.rows() != spec_.dim(s) || b.cols() != spec_.dim(s)) {
      throw ShapeError("block " + std::to_string(s) + " has wrong shape");
    }
  }
}

AElement AElement::zero(const AlgebraSpec& spec) {
  std::vector<Mat> blocks;
  for (int d : spec.block_dims()) blocks.push_back(Mat::Zero(d, d));
  return AElement(spec, std::move(blocks));
}

AElement AElement::unit(const AlgebraSpec& spec) {
  std::vector<Mat> blocks;
  for (int d : spec.block_dims()) blocks.push_back(Mat::Identity(d, d));
  return AElement(spec, std::move(blocks));
}

AElement AElement::basis(const AlgebraSpec& spec, int index) {
  if (index < 0 || index >= spec.linear_dim()) throw ShapeError("basis index out of range");
  AElement e = zero(spec);
  for (int s = 0; s < spec.num_blocks(); ++s) {
    const int d = spec.dim(s);
    if (index < d * d) {
      e.block(s)(index / d, index % d) = 1.0;
      return e;
    }
    index -= d * d;
  }
  return e;
}

AElement AElement::diagonal(const AlgebraSpec& spec, const std::vector<cplx>& diag) {
  if (static_cast<int>(diag.size()) != spec.total_dim()) throw ShapeError("diagonal length mismatch");
  AElement e = zero(spec);
  size_t pos = 0;
  for (int s = 0; s < spec.num_blocks(); ++s) {
    for (int i = 0; i < spec.dim(s); ++i) e.block(s)(i, i) = diag[pos++];
  }
  return e;
}

AElement AElement::adjoint() const {
  std::vector<Mat> out;
  out.reserve(blocks_.size());
  for (const auto& b : blocks_) out.push_back(b.adjoint());
  return AElement(spec_, std::move(out));
}

AElement& AElement::operator+=(const AElement& y) {
  if (!(spec_ == y.spec_)) throw ShapeError("algebra mismatch in addition");
  for (size_t s = 0; s < blocks_.size(); ++s) blocks_[s] += y.blocks_[s];
  return *this;
}

AElement& AElement::operator-=(const AElement& y) {
  if (!(spec_ == y.spec_)) throw ShapeError("algebra mismatch in subtraction");
  for (size_t s = 0; s < blocks_.size(); ++s) blocks_[s] -= y.blocks_[s];
  return *this;
}

AElement& AElement::operator*=(cplx c) {
  for (auto& b : blocks_) b *= c;
  return *this;
}

double AElement::norm() const {
  double n = 0.0;
  for (const auto& b : blocks_) n = std::max(n, operator_norm(b));
  return n;
}

double AElement::min_eigenvalue() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& b : blocks_) m = std::min(m, min_hermitian_eigenvalue(b));
  return m;
}

double AElement::hermitian_defect() const {
  double m = 0.0;
  for (const auto& b : blocks_) m = std::max(m, pimsner::hermitian_defect(b));
  return m;
}

bool AElement::is_positive(const Tolerances& tol) const {
  return hermitian_defect() <= tol.eq_tol && min_eigenvalue() >= -tol.psd_tol;
}

double AElement::max_abs_diff(const AElement& y) const {
  if (!(spec_ == y.spec_)) throw ShapeError("algebra mismatch in comparison");
  double m = 0.0;
  for (size_t s = 0; s < blocks_.size(); ++s) m = std::max(m, max_abs(blocks_[s] - y.blocks_[s]));
  return m;
}

AElement operator+(AElement x, const AElement& y) { return x += y; }
AElement operator-(AElement x, const AElement& y) { return x -= y; }

AElement operator*(const AElement& x, const AElement& y) {
  if (!(x.spec() == y.spec())) throw ShapeError("algebra mismatch in product");
  std::vector<Mat> out;
  out.reserve(x.blocks().size());
  for (size_t s = 0; s < x.blocks().size(); ++s) out.push_back(x.blocks()[s] * y.blocks()[s]);
  return AElement(x.spec(), std::move(out));
}

AElement operator*(cplx c, AElement x) { return x *= c; }

AElement a_arithmetic(const AElement& x, const AElement& y, ArithOp op, cplx c) {
  switch (op) {
    case ArithOp::add: return x + y;
    case ArithOp::mul: return x * y;
    case ArithOp::adjoint: return x.adjoint();
    case ArithOp::scale: return c * x;
  }
  throw std::logic_error("unknown arithmetic op");
}

NormPos a_norm_pos(const AElement& x, const Tolerances& tol) {
  return {x.norm(), x.is_positive(tol)};
}

double max_abs(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

double hermitian_defect(const Mat& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return max_abs(m - m.adjoint());
}

double min_hermitian_eigenvalue(const Mat& m) {
  if (m.size() == 0) return 0.0;
  const Mat h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

namespace {

constexpr Eigen::Index kExactNormSide = 512;
constexpr int kPowerIterCap = 10000;

double power_iteration_norm(const Mat& m, double rel_tol) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(m.cols()) / std::sqrt(static_cast<double>(m.cols()));
  double estimate = 0.0;
  for (int it = 0; it < kPowerIterCap; ++it) {
    Eigen::VectorXcd w = m * v;
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    Eigen::VectorXcd u = m.adjoint() * w;
    const double un = u.norm();
    if (un == 0.0) return next;
    v = u / un;
    if (std::abs(next - estimate) <= rel_tol * next) return next;
    estimate = next;
  }
  return estimate;
}

}  // namespace

double operator_norm(const Mat& m, double rel_tol) {
  if (m.size() == 0) return 0.0;
  const Eigen::Index side = std::min(m.rows(), m.cols());
  if (side <= kExactNormSide) {
    const Mat g = (m.rows() >= m.cols()) ? Mat(m.adjoint() * m) : Mat(m * m.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  }
  return power_iteration_norm(m, rel_tol);
}

Automorphism::Automorphism(AlgebraSpec spec, std::vector<int> perm, std::vector<Mat> unitaries,
                           const Tolerances& tol)
    : spec_(std::move(spec)), perm_(std::move(perm)), unitaries_(std::move(unitaries)) {
  const int b = spec_.num_blocks();
  if (static_cast<int>(perm_.size()) != b || static_cast<int>(unitaries_.size()) != b) {
    throw ConfigError("automorphism needs one permutation entry and one unitary per block");
  }
  inv_perm_.assign(static_cast<size_t>(b), -1);
  for (int s = 0; s < b; ++s) {
    const int t = perm_[static_cast<size_t>(s)];
    if (t < 0 || t >= b || inv_perm_[static_cast<size_t>(t)] != -1) {
      throw ConfigError("automorphism permutation is not a bijection");
    }
    if (spec_.dim(t) != spec_.dim(s)) {
      throw ConfigError("automorphism permutation must preserve block dimensions");
    }
    inv_perm_[static_cast<size_t>(t)] = s;
  }
  identity_ = true;
  for (int s = 0; s < b; ++s) {
    const Mat& v = unitaries_[static_cast<size_t>(s)];
    const int d = spec_.dim(s);
    if (v.rows() != d || v.cols() != d) throw ConfigError("automorphism unitary has wrong shape");
    if (max_abs(v.adjoint() * v - Mat::Identity(d, d)) > tol.eq_tol) {
      throw ConfigError("automorphism block " + std::to_string(s) + " is not unitary");
    }
    if (perm_[static_cast<size_t>(s)] != s || !v.isIdentity(0.0)) identity_ = false;
  }
}

Automorphism Automorphism::identity(const AlgebraSpec& spec) {
  std::vector<int> perm(static_cast<size_t>(spec.num_blocks()));
  std::iota(perm.begin(), perm.end(), 0);
  return permutation(spec, std::move(perm));
}

Automorphism Automorphism::permutation(const AlgebraSpec& spec, std::vector<int> perm) {
  std::vector<Mat> us;
  for (int d : spec.block_dims()) us.push_back(Mat::Identity(d, d));
  return Automorphism(spec, std::move(perm), std::move(us));
}

Automorphism Automorphism::inner(const AlgebraSpec& spec, std::vector<Mat> unitaries) {
  std::vector<int> perm(static_cast<size_t>(spec.num_blocks()));
  std::iota(perm.begin(), perm.end(), 0);
  return Automorphism(spec, std::move(perm), std::move(unitaries));
}

AElement Automorphism::apply(const AElement& x, Direction dir) const {
  if (!(x.spec() == spec_)) throw ShapeError("automorphism applied to element of another algebra");
  if (identity_) return x;
  std::vector<Mat> out(static_cast<size_t>(spec_.num_blocks()));
  for (int s = 0; s < spec_.num_blocks(); ++s) {
    const auto su = static_cast<size_t>(s);
    if (dir == Direction::forward) {
      const Mat& v = unitaries_[su];
      out[su] = v.adjoint() * x.block(inv_perm_[su]) * v;
    } else {
      const int t = perm_[su];
      const Mat& v = unitaries_[static_cast<size_t>(t)];
      out[su] = v * x.block(t) * v.adjoint();
    }
  }
  return AElement(spec_, std::move(out));
}

Automorphism Automorphism::inverse() const {
  std::vector<Mat> us(unitaries_.size());
  for (int t = 0; t < spec_.num_blocks(); ++t) {
    const auto tu = static_cast<size_t>(t);
    us[tu] = unitaries_[static_cast<size_t>(perm_[tu])].adjoint();
  }
  return Automorphism(spec_, inv_perm_, std::move(us));
}

AElement aut_apply(const Automorphism& alpha, const AElement& x, Direction dir) {
  return alpha.apply(x, dir);
}

Mat random_gaussian(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(i, j) = cplx(re, im);
    }
  }
  return m;
}

Mat random_unitary(int d, std::mt19937_64& rng) {
  const Mat g = random_gaussian(d, d, rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    const cplx rjj = r(j, j);
    const double a = std::abs(rjj);
    if (a > 0.0) q.col(j) *= rjj / a;
  }
  return q;
}

AElement sample(const AlgebraSpec& spec, SampleKind kind, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Mat> blocks;
  for (int d : spec.block_dims()) {
    switch (kind) {
      case SampleKind::element:
        blocks.push_back(random_gaussian(d, d, rng));
        break;
      case SampleKind::hermitian: {
        const Mat g = random_gaussian(d, d, rng);
        blocks.push_back(0.5 * (g + g.adjoint()));
        break;
      }
      case SampleKind::unitary:
        blocks.push_back(random_unitary(d, rng));
        break;
      case SampleKind::positive: {
        const Mat g = random_gaussian(d, d, rng);
        blocks.push_back(g.adjoint() * g);
        break;
      }
    }
  }
  return AElement(spec, std::move(blocks));
}

}  // namespace pimsner
