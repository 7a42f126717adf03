#pragma once

// Finite-dimensional C*-algebras A = M_{d_1}(C) + ... + M_{d_B}(C): elements,
// automorphisms, norms and positivity.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace pimsner {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Tolerances {
  double eq_tol = 1e-9;
  double psd_tol = 1e-8;
  double norm_rel_tol = 1e-10;

  void validate() const;
};

class AlgebraSpec {
 public:
  explicit AlgebraSpec(std::vector<int> block_dims);

  const std::vector<int>& block_dims() const { return dims_; }
  int num_blocks() const { return static_cast<int>(dims_.size()); }
  int dim(int s) const { return dims_[static_cast<size_t>(s)]; }
  int total_dim() const { return total_; }
  // Complex dimension of A as a vector space.
  int linear_dim() const { return linear_; }

  bool operator==(const AlgebraSpec& other) const { return dims_ == other.dims_; }

 private:
  std::vector<int> dims_;
  int total_ = 0;
  int linear_ = 0;
};

AlgebraSpec make_algebra(std::vector<int> block_dims);

class AElement {
 public:
  AElement(AlgebraSpec spec, std::vector<Mat> blocks);

  static AElement zero(const AlgebraSpec& spec);
  static AElement unit(const AlgebraSpec& spec);
  // Matrix unit number `index` in the order (block, row, col), row-major.
  static AElement basis(const AlgebraSpec& spec, int index);
  // Diagonal scalars: one entry per block dimension, concatenated.
  static AElement diagonal(const AlgebraSpec& spec, const std::vector<cplx>& diag);

  const AlgebraSpec& spec() const { return spec_; }
  const std::vector<Mat>& blocks() const { return blocks_; }
  const Mat& block(int s) const { return blocks_[static_cast<size_t>(s)]; }
  Mat& block(int s) { return blocks_[static_cast<size_t>(s)]; }

  AElement adjoint() const;
  AElement& operator+=(const AElement& y);
  AElement& operator-=(const AElement& y);
  AElement& operator*=(cplx c);

  double norm() const;
  // Smallest eigenvalue of the Hermitian part, over all blocks.
  double min_eigenvalue() const;
  double hermitian_defect() const;
  bool is_positive(const Tolerances& tol) const;
  double max_abs_diff(const AElement& y) const;

 private:
  AlgebraSpec spec_;
  std::vector<Mat> blocks_;
};

AElement operator+(AElement x, const AElement& y);
AElement operator-(AElement x, const AElement& y);
AElement operator*(const AElement& x, const AElement& y);
AElement operator*(cplx c, AElement x);

enum class ArithOp { add, mul, adjoint, scale };

// Dispatch form of the element operations; `y` is ignored for adjoint and
// scale, `c` only used by scale.
AElement a_arithmetic(const AElement& x, const AElement& y, ArithOp op, cplx c = 1.0);

struct NormPos {
  double norm = 0.0;
  bool is_positive = false;
};

NormPos a_norm_pos(const AElement& x, const Tolerances& tol = {});

// Largest singular value. Exact Hermitian eigensolve up to side 512, power
// iteration on X^H X from the normalised all-ones vector beyond that.
double operator_norm(const Mat& m, double rel_tol = 1e-10);
double min_hermitian_eigenvalue(const Mat& m);
double hermitian_defect(const Mat& m);
double max_abs(const Mat& m);

enum class Direction { forward, inverse };

// a -> (V_s^* a_{perm^{-1}(s)} V_s)_s. Block t of the input lands in block
// perm[t] of the output.
class Automorphism {
 public:
  Automorphism(AlgebraSpec spec, std::vector<int> perm, std::vector<Mat> unitaries,
               const Tolerances& tol = {});

  static Automorphism identity(const AlgebraSpec& spec);
  static Automorphism permutation(const AlgebraSpec& spec, std::vector<int> perm);
  static Automorphism inner(const AlgebraSpec& spec, std::vector<Mat> unitaries);

  const AlgebraSpec& spec() const { return spec_; }
  const std::vector<int>& perm() const { return perm_; }
  const Mat& unitary(int s) const { return unitaries_[static_cast<size_t>(s)]; }
  bool is_identity() const { return identity_; }

  AElement apply(const AElement& x, Direction dir = Direction::forward) const;
  Automorphism inverse() const;

 private:
  AlgebraSpec spec_;
  std::vector<int> perm_;
  std::vector<int> inv_perm_;
  std::vector<Mat> unitaries_;
  bool identity_ = false;
};

AElement aut_apply(const Automorphism& alpha, const AElement& x, Direction dir);

enum class SampleKind { element, hermitian, unitary, positive };

// Complex Gaussian entries, standard normal real and imaginary parts.
Mat random_gaussian(int rows, int cols, std::mt19937_64& rng);
// Haar-distributed unitary (QR with phase correction).
Mat random_unitary(int d, std::mt19937_64& rng);

AElement sample(const AlgebraSpec& spec, SampleKind kind, std::uint64_t seed);

}  // namespace pimsner
