#pragma once

// Matrices over A (adjointable maps between free modules A^q -> A^p), module
// inner products, rank-one operators and complete-positivity certification.
//
// An AMatrix is stored flattened: for every algebra block s one complex matrix
// of shape (rows*d_s) x (cols*d_s), with entry (i,j) of the A-matrix occupying
// the d_s x d_s sub-block at (i*d_s, j*d_s). This is the faithful
// *-homomorphism M_p(A) -> (+)_s M_{p d_s}(C); norm and positivity of an
// AMatrix are defined through it.

#include "pimsner/star_core.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace pimsner {

class AMatrix {
 public:
  AMatrix(AlgebraSpec spec, int rows, int cols);
  AMatrix(AlgebraSpec spec, int rows, int cols, std::vector<Mat> flat_blocks);

  static AMatrix zero(const AlgebraSpec& spec, int rows, int cols);
  static AMatrix identity(const AlgebraSpec& spec, int n);
  static AMatrix from_element(const AElement& a);
  // Row-major list of rows*cols entries.
  static AMatrix from_entries(const AlgebraSpec& spec, int rows, int cols,
                              const std::vector<AElement>& entries);
  // I_m (x) x, i.e. block-diagonal with m copies of x.
  static AMatrix kron_identity(int m, const AMatrix& x);

  const AlgebraSpec& spec() const { return spec_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const std::vector<Mat>& blocks() const { return blocks_; }
  const Mat& block(int s) const { return blocks_[static_cast<size_t>(s)]; }
  Mat& block(int s) { return blocks_[static_cast<size_t>(s)]; }

  AElement entry(int i, int j) const;
  void set_entry(int i, int j, const AElement& a);
  // Sub-matrix of A-entries [i0, i0+rows) x [j0, j0+cols).
  AMatrix sub(int i0, int j0, int rows, int cols) const;
  void set_sub(int i0, int j0, const AMatrix& x);

  AMatrix adjoint() const;
  AMatrix& operator+=(const AMatrix& y);
  AMatrix& operator-=(const AMatrix& y);
  AMatrix& operator*=(cplx c);

  // Direct sum of the flattened blocks.
  Mat flatten() const;
  double norm(double rel_tol = 1e-10) const;
  double min_eigenvalue() const;
  double hermitian_defect() const;
  bool is_positive(const Tolerances& tol) const;
  double max_abs() const;
  double max_abs_diff(const AMatrix& y) const;
  bool is_zero() const;
  // Real part of the Frobenius inner product sum_s tr(x_s^H y_s).
  cplx frobenius_dot(const AMatrix& y) const;

 private:
  void check_compatible(const AMatrix& y, const char* what) const;

  AlgebraSpec spec_;
  int rows_;
  int cols_;
  std::vector<Mat> blocks_;
};

AMatrix operator+(AMatrix x, const AMatrix& y);
AMatrix operator-(AMatrix x, const AMatrix& y);
AMatrix operator*(const AMatrix& x, const AMatrix& y);
AMatrix operator*(cplx c, AMatrix x);

AMatrix amat_arithmetic(const AMatrix& x, const AMatrix& y, ArithOp op, cplx c = 1.0);

inline Mat flatten(const AMatrix& x) { return x.flatten(); }

// <xi, eta> = sum_i xi_i^* eta_i for column vectors in A^p.
AElement inner(const AMatrix& xi, const AMatrix& eta);
// e_{mu,nu}(xi) = mu <nu, xi>; entries mu_i nu_l^*.
AMatrix rank_one(const AMatrix& mu, const AMatrix& nu);
// Module norm ||<xi,xi>||^{1/2}, equal to the flattened operator norm.
double module_norm(const AMatrix& xi);

AMatrix sample_amatrix(const AlgebraSpec& spec, int rows, int cols, std::uint64_t seed);
// Column vector in A^p with module norm 1.
AMatrix sample_unit_vector(const AlgebraSpec& spec, int rows, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Linear maps between finite direct sums of full matrix algebras.

using FlatElement = std::vector<Mat>;

struct FlatShape {
  std::vector<int> sides;

  int summands() const { return static_cast<int>(sides.size()); }
  bool operator==(const FlatShape& other) const { return sides == other.sides; }
};

// Shape of M_p(A) after flattening.
FlatShape flat_shape(const AlgebraSpec& spec, int p);
FlatElement flat_zero(const FlatShape& shape);
FlatElement flat_identity(const FlatShape& shape);
// Largest operator norm over the summands.
double flat_norm(const FlatElement& x);
FlatElement flat_sub(const FlatElement& x, const FlatElement& y);

struct LinearMap {
  FlatShape domain;
  FlatShape codomain;
  std::function<FlatElement(const FlatElement&)> fn;

  FlatElement operator()(const FlatElement& x) const { return fn(x); }
};

LinearMap compose(const LinearMap& outer, const LinearMap& inner);

// Finite table of basis images: for every domain summand s and every matrix
// unit E_pq of that summand, the image as a codomain element. Images that are
// exactly zero are stored empty.
class LinearMapTable {
 public:
  static LinearMapTable from_map(const LinearMap& map);

  const FlatShape& domain() const { return domain_; }
  const FlatShape& codomain() const { return codomain_; }
  // Empty vector means the zero element.
  const FlatElement& image(int summand, int p, int q) const;

  FlatElement apply(const FlatElement& x) const;
  LinearMap as_map() const;

 private:
  FlatShape domain_;
  FlatShape codomain_;
  std::vector<std::vector<FlatElement>> images_;
};

struct CPReport {
  enum class Method { choi, probe };
  Method method = Method::choi;
  // Choi: smallest eigenvalue of the Choi matrix, less the Frobenius mass of
  // entries dropped as numerical zeros. Probe: worst smallest eigenvalue seen.
  double min_eigenvalue = 0.0;
  double hermitian_defect = 0.0;
  double unital_defect = 0.0;
  double norm_bound = 0.0;
  int choi_side = 0;
  int trials = 0;
  int probe_k = 0;
  bool pass = false;
};

const char* method_name(CPReport::Method m);

class ChoiCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kDefaultChoiCap = 4096;

// Largest domain-side times codomain-side over all summand pairs.
int choi_side(const FlatShape& domain, const FlatShape& codomain);

// Assembles the Choi matrix sum_pq E_pq (x) map(E_pq) for every pair of
// domain/codomain summands, splits it into its connected components and checks
// the smallest eigenvalue of each. Throws ChoiCapExceeded when a summand pair
// exceeds `choi_cap`; use positivity_probe then.
CPReport choi_cp_check(const LinearMap& map, const Tolerances& tol = {},
                       int choi_cap = kDefaultChoiCap);
CPReport choi_cp_check(const LinearMapTable& table, const Tolerances& tol = {},
                       int choi_cap = kDefaultChoiCap);

// Necessary condition only: applies map (x) id_{M_k} to `trials` seeded
// rank-one positive elements (trial t uses seed + t) and records the worst
// smallest eigenvalue.
CPReport positivity_probe(const LinearMap& map, int k, int trials, std::uint64_t seed,
                          const Tolerances& tol = {});
CPReport positivity_probe(const LinearMapTable& table, int k, int trials, std::uint64_t seed,
                          const Tolerances& tol = {});

// Choi when it fits under the cap, otherwise a probe with k = 2.
CPReport certify_cp(const LinearMap& map, const Tolerances& tol, int choi_cap, int probe_trials,
                    std::uint64_t seed);

}  // namespace pimsner
