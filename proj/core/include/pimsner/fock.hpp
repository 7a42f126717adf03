#pragma once

// Truncated Fock modules, block-banded operators on them, the finite-section
// maps V_N = Psi_N o P_N(.)P_N and W_N (two-sided, n = 1), and the counting
// oracle for their Schur coefficients.

#include "pimsner/correspondence.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace pimsner {

struct FockWindow {
  int lo = 0;
  int hi = 0;
  bool two_sided = false;

  static FockWindow one_sided(int hi) { return FockWindow{0, hi, false}; }
  static FockWindow bilateral(int m) { return FockWindow{-m, m, true}; }
  // hi = 10 (n = 1), 6 (n = 2), 4 (n >= 3).
  static int default_hi(int n);

  bool contains(int d) const { return d >= lo && d <= hi; }
  int size() const { return hi - lo + 1; }
  void validate(const Correspondence& corr) const;
  bool operator==(const FockWindow& o) const { return lo == o.lo && hi == o.hi && two_sided == o.two_sided; }
};

using BlockKey = std::pair<int, int>;

// Operator on the window, stored as blocks (i, j) : degree j -> degree i.
// `level` shifts every degree d to module rank n^{d + level}; level K > 0 is
// used for Fock modules over B = M_{n^K}(A).
class GradedOperator {
 public:
  GradedOperator(CorrespondencePtr corr, FockWindow window, int level = 0);

  static GradedOperator identity(CorrespondencePtr corr, FockWindow window, int level = 0);
  // Identity on degrees [a, b], zero elsewhere.
  static GradedOperator projection(CorrespondencePtr corr, FockWindow window, int a, int b, int level = 0);
  static GradedOperator from_amatrix(CorrespondencePtr corr, FockWindow window, int level, const AMatrix& x);

  const CorrespondencePtr& corr() const { return corr_; }
  const FockWindow& window() const { return window_; }
  int level() const { return level_; }
  int rank(int degree) const;
  // Sum of ranks over the window and the offset of each degree in that sum.
  int total_rank() const;
  int offset(int degree) const;

  const std::map<BlockKey, AMatrix>& blocks() const { return blocks_; }
  bool has_block(int i, int j) const { return blocks_.count({i, j}) > 0; }
  // Zero matrix of the right shape when absent.
  AMatrix block(int i, int j) const;
  void set_block(int i, int j, AMatrix x);
  void add_block(int i, int j, const AMatrix& x);
  void erase_block(int i, int j) { blocks_.erase({i, j}); }
  bool empty() const { return blocks_.empty(); }

  GradedOperator adjoint() const;
  GradedOperator& operator+=(const GradedOperator& y);
  GradedOperator& operator-=(const GradedOperator& y);
  GradedOperator& operator*=(cplx c);

  AMatrix to_amatrix() const;
  // Operator norm. A single band of blocks is a direct sum, so its norm is the
  // largest block norm; otherwise the flattened operator is used.
  double norm() const;
  // Largest entry modulus over the union of supports.
  double max_block_diff(const GradedOperator& y) const;
  double max_abs() const;
  // Distinct values of j - i among stored blocks.
  std::vector<int> band_offsets() const;

 private:
  void check_compatible(const GradedOperator& y, const char* what) const;

  CorrespondencePtr corr_;
  FockWindow window_;
  int level_;
  std::map<BlockKey, AMatrix> blocks_;
};

GradedOperator operator+(GradedOperator x, const GradedOperator& y);
GradedOperator operator-(GradedOperator x, const GradedOperator& y);
GradedOperator operator*(const GradedOperator& x, const GradedOperator& y);
GradedOperator operator*(cplx c, GradedOperator x);

// Blocks (r + k, s + k) = e (x) 1_{E^k} for every k representable in the
// window: k >= 0 one-sided, any k two-sided. e is rank(r) x rank(s) at `level`.
GradedOperator band_op(CorrespondencePtr corr, const AMatrix& e, int r, int s, FockWindow window, int level = 0);
// Creation operator of mu in E^r (n^r x 1): blocks (r + k, k).
GradedOperator creation_op(CorrespondencePtr corr, const AMatrix& mu, int r, FockWindow window);
// t_mu t_nu^* (s_mu s_nu^* on a two-sided window).
GradedOperator toeplitz_op(CorrespondencePtr corr, const AMatrix& mu, int r, const AMatrix& nu, int s,
                           FockWindow window);
// P_N x P_N with P_N the projection onto degrees [0, N].
GradedOperator compress(const GradedOperator& x, int N);
// (N+1)^{-1} sum_k x (x) 1_{E^k}; k >= 0 one-sided, k in Z two-sided.
GradedOperator psi_amplify(const GradedOperator& x, int N);

// Flattened maps between the window and the section [0, N]. The section is
// M_D(A) with D = sum_{d=0}^{N} rank(d).
LinearMap compress_map(CorrespondencePtr corr, FockWindow window, int N, int level = 0);
LinearMap psi_map(CorrespondencePtr corr, FockWindow window, int N, int level = 0);

// ---------------------------------------------------------------------------

struct Rational {
  long long num = 0;
  long long den = 1;

  static Rational make(long long num, long long den);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
};

enum class Sided { one, two };
const char* sided_name(Sided s);

// Counting oracle for the coefficient of e (x) 1_{E^l} in the image of the
// band (r, s) under the finite-section map of order N.
Rational schur_oracle(int N, int r, int s, int l, Sided sided);
// min(N - r, N - s) / (N + 1) for r, s <= N, else 0.
Rational printed_coefficient(int N, int r, int s);

struct SchurRow {
  int N = 0;
  int r = 0;
  int s = 0;
  int l = 0;
  Rational expected;
  double measured = 0.0;
  double abs_err = 0.0;
  Sided sided = Sided::one;
  Rational printed;
};

struct SchurTable {
  std::vector<SchurRow> rows;

  static const char* csv_header();
  std::string to_csv() const;
  double max_abs_err() const;
};

struct PipelineResult {
  GradedOperator input;
  GradedOperator output;
  std::vector<SchurRow> rows;
  // max_l ||O_l - c_l G_l|| with c_l the measured coefficient.
  double residual = 0.0;
  // Largest entry of any block off the band (r + l, s + l).
  double off_band = 0.0;
};

// V_N(t_mu t_nu^*) on a one-sided window.
PipelineResult v_n(CorrespondencePtr corr, const AMatrix& mu, int r, const AMatrix& nu, int s, int N,
                   FockWindow window);
// W_N(s_mu s_nu^*) on a two-sided window, n = 1.
PipelineResult w_n(CorrespondencePtr corr, const AMatrix& mu, int r, const AMatrix& nu, int s, int N,
                   FockWindow window);

// Represents sum_l c_l e (x) 1_{E^l}, with c_l = tail for l >= stabilization.
struct TailSymbol {
  int r = 0;
  int s = 0;
  AMatrix e;
  std::map<int, double> coeffs;
  double tail = 0.0;
  int stabilization = 0;

  double coeff(int l) const;
};

TailSymbol oracle_tail(int N, int r, int s, const AMatrix& e, Sided sided);
TailSymbol measured_tail(const PipelineResult& res, const AMatrix& e);

struct TailReport {
  // max over l >= stabilization of ||O_l - c_l G_l||.
  double tail_deviation = 0.0;
  // max over every representable l of ||O_l - c_l G_l||.
  double symbol_deviation = 0.0;
  double off_band = 0.0;
  // Offsets where the block differs from the eventual value tail * G_l.
  std::vector<int> compact_offsets;
  bool pass = false;
};

TailReport tail_compare(const GradedOperator& x, const TailSymbol& t, double tol);

// Largest block difference over keys with both degrees inside both windows.
double shared_block_deviation(const GradedOperator& x, const GradedOperator& y);

}  // namespace pimsner
