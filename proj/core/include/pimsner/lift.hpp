#pragma once

// Lifting machinery: the module E (x) F_E at a finite level K of the tower,
// the representations pi_i of K(E^i) on the Fock module, the defect of the
// expectation-based lift, the compression lift for n = 1, and finite-section
// approximation certificates.

#include "pimsner/expectation.hpp"
#include "pimsner/fock.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pimsner {

// Level-K coordinates of E (x) F_E with B = M_{n^K}(A). A vector of degree m
// is an n^{m+K} x n^K matrix over A.
class EInftyContext {
 public:
  EInftyContext(CorrespondencePtr corr, int K);

  const CorrespondencePtr& corr() const { return corr_; }
  int level() const { return K_; }
  int b_rank() const { return corr_->rank(K_); }

  // xi (x) b for xi in E^m (n^m x 1) and b in B.
  AMatrix embed(const AMatrix& xi, const AMatrix& b) const;
  // <x, y> = x^* y in B.
  AMatrix right_inner(const AMatrix& x, const AMatrix& y) const;
  // x y^*, one level up the tower: M_{n^m}(B) = M_{n^{m+K}}(A).
  AMatrix left_inner(const AMatrix& x, const AMatrix& y) const;
  // max ||x <y, z> - <x, y> z|| over the given triple.
  double bimodule_defect(const AMatrix& x, const AMatrix& y, const AMatrix& z) const;

 private:
  void check_vector(const AMatrix& x) const;

  CorrespondencePtr corr_;
  int K_;
};

enum class InnerSide { left, right };
AMatrix einfty_inner(const EInftyContext& ctx, const AMatrix& x, const AMatrix& y, InnerSide side);

// Blocks (j, j) = T (x) 1_{E^{j-i}} for j >= i.
GradedOperator pi_i(CorrespondencePtr corr, int i, const AMatrix& T, FockWindow window);

// t_{mu (x) b} t_{nu (x) c}^* on the Fock module of E (x) F_E, at level K.
GradedOperator toeplitz_infty(const EInftyContext& ctx, const AMatrix& mu, int r, const AMatrix& b,
                              const AMatrix& nu, int s, const AMatrix& c, FockWindow window);
// Entrywise Ex_K on every block: level K -> level 0.
GradedOperator eps_hat_graded(const GradedOperator& x);

struct LiftDefect {
  GradedOperator defect;
  // Band offsets k (blocks (r + k, s + k)) where the defect is nonzero.
  std::vector<int> support;
  // Largest entry over blocks with k >= i.
  double above_i = 0.0;
  double off_band = 0.0;
  bool pass = false;
};

// eps_hat(t_{mu (x) b} t_{nu (x) c}^*) - t_mu pi_i(b c^*) t_nu^*, with b, c in
// M_{n^i}(A) embedded into B = M_{n^K}(A) by the tower, i <= K.
LiftDefect lift_defect(const EInftyContext& ctx, const AMatrix& mu, int r, const AMatrix& nu, int s,
                       const AMatrix& b, const AMatrix& c, int i, FockWindow window, double tol);

struct BilateralLift {
  GradedOperator lifted;     // P s_mu s_nu^* P on the nonnegative degrees
  GradedOperator toeplitz;   // t_mu t_nu^* on the one-sided window
  double max_deviation = 0.0;
  // Offsets k where the two differ by more than the tolerance.
  std::vector<int> differing_offsets;
  TailReport tail;
  bool pass = false;
};

// n = 1. `window` is two-sided; the comparison uses its nonnegative half.
BilateralLift bilateral_lift(CorrespondencePtr corr, const AMatrix& mu, int r, const AMatrix& nu, int s,
                             FockWindow window, double tol);
// x -> P x P from the two-sided window to its nonnegative half.
LinearMap compression_lift_map(CorrespondencePtr corr, FockWindow window);

// ---------------------------------------------------------------------------

struct FactorMapReport {
  std::string direction;
  CPReport cp;
  double norm = 0.0;
};

struct GeneratorResult {
  int r = 0;
  int s = 0;
  std::uint64_t seed = 0;
  Rational coeff_expected;
  double coeff_measured = 0.0;
  double error = 0.0;
  double g_norm = 0.0;
  // Distance of the output from the oracle prediction (coefficient times g).
  double symbol_deviation = 0.0;
  // (max(r, s) one-sided, |r - s| two-sided) / (N + 1) * ||g|| + eq_tol.
  double bound = 0.0;
  bool within_bound = false;
};

struct CPAPCertificate {
  std::uint64_t spec_fingerprint = 0;
  int N = 0;
  int D = 0;
  int flatten_dim = 0;
  bool bilateral = false;
  FockWindow window;
  std::vector<GeneratorResult> generators;
  std::vector<FactorMapReport> factor_maps;
  Tolerances tolerances;
  std::uint64_t seed = 0;
  bool pass = false;
};

struct GeneratorSpec {
  int r = 0;
  int s = 0;
};

struct CertificateOptions {
  int choi_cap = kDefaultChoiCap;
  int probe_trials = 50;
};

// FNV-1a over the numbers that define the correspondence.
std::uint64_t spec_fingerprint(const Correspondence& corr);

// Seeded vector of E^r with module norm 1.
AMatrix generator_vector(const Correspondence& corr, int r, std::uint64_t seed);

// Factor maps: compression into M_D(A), D = sum_{k<=N} rank(k), then Psi_N
// back onto the window (two-sided when n = 1 and the window is two-sided).
CPAPCertificate cpap_certificate(CorrespondencePtr corr, int N, const std::vector<GeneratorSpec>& generators,
                                 FockWindow window, std::uint64_t seed, const CertificateOptions& opt = {});

// A pair of maps X -> C -> X approximating the identity of X.
struct FactorPair {
  std::string name;
  LinearMap down;
  LinearMap up;
};

FactorPair identity_pair(const FlatShape& shape);
// Compression by a seeded isometry V: x -> V^* x V, y -> V y V^*, over M_p(A)
// through M_q(A), q <= p.
FactorPair isometry_pair(const AlgebraSpec& spec, int p, int q, std::uint64_t seed);

struct ComposedReport {
  FactorPair pair;
  CPReport down_cp;
  CPReport up_cp;
  // Per probe element: measured composite error, and the triangle bound
  // err_outer(x) + ||up_outer|| err_inner(down_outer(x)).
  std::vector<double> errors;
  std::vector<double> bounds;
  double outer_up_norm = 0.0;
  bool pass = false;
};

// outer: X -> C -> X, inner: C -> C' -> C. Result: X -> C' -> X.
ComposedReport compose_certificates(const FactorPair& outer, const FactorPair& inner,
                                    const std::vector<FlatElement>& probes, const Tolerances& tol = {},
                                    int choi_cap = kDefaultChoiCap);

}  // namespace pimsner
