#pragma once

// The conditional-expectation tower Ex_k : M_{n^k}(A) -> A,
//   Ex_1 = Ex o alpha^ o Ad U^*,   Ex_{k+1} = Ex_k o (1 (x) Ex_1),
// with Ex the normalised trace over M_n and Ad V(x) = V^* x V. Ex_1 contracts
// the innermost tensor index, so Ex_k is Ex_1 applied entrywise k times.

#include "pimsner/correspondence.hpp"

#include <string>
#include <vector>

namespace pimsner {

// (1/n) sum_i x_ii.
AElement ex_trace(const Correspondence& corr, const AMatrix& x);
// T -> T (x) 1_E, M_{n^k}(A) -> M_{n^{k+1}}(A).
AMatrix embed_jk(const Correspondence& corr, int k, const AMatrix& T);
// Ex_1 applied to every n x n block of x: (p n) x (q n) -> p x q.
AMatrix ex1_entrywise(const Correspondence& corr, const AMatrix& x);
// Ex_K applied to every n^K x n^K block.
AMatrix ex_entrywise(const Correspondence& corr, int K, const AMatrix& x);
AElement ex_k(const Correspondence& corr, int k, const AMatrix& x);
LinearMap ex_map(const Correspondence& corr, int k);

// E^m (x) B with B = M_{n^K}(A): a vector is an (n^{m+K}) x n^K matrix over A,
// and xi (x) b has coordinates (phi_K(xi_i) b)_i.
AMatrix eps_bar(const Correspondence& corr, int K, const AMatrix& zeta);
// m x m matrices over B, stored (m n^K) x (m n^K), to m x m over A.
AMatrix eps_hat(const Correspondence& corr, int K, const AMatrix& T);
LinearMap eps_hat_map(const Correspondence& corr, int K, int m);

struct AxiomResult {
  std::string axiom;
  int level = 0;
  double max_deviation = 0.0;
  bool pass = false;
  std::string witness;
};

struct CondExpReport {
  std::vector<AxiomResult> results;
  bool pass = false;
};

struct CondExpOptions {
  int samples = 8;
  std::uint64_t seed = 1;
  int choi_cap = kDefaultChoiCap;
  int probe_trials = 50;
};

// Checks Ex_K o phi_K = id, the bimodule property, the Schwarz inequality,
// Ex_{K+1} o j_K = Ex_K, and complete positivity / contractivity of Ex_K.
CondExpReport verify_cond_exp(const Correspondence& corr, int K, const CondExpOptions& opt = {});

}  // namespace pimsner
