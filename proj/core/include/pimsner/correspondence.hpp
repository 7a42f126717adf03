#pragma once

// The correspondence E = l^2_n (x) A with left action phi(a) = U^* diag(alpha_i(a)) U,
// its tensor powers E^k ~ A^{n^k} and the left actions phi_k : A -> M_{n^k}(A).
//
// Coordinates: a multi-index (i_1, ..., i_k) of E^k is read with i_1 most
// significant. With (xi (x) eta)_{(i,m)} = [phi_k(xi_i) eta]_m, the operator
// x (x) 1_{E^k} is phi_k applied to every entry of x, and phi_k itself is
// phi_1 applied entrywise k times.

#include "pimsner/hilbert_module.hpp"

#include <memory>
#include <string>
#include <vector>

namespace pimsner {

int default_max_degree(int n);
// n^k, throws ShapeError on overflow past 2^30.
int ipow(int n, int k);
// Exponent k with n^k == value, or -1.
int log_n(int n, int value);

class Correspondence {
 public:
  // Does not validate; call validate_spec / require_valid before trusting the
  // output. max_degree < 0 selects default_max_degree(n).
  Correspondence(AlgebraSpec algebra, int n, AMatrix U, std::vector<Automorphism> alphas,
                 int max_degree = -1, Tolerances tol = {});

  const AlgebraSpec& algebra() const { return algebra_; }
  int n() const { return n_; }
  const AMatrix& U() const { return U_; }
  const std::vector<Automorphism>& alphas() const { return alphas_; }
  int max_degree() const { return max_degree_; }
  const Tolerances& tolerances() const { return tol_; }
  bool bimodule() const { return n_ == 1; }
  // Rank of E^k as a free module: n^k; every degree has rank 1 when n = 1.
  int rank(int k) const;

  // diag(alpha_1(a), ..., alpha_n(a)).
  AMatrix alpha_tilde(const AElement& a) const;
  // diag(alpha_1^{-1}(x_11), ..., alpha_n^{-1}(x_nn)).
  AMatrix alpha_hat(const AMatrix& x) const;

  // Entrywise phi_1: p x q -> pn x qn.
  AMatrix amplify1(const AMatrix& x) const;
  // Entrywise phi_k. Negative k is allowed only when n = 1 and applies
  // beta^{k} with beta = phi_1.
  AMatrix amplify(const AMatrix& x, int k) const;
  // Same as amplify, but checks that both sides of x are powers of n.
  AMatrix amplify_entrywise(const AMatrix& x, int k) const;
  // n = 1 only: beta^power(a), beta(a) = U^* alpha(a) U.
  AElement beta(const AElement& a, int power) const;

  // phi_k(a) through the cached basis images.
  AMatrix phi(int k, const AElement& a) const;
  // Images of the basis of A (AElement::basis order) under phi_k.
  const std::vector<AMatrix>& phi_table(int k) const;
  // phi_k as a map between flattened spaces, A -> M_{n^k}(A).
  LinearMap phi_map(int k) const;

  // xi in E^j, eta in E^k (k given explicitly since n = 1 hides degrees);
  // uses the cached phi_k.
  AMatrix tensor_vec(const AMatrix& xi, const AMatrix& eta, int k) const;

 private:
  void check_degree(int k) const;
  AMatrix phi_reference_step(const AMatrix& prev) const;

  AlgebraSpec algebra_;
  int n_;
  AMatrix U_;
  std::vector<Automorphism> alphas_;
  int max_degree_;
  Tolerances tol_;

  // Per target summand t: W_t = diag_i(V_{i,t}) U_t, flattened n d_t square,
  // and the source summand of alpha_i feeding t.
  std::vector<Mat> W_;
  std::vector<std::vector<int>> src_;
  bool trivial_kernel_ = false;
  // Inverse data for n = 1.
  std::vector<Mat> W_inv_;
  std::vector<int> src_inv_;

  std::vector<std::vector<AMatrix>> phi_cache_;
};

using CorrespondencePtr = std::shared_ptr<const Correspondence>;

struct CheckResult {
  std::string name;
  double deviation = 0.0;
  bool pass = false;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool pass = false;

  const CheckResult* find(const std::string& name) const;
  // Names of failed checks, comma separated.
  std::string failures() const;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ValidationReport validate_spec(const Correspondence& corr);
// Throws ValidationError listing the violated axioms.
void require_valid(const Correspondence& corr);

}  // namespace pimsner
