#include "pimsner/correspondence.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pimsner {

namespace {

// Keep the cached phi_k tables below this many bytes in total.
constexpr double kPhiCacheBudget = 64.0 * 1024 * 1024;

bool is_identity_matrix(const Mat& m) {
  return (m - Mat::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() == 0.0;
}

// Applies a -> W_t^H diag_i(a_{src[t][i]}) W_t to every entry of x.
AMatrix entrywise_kernel(const AMatrix& x, int n, const std::vector<Mat>& W,
                         const std::vector<std::vector<int>>& src, bool trivial) {
  const AlgebraSpec& spec = x.spec();
  const int p = x.rows();
  const int q = x.cols();
  std::vector<Mat> out;
  out.reserve(static_cast<size_t>(spec.num_blocks()));
  for (int t = 0; t < spec.num_blocks(); ++t) {
    const int d = spec.dim(t);
    const int nd = n * d;
    Mat o = Mat::Zero(static_cast<Eigen::Index>(p) * nd, static_cast<Eigen::Index>(q) * nd);
    const Mat& Wt = W[static_cast<size_t>(t)];
    const auto& st = src[static_cast<size_t>(t)];
    for (int a = 0; a < p; ++a) {
      for (int b = 0; b < q; ++b) {
        if (trivial) {
          for (int i = 0; i < n; ++i) {
            o.block(a * nd + i * d, b * nd + i * d, d, d) = x.block(st[static_cast<size_t>(i)]).block(a * d, b * d, d, d);
          }
          continue;
        }
        Mat acc = Mat::Zero(nd, nd);
        for (int i = 0; i < n; ++i) {
          const auto xb = x.block(st[static_cast<size_t>(i)]).block(a * d, b * d, d, d);
          if (xb.isZero(0.0)) continue;
          const auto Wi = Wt.middleRows(i * d, d);
          acc.noalias() += Wi.adjoint() * (xb * Wi);
        }
        o.block(a * nd, b * nd, nd, nd) = acc;
      }
    }
    out.push_back(std::move(o));
  }
  return AMatrix(spec, p * n, q * n, std::move(out));
}

}  // namespace

int default_max_degree(int n) {
  if (n <= 1) return 12;
  if (n == 2) return 8;
  if (n == 3) return 5;
  return 4;
}

int ipow(int n, int k) {
  if (k < 0) throw ShapeError("negative exponent");
  long long v = 1;
  for (int i = 0; i < k; ++i) {
    v *= n;
    if (v > (1LL << 30)) throw ShapeError("module rank overflow");
  }
  return static_cast<int>(v);
}

int log_n(int n, int value) {
  if (value < 1) return -1;
  if (n == 1) return value == 1 ? 0 : -1;
  int k = 0;
  while (value % n == 0) {
    value /= n;
    ++k;
  }
  return value == 1 ? k : -1;
}

Correspondence::Correspondence(AlgebraSpec algebra, int n, AMatrix U, std::vector<Automorphism> alphas,
                               int max_degree, Tolerances tol)
    : algebra_(std::move(algebra)), n_(n), U_(std::move(U)), alphas_(std::move(alphas)),
      max_degree_(max_degree < 0 ? default_max_degree(n) : max_degree), tol_(tol) {
  tol_.validate();
  if (n_ < 1) throw ConfigError("n must be >= 1");
  if (!(U_.spec() == algebra_) || U_.rows() != n_ || U_.cols() != n_) {
    throw ConfigError("U must be an n x n matrix over the coefficient algebra");
  }
  if (static_cast<int>(alphas_.size()) != n_) {
    throw ConfigError("need exactly n automorphisms, got " + std::to_string(alphas_.size()));
  }
  for (const auto& a : alphas_) {
    if (!(a.spec() == algebra_)) throw ConfigError("automorphism acts on a different algebra");
  }

  trivial_kernel_ = true;
  const int B = algebra_.num_blocks();
  for (int t = 0; t < B; ++t) {
    const int d = algebra_.dim(t);
    Mat D = Mat::Zero(n_ * d, n_ * d);
    std::vector<int> st;
    for (int i = 0; i < n_; ++i) {
      const auto& perm = alphas_[static_cast<size_t>(i)].perm();
      const int s = static_cast<int>(std::find(perm.begin(), perm.end(), t) - perm.begin());
      st.push_back(s);
      D.block(i * d, i * d, d, d) = alphas_[static_cast<size_t>(i)].unitary(t);
    }
    Mat Wt = D * U_.block(t);
    if (!is_identity_matrix(Wt)) trivial_kernel_ = false;
    W_.push_back(std::move(Wt));
    src_.push_back(std::move(st));
  }
  if (n_ == 1) {
    const auto& perm = alphas_[0].perm();
    for (int u = 0; u < B; ++u) {
      const int t = perm[static_cast<size_t>(u)];
      W_inv_.push_back(W_[static_cast<size_t>(t)].adjoint());
      src_inv_.push_back(t);
    }
  }

  // Basis images under phi_k by the literal recursion
  // phi_k = Ad(1 (x) U) o (1 (x) alpha~) o phi_{k-1}.
  const int L = algebra_.linear_dim();
  double bytes = 0.0;
  std::vector<AMatrix> level;
  for (int b = 0; b < L; ++b) level.push_back(AMatrix::from_element(AElement::basis(algebra_, b)));
  phi_cache_.push_back(level);
  for (int k = 1; k <= max_degree_; ++k) {
    double level_bytes = 0.0;
    for (int d : algebra_.block_dims()) {
      const double side = std::pow(static_cast<double>(n_), k) * d;
      level_bytes += 16.0 * side * side * L;
    }
    if (bytes + level_bytes > kPhiCacheBudget) break;
    bytes += level_bytes;
    std::vector<AMatrix> next;
    next.reserve(level.size());
    for (const auto& m : level) next.push_back(phi_reference_step(m));
    phi_cache_.push_back(next);
    level = std::move(next);
  }
}

int Correspondence::rank(int k) const {
  if (n_ == 1) return 1;
  if (k < 0) throw ShapeError("negative degree needs n = 1");
  return ipow(n_, k);
}

void Correspondence::check_degree(int k) const {
  if (k < 0 || k > max_degree_) {
    throw ShapeError("degree " + std::to_string(k) + " outside cache limit " + std::to_string(max_degree_));
  }
}

AMatrix Correspondence::phi_reference_step(const AMatrix& prev) const {
  const int m = prev.rows();
  AMatrix tilde(algebra_, m * n_, m * n_);
  for (int p = 0; p < m; ++p) {
    for (int q = 0; q < m; ++q) {
      const AElement e = prev.entry(p, q);
      for (int i = 0; i < n_; ++i) tilde.set_entry(p * n_ + i, q * n_ + i, alphas_[static_cast<size_t>(i)].apply(e));
    }
  }
  const AMatrix IU = AMatrix::kron_identity(m, U_);
  return IU.adjoint() * tilde * IU;
}

AMatrix Correspondence::alpha_tilde(const AElement& a) const {
  AMatrix out(algebra_, n_, n_);
  for (int i = 0; i < n_; ++i) out.set_entry(i, i, alphas_[static_cast<size_t>(i)].apply(a));
  return out;
}

AMatrix Correspondence::alpha_hat(const AMatrix& x) const {
  if (x.rows() != n_ || x.cols() != n_) throw ShapeError("alpha_hat takes an n x n matrix");
  AMatrix out(algebra_, n_, n_);
  for (int i = 0; i < n_; ++i) {
    out.set_entry(i, i, alphas_[static_cast<size_t>(i)].apply(x.entry(i, i), Direction::inverse));
  }
  return out;
}

AMatrix Correspondence::amplify1(const AMatrix& x) const {
  if (!(x.spec() == algebra_)) throw ShapeError("algebra mismatch in amplify");
  return entrywise_kernel(x, n_, W_, src_, trivial_kernel_);
}

AMatrix Correspondence::amplify(const AMatrix& x, int k) const {
  if (!(x.spec() == algebra_)) throw ShapeError("algebra mismatch in amplify");
  if (k < 0) {
    if (n_ != 1) throw ShapeError("negative amplification needs n = 1");
    std::vector<std::vector<int>> src;
    for (int s : src_inv_) src.push_back({s});
    bool trivial = true;
    for (const auto& w : W_inv_) trivial = trivial && is_identity_matrix(w);
    AMatrix y = x;
    for (int i = 0; i < -k; ++i) y = entrywise_kernel(y, 1, W_inv_, src, trivial);
    return y;
  }
  AMatrix y = x;
  for (int i = 0; i < k; ++i) y = amplify1(y);
  return y;
}

AMatrix Correspondence::amplify_entrywise(const AMatrix& x, int k) const {
  if (log_n(n_, x.rows()) < 0 || log_n(n_, x.cols()) < 0) {
    throw ShapeError("amplify_entrywise: shape " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                     " is not a power of n = " + std::to_string(n_));
  }
  return amplify(x, k);
}

AElement Correspondence::beta(const AElement& a, int power) const {
  if (n_ != 1) throw ShapeError("beta is defined for n = 1 only");
  return amplify(AMatrix::from_element(a), power).entry(0, 0);
}

const std::vector<AMatrix>& Correspondence::phi_table(int k) const {
  check_degree(k);
  if (k >= static_cast<int>(phi_cache_.size())) {
    throw ShapeError("phi_" + std::to_string(k) + " exceeds the cache memory budget");
  }
  return phi_cache_[static_cast<size_t>(k)];
}

AMatrix Correspondence::phi(int k, const AElement& a) const {
  check_degree(k);
  if (k >= static_cast<int>(phi_cache_.size())) {
    // Past the memory budget: continue the reference recursion from the last cached level.
    const int top = static_cast<int>(phi_cache_.size()) - 1;
    AMatrix y = phi(top, a);
    for (int j = top; j < k; ++j) y = phi_reference_step(y);
    return y;
  }
  const auto& table = phi_cache_[static_cast<size_t>(k)];
  const int m = rank(k);
  AMatrix out(algebra_, m, m);
  int idx = 0;
  for (int s = 0; s < algebra_.num_blocks(); ++s) {
    const int d = algebra_.dim(s);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c, ++idx) {
        const cplx v = a.block(s)(r, c);
        if (v == 0.0) continue;
        for (int t = 0; t < algebra_.num_blocks(); ++t) out.block(t) += v * table[static_cast<size_t>(idx)].block(t);
      }
    }
  }
  return out;
}

LinearMap Correspondence::phi_map(int k) const {
  check_degree(k);
  const AlgebraSpec spec = algebra_;
  const int m = rank(k);
  auto self = this;
  return LinearMap{flat_shape(spec, 1), flat_shape(spec, m), [self, spec, k](const FlatElement& x) {
                     return self->phi(k, AElement(spec, x)).blocks();
                   }};
}

AMatrix Correspondence::tensor_vec(const AMatrix& xi, const AMatrix& eta, int k) const {
  if (xi.cols() != 1 || eta.cols() != 1) throw ShapeError("tensor_vec takes column vectors");
  if (log_n(n_, xi.rows()) < 0) throw ShapeError("tensor_vec: length of xi must be a power of n");
  if (eta.rows() != rank(k)) throw ShapeError("tensor_vec: eta does not have degree " + std::to_string(k));
  const int m = eta.rows();
  AMatrix out(algebra_, xi.rows() * m, 1);
  for (int i = 0; i < xi.rows(); ++i) out.set_sub(i * m, 0, phi(k, xi.entry(i, 0)) * eta);
  return out;
}

const CheckResult* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string ValidationReport::failures() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& c : checks) {
    if (c.pass) continue;
    if (!first) os << ", ";
    os << c.name << " (" << c.deviation << ")";
    first = false;
  }
  return os.str();
}

ValidationReport validate_spec(const Correspondence& corr) {
  const auto& spec = corr.algebra();
  const auto& tol = corr.tolerances();
  const int n = corr.n();
  ValidationReport rep;
  auto add = [&rep](std::string name, double dev, bool pass) {
    rep.checks.push_back(CheckResult{std::move(name), dev, pass});
  };

  const AMatrix I = AMatrix::identity(spec, n);
  const double unitary_dev =
      std::max((corr.U().adjoint() * corr.U() - I).norm(), (corr.U() * corr.U().adjoint() - I).norm());
  add("U unitary", unitary_dev, unitary_dev <= tol.eq_tol);

  double alpha_dev = 0.0;
  const int L = spec.linear_dim();
  for (const auto& alpha : corr.alphas()) {
    for (int b = 0; b < L; ++b) {
      const AElement e = AElement::basis(spec, b);
      alpha_dev = std::max(alpha_dev, alpha.apply(alpha.apply(e), Direction::inverse).max_abs_diff(e));
      alpha_dev = std::max(alpha_dev, alpha.apply(e.adjoint()).max_abs_diff(alpha.apply(e).adjoint()));
      for (int c = 0; c < L; ++c) {
        const AElement f = AElement::basis(spec, c);
        alpha_dev = std::max(alpha_dev, alpha.apply(e * f).max_abs_diff(alpha.apply(e) * alpha.apply(f)));
      }
    }
  }
  add("alpha automorphisms", alpha_dev, alpha_dev <= tol.eq_tol);

  auto phi1 = [&corr](const AElement& a) { return corr.amplify1(AMatrix::from_element(a)); };
  const double unital_dev = phi1(AElement::unit(spec)).max_abs_diff(I);
  add("phi_1 unital", unital_dev, unital_dev <= tol.eq_tol);

  double star_dev = 0.0;
  double mult_dev = 0.0;
  std::vector<AMatrix> images;
  for (int b = 0; b < L; ++b) images.push_back(phi1(AElement::basis(spec, b)));
  for (int b = 0; b < L; ++b) {
    const AElement e = AElement::basis(spec, b);
    star_dev = std::max(star_dev, phi1(e.adjoint()).max_abs_diff(images[static_cast<size_t>(b)].adjoint()));
    for (int c = 0; c < L; ++c) {
      const AElement f = AElement::basis(spec, c);
      mult_dev = std::max(mult_dev, phi1(e * f).max_abs_diff(images[static_cast<size_t>(b)] * images[static_cast<size_t>(c)]));
    }
  }
  add("phi_1 *-preserving", star_dev, star_dev <= tol.eq_tol);
  add("phi_1 multiplicative", mult_dev, mult_dev <= tol.eq_tol);

  // Faithful: the basis images are linearly independent. The recorded value
  // is the smallest singular value of the image matrix (should be >= 1 for an
  // injective *-homomorphism on matrix units, since ||phi(e)||_F >= 1).
  Eigen::Index rows = 0;
  for (const auto& blk : images[0].blocks()) rows += blk.size();
  Mat cols(rows, L);
  for (int b = 0; b < L; ++b) {
    Eigen::Index pos = 0;
    for (const auto& blk : images[static_cast<size_t>(b)].blocks()) {
      cols.col(b).segment(pos, blk.size()) = Eigen::Map<const Eigen::VectorXcd>(blk.data(), blk.size());
      pos += blk.size();
    }
  }
  const Eigen::JacobiSVD<Mat> svd(cols);
  const double smin = svd.singularValues()(L - 1);
  add("phi_1 faithful", smin, smin > std::sqrt(tol.eq_tol));

  rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const CheckResult& c) { return c.pass; });
  return rep;
}

void require_valid(const Correspondence& corr) {
  const ValidationReport rep = validate_spec(corr);
  if (!rep.pass) throw ValidationError("correspondence axioms violated: " + rep.failures());
}

}  // namespace pimsner
