#include "pimsner/hilbert_module.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>

namespace pimsner {

AMatrix::AMatrix(AlgebraSpec spec, int rows, int cols)
    : spec_(std::move(spec)), rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw ShapeError("negative AMatrix shape");
  for (int d : spec_.block_dims()) blocks_.push_back(Mat::Zero(rows * d, cols * d));
}

AMatrix::AMatrix(AlgebraSpec spec, int rows, int cols, std::vector<Mat> flat_blocks)
    : spec_(std::move(spec)), rows_(rows), cols_(cols), blocks_(std::move(flat_blocks)) {
  if (static_cast<int>(blocks_.size()) != spec_.num_blocks()) {
    throw ShapeError("AMatrix block count does not match algebra");
  }
  for (int s = 0; s < spec_.num_blocks(); ++s) {
    const Mat& b = blocks_[static_cast<size_t>(s)];
    if (b.rows() != rows * spec_.dim(s) || b.cols() != cols * spec_.dim(s)) {
      throw ShapeError("AMatrix flat block " + std::to_string(s) + " has wrong shape");
    }
  }
}

AMatrix AMatrix::zero(const AlgebraSpec& spec, int rows, int cols) {
  return AMatrix(spec, rows, cols);
}

AMatrix AMatrix::identity(const AlgebraSpec& spec, int n) {
  std::vector<Mat> blocks;
  for (int d : spec.block_dims()) blocks.push_back(Mat::Identity(n * d, n * d));
  return AMatrix(spec, n, n, std::move(blocks));
}

AMatrix AMatrix::from_element(const AElement& a) {
  return AMatrix(a.spec(), 1, 1, a.blocks());
}

AMatrix AMatrix::from_entries(const AlgebraSpec& spec, int rows, int cols,
                              const std::vector<AElement>& entries) {
  if (static_cast<int>(entries.size()) != rows * cols) throw ShapeError("entry count mismatch");
  AMatrix m(spec, rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m.set_entry(i, j, entries[static_cast<size_t>(i * cols + j)]);
  }
  return m;
}

AMatrix AMatrix::kron_identity(int m, const AMatrix& x) {
  std::vector<Mat> blocks;
  for (int s = 0; s < x.spec().num_blocks(); ++s) {
    const Mat& b = x.block(s);
    Mat out = Mat::Zero(m * b.rows(), m * b.cols());
    for (int i = 0; i < m; ++i) out.block(i * b.rows(), i * b.cols(), b.rows(), b.cols()) = b;
    blocks.push_back(std::move(out));
  }
  return AMatrix(x.spec(), m * x.rows(), m * x.cols(), std::move(blocks));
}

AElement AMatrix::entry(int i, int j) const {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_) throw ShapeError("AMatrix entry out of range");
  std::vector<Mat> out;
  for (int s = 0; s < spec_.num_blocks(); ++s) {
    const int d = spec_.dim(s);
    out.push_back(block(s).block(i * d, j * d, d, d));
  }
  return AElement(spec_, std::move(out));
}

void AMatrix::set_entry(int i, int j, const AElement& a) {
  if (!(a.spec() == spec_)) throw ShapeError("algebra mismatch in set_entry");
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_) throw ShapeError("AMatrix entry out of range");
  for (int s = 0; s < spec_.num_blocks(); ++s) {
    const int d = spec_.dim(s);
    block(s).block(i * d, j * d, d, d) = a.block(s);
  }
}

AMatrix AMatrix::sub(int i0, int j0, int rows, int cols) const {
  if (i0 < 0 || j0 < 0 || i0 + rows > rows_ || j0 + cols > cols_) {
    throw ShapeError("AMatrix sub-range out of bounds");
  }
  std::vector<Mat> out;
  for (int s = 0; s < spec_.num_blocks(); ++s) {
    const int d = spec_.dim(s);
    out.push_back(block(s).block(i0 * d, j0 * d, rows * d, cols * d));
  }
  return AMatrix(spec_, rows, cols, std::move(out));
}

void AMatrix::set_sub(int i0, int j0, const AMatrix& x) {
  if (!(x.spec_ == spec_)) throw ShapeError("algebra mismatch in set_sub");
  if (i0 < 0 || j0 < 0 || i0 + x.rows_ > rows_ || j0 + x.cols_ > cols_) {
    throw ShapeError("AMatrix set_sub out of bounds");
  }
  for (int s = 0; s < spec_.num_blocks(); ++s) {
    const int d = spec_.dim(s);
    block(s).block(i0 * d, j0 * d, x.rows_ * d, x.cols_ * d) = x.block(s);
  }
}

AMatrix AMatrix::adjoint() const {
  std::vector<Mat> out;
  for (const auto& b : blocks_) out.push_back(b.adjoint());
  return AMatrix(spec_, cols_, rows_, std::move(out));
}

void AMatrix::check_compatible(const AMatrix& y, const char* what) const {
  if (!(spec_ == y.spec_)) throw ShapeError(std::string("algebra mismatch in ") + what);
  if (rows_ != y.rows_ || cols_ != y.cols_) {
    throw ShapeError(std::string("shape mismatch in ") + what + ": " + std::to_string(rows_) + "x" +
                     std::to_string(cols_) + " vs " + std::to_string(y.rows_) + "x" +
                     std::to_string(y.cols_));
  }
}

AMatrix& AMatrix::operator+=(const AMatrix& y) {
  check_compatible(y, "addition");
  for (size_t s = 0; s < blocks_.size(); ++s) blocks_[s] += y.blocks_[s];
  return *this;
}

AMatrix& AMatrix::operator-=(const AMatrix& y) {
  check_compatible(y, "subtraction");
  for (size_t s = 0; s < blocks_.size(); ++s) blocks_[s] -= y.blocks_[s];
  return *this;
}

AMatrix& AMatrix::operator*=(cplx c) {
  for (auto& b : blocks_) b *= c;
  return *this;
}

Mat AMatrix::flatten() const {
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  for (const auto& b : blocks_) {
    r += b.rows();
    c += b.cols();
  }
  Mat out = Mat::Zero(r, c);
  Eigen::Index i = 0;
  Eigen::Index j = 0;
  for (const auto& b : blocks_) {
    out.block(i, j, b.rows(), b.cols()) = b;
    i += b.rows();
    j += b.cols();
  }
  return out;
}

double AMatrix::norm(double rel_tol) const {
  double n = 0.0;
  for (const auto& b : blocks_) n = std::max(n, operator_norm(b, rel_tol));
  return n;
}

double AMatrix::min_eigenvalue() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& b : blocks_) m = std::min(m, min_hermitian_eigenvalue(b));
  return m;
}

double AMatrix::hermitian_defect() const {
  double m = 0.0;
  for (const auto& b : blocks_) m = std::max(m, pimsner::hermitian_defect(b));
  return m;
}

bool AMatrix::is_positive(const Tolerances& tol) const {
  return rows_ == cols_ && hermitian_defect() <= tol.eq_tol && min_eigenvalue() >= -tol.psd_tol;
}

double AMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& b : blocks_) m = std::max(m, pimsner::max_abs(b));
  return m;
}

double AMatrix::max_abs_diff(const AMatrix& y) const {
  check_compatible(y, "comparison");
  double m = 0.0;
  for (size_t s = 0; s < blocks_.size(); ++s) m = std::max(m, pimsner::max_abs(blocks_[s] - y.blocks_[s]));
  return m;
}

bool AMatrix::is_zero() const {
  for (const auto& b : blocks_) {
    if (!b.isZero(0.0)) return false;
  }
  return true;
}

cplx AMatrix::frobenius_dot(const AMatrix& y) const {
  check_compatible(y, "frobenius product");
  cplx acc = 0.0;
  for (size_t s = 0; s < blocks_.size(); ++s) acc += blocks_[s].cwiseProduct(y.blocks_[s].conjugate()).sum();
  return std::conj(acc);
}

AMatrix operator+(AMatrix x, const AMatrix& y) { return x += y; }
AMatrix operator-(AMatrix x, const AMatrix& y) { return x -= y; }

AMatrix operator*(const AMatrix& x, const AMatrix& y) {
  if (!(x.spec() == y.spec())) throw ShapeError("algebra mismatch in product");
  if (x.cols() != y.rows()) {
    throw ShapeError("shape mismatch in product: " + std::to_string(x.cols()) + " vs " +
                     std::to_string(y.rows()));
  }
  std::vector<Mat> out;
  for (int s = 0; s < x.spec().num_blocks(); ++s) out.push_back(x.block(s) * y.block(s));
  return AMatrix(x.spec(), x.rows(), y.cols(), std::move(out));
}

AMatrix operator*(cplx c, AMatrix x) { return x *= c; }

AMatrix amat_arithmetic(const AMatrix& x, const AMatrix& y, ArithOp op, cplx c) {
  switch (op) {
    case ArithOp::add: return x + y;
    case ArithOp::mul: return x * y;
    case ArithOp::adjoint: return x.adjoint();
    case ArithOp::scale: return c * x;
  }
  throw std::logic_error("unknown arithmetic op");
}

AElement inner(const AMatrix& xi, const AMatrix& eta) {
  if (xi.cols() != 1 || eta.cols() != 1) throw ShapeError("inner product takes column vectors");
  if (xi.rows() != eta.rows()) throw ShapeError("inner product of vectors of different length");
  const AMatrix g = xi.adjoint() * eta;
  return g.entry(0, 0);
}

AMatrix rank_one(const AMatrix& mu, const AMatrix& nu) {
  if (mu.cols() != 1 || nu.cols() != 1) throw ShapeError("rank_one takes column vectors");
  return mu * nu.adjoint();
}

double module_norm(const AMatrix& xi) { return xi.norm(); }

AMatrix sample_amatrix(const AlgebraSpec& spec, int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Mat> blocks;
  for (int d : spec.block_dims()) blocks.push_back(random_gaussian(rows * d, cols * d, rng));
  return AMatrix(spec, rows, cols, std::move(blocks));
}

AMatrix sample_unit_vector(const AlgebraSpec& spec, int rows, std::uint64_t seed) {
  AMatrix v = sample_amatrix(spec, rows, 1, seed);
  const double n = v.norm();
  return (1.0 / n) * v;
}

// ---------------------------------------------------------------------------

FlatShape flat_shape(const AlgebraSpec& spec, int p) {
  FlatShape s;
  for (int d : spec.block_dims()) s.sides.push_back(p * d);
  return s;
}

FlatElement flat_zero(const FlatShape& shape) {
  FlatElement out;
  for (int m : shape.sides) out.push_back(Mat::Zero(m, m));
  return out;
}

FlatElement flat_identity(const FlatShape& shape) {
  FlatElement out;
  for (int m : shape.sides) out.push_back(Mat::Identity(m, m));
  return out;
}

double flat_norm(const FlatElement& x) {
  double n = 0.0;
  for (const auto& m : x) n = std::max(n, operator_norm(m));
  return n;
}

FlatElement flat_sub(const FlatElement& x, const FlatElement& y) {
  if (x.size() != y.size()) throw ShapeError("flat_sub: summand count mismatch");
  FlatElement out;
  for (size_t s = 0; s < x.size(); ++s) out.push_back(x[s] - y[s]);
  return out;
}

LinearMap compose(const LinearMap& outer, const LinearMap& inner) {
  if (!(outer.domain == inner.codomain)) throw ShapeError("linear maps do not chain");
  auto f = outer.fn;
  auto g = inner.fn;
  return LinearMap{inner.domain, outer.codomain, [f, g](const FlatElement& x) { return f(g(x)); }};
}

namespace {

bool flat_is_zero(const FlatElement& x) {
  for (const auto& m : x) {
    if (!m.isZero(0.0)) return false;
  }
  return true;
}

FlatElement matrix_unit(const FlatShape& shape, int s, int p, int q) {
  FlatElement e = flat_zero(shape);
  e[static_cast<size_t>(s)](p, q) = 1.0;
  return e;
}

void check_image_shape(const FlatElement& img, const FlatShape& codomain) {
  if (static_cast<int>(img.size()) != codomain.summands()) throw ShapeError("map image has wrong summand count");
  for (int t = 0; t < codomain.summands(); ++t) {
    const Mat& m = img[static_cast<size_t>(t)];
    if (m.rows() != codomain.sides[static_cast<size_t>(t)] || m.cols() != m.rows()) {
      throw ShapeError("map image has wrong shape");
    }
  }
}

double flat_unital_defect(const FlatElement& img) {
  double d = 0.0;
  for (const auto& m : img) d = std::max(d, operator_norm(m - Mat::Identity(m.rows(), m.cols())));
  return d;
}

}  // namespace

LinearMapTable LinearMapTable::from_map(const LinearMap& map) {
  LinearMapTable t;
  t.domain_ = map.domain;
  t.codomain_ = map.codomain;
  for (int s = 0; s < map.domain.summands(); ++s) {
    const int m = map.domain.sides[static_cast<size_t>(s)];
    std::vector<FlatElement> imgs;
    imgs.reserve(static_cast<size_t>(m * m));
    for (int p = 0; p < m; ++p) {
      for (int q = 0; q < m; ++q) {
        FlatElement img = map(matrix_unit(map.domain, s, p, q));
        check_image_shape(img, map.codomain);
        if (flat_is_zero(img)) img.clear();
        imgs.push_back(std::move(img));
      }
    }
    t.images_.push_back(std::move(imgs));
  }
  return t;
}

const FlatElement& LinearMapTable::image(int summand, int p, int q) const {
  const int m = domain_.sides[static_cast<size_t>(summand)];
  return images_[static_cast<size_t>(summand)][static_cast<size_t>(p * m + q)];
}

FlatElement LinearMapTable::apply(const FlatElement& x) const {
  if (static_cast<int>(x.size()) != domain_.summands()) throw ShapeError("table applied to wrong shape");
  FlatElement out = flat_zero(codomain_);
  for (int s = 0; s < domain_.summands(); ++s) {
    const int m = domain_.sides[static_cast<size_t>(s)];
    const Mat& xs = x[static_cast<size_t>(s)];
    if (xs.rows() != m || xs.cols() != m) throw ShapeError("table applied to wrong shape");
    for (int p = 0; p < m; ++p) {
      for (int q = 0; q < m; ++q) {
        const cplx c = xs(p, q);
        if (c == 0.0) continue;
        const FlatElement& img = image(s, p, q);
        for (size_t t = 0; t < img.size(); ++t) out[t] += c * img[t];
      }
    }
  }
  return out;
}

LinearMap LinearMapTable::as_map() const {
  auto self = std::make_shared<LinearMapTable>(*this);
  return LinearMap{domain_, codomain_, [self](const FlatElement& x) { return self->apply(x); }};
}

const char* method_name(CPReport::Method m) { return m == CPReport::Method::choi ? "choi" : "probe"; }

int choi_side(const FlatShape& domain, const FlatShape& codomain) {
  int side = 0;
  for (int m : domain.sides) {
    for (int c : codomain.sides) side = std::max(side, m * c);
  }
  return side;
}

namespace {

// Entries below this magnitude do not connect Choi components; their
// Frobenius mass is subtracted from the reported eigenvalue instead.
constexpr double kChoiDropTol = 1e-14;

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(static_cast<size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
  }
};

}  // namespace

CPReport choi_cp_check(const LinearMap& map, const Tolerances& tol, int choi_cap) {
  const int side = choi_side(map.domain, map.codomain);
  if (side > choi_cap) {
    throw ChoiCapExceeded("Choi side " + std::to_string(side) + " exceeds cap " +
                          std::to_string(choi_cap) + "; use positivity_probe");
  }
  CPReport rep;
  rep.method = CPReport::Method::choi;
  rep.choi_side = side;
  double min_eig = std::numeric_limits<double>::infinity();
  double herm = 0.0;
  double dropped_sq = 0.0;

  for (int s = 0; s < map.domain.summands(); ++s) {
    const int m = map.domain.sides[static_cast<size_t>(s)];
    // Images are computed once per summand and reused for every codomain summand.
    std::vector<FlatElement> imgs;
    imgs.reserve(static_cast<size_t>(m * m));
    for (int p = 0; p < m; ++p) {
      for (int q = 0; q < m; ++q) {
        FlatElement img = map(matrix_unit(map.domain, s, p, q));
        check_image_shape(img, map.codomain);
        if (flat_is_zero(img)) img.clear();
        imgs.push_back(std::move(img));
      }
    }
    for (int t = 0; t < map.codomain.summands(); ++t) {
      const int c = map.codomain.sides[static_cast<size_t>(t)];
      const int n = m * c;
      DisjointSets sets(n);
      for (int p = 0; p < m; ++p) {
        for (int q = 0; q < m; ++q) {
          const FlatElement& img = imgs[static_cast<size_t>(p * m + q)];
          if (img.empty()) continue;
          const Mat& v = img[static_cast<size_t>(t)];
          for (int b = 0; b < c; ++b) {
            for (int a = 0; a < c; ++a) {
              if (std::abs(v(a, b)) > kChoiDropTol) sets.unite(p * c + a, q * c + b);
            }
          }
        }
      }
      std::vector<int> comp_of(static_cast<size_t>(n));
      std::vector<int> local(static_cast<size_t>(n));
      std::vector<int> comp_size;
      std::vector<int> root_to_comp(static_cast<size_t>(n), -1);
      for (int x = 0; x < n; ++x) {
        const int r = sets.find(x);
        int& id = root_to_comp[static_cast<size_t>(r)];
        if (id < 0) {
          id = static_cast<int>(comp_size.size());
          comp_size.push_back(0);
        }
        comp_of[static_cast<size_t>(x)] = id;
        local[static_cast<size_t>(x)] = comp_size[static_cast<size_t>(id)]++;
      }
      std::vector<Mat> comps;
      comps.reserve(comp_size.size());
      for (int sz : comp_size) comps.push_back(Mat::Zero(sz, sz));
      for (int p = 0; p < m; ++p) {
        for (int q = 0; q < m; ++q) {
          const FlatElement& img = imgs[static_cast<size_t>(p * m + q)];
          if (img.empty()) continue;
          const Mat& v = img[static_cast<size_t>(t)];
          for (int b = 0; b < c; ++b) {
            for (int a = 0; a < c; ++a) {
              const cplx val = v(a, b);
              if (val == 0.0) continue;
              const int x = p * c + a;
              const int y = q * c + b;
              const int cx = comp_of[static_cast<size_t>(x)];
              if (cx == comp_of[static_cast<size_t>(y)]) {
                comps[static_cast<size_t>(cx)](local[static_cast<size_t>(x)], local[static_cast<size_t>(y)]) = val;
              } else {
                dropped_sq += std::norm(val);
              }
            }
          }
        }
      }
      for (const Mat& cm : comps) {
        herm = std::max(herm, hermitian_defect(cm));
        min_eig = std::min(min_eig, min_hermitian_eigenvalue(cm));
      }
    }
  }
  const FlatElement one = map(flat_identity(map.domain));
  rep.min_eigenvalue = min_eig - std::sqrt(dropped_sq);
  rep.hermitian_defect = herm;
  rep.unital_defect = flat_unital_defect(one);
  rep.norm_bound = flat_norm(one);
  rep.pass = herm <= tol.eq_tol && rep.min_eigenvalue >= -tol.psd_tol;
  return rep;
}

CPReport choi_cp_check(const LinearMapTable& table, const Tolerances& tol, int choi_cap) {
  return choi_cp_check(table.as_map(), tol, choi_cap);
}

CPReport positivity_probe(const LinearMap& map, int k, int trials, std::uint64_t seed,
                          const Tolerances& tol) {
  if (k < 1) throw ConfigError("probe amplification k must be >= 1");
  CPReport rep;
  rep.method = CPReport::Method::probe;
  rep.trials = trials;
  rep.probe_k = k;
  double worst = std::numeric_limits<double>::infinity();
  double herm = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(trial));
    // One rank-one positive element per domain summand of M_k(domain).
    std::vector<Mat> states;
    for (int m : map.domain.sides) {
      Eigen::VectorXcd v = random_gaussian(k * m, 1, rng);
      v /= v.norm();
      states.push_back(v * v.adjoint());
    }
    std::vector<Mat> out;
    for (int c : map.codomain.sides) out.push_back(Mat::Zero(k * c, k * c));
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        FlatElement x;
        for (size_t s = 0; s < states.size(); ++s) {
          const int m = map.domain.sides[s];
          x.push_back(states[s].block(a * m, b * m, m, m));
        }
        const FlatElement y = map(x);
        check_image_shape(y, map.codomain);
        for (size_t t = 0; t < y.size(); ++t) {
          const int c = map.codomain.sides[t];
          out[t].block(a * c, b * c, c, c) = y[t];
        }
      }
    }
    for (const Mat& o : out) {
      herm = std::max(herm, hermitian_defect(o));
      worst = std::min(worst, min_hermitian_eigenvalue(o));
    }
  }
  const FlatElement one = map(flat_identity(map.domain));
  rep.min_eigenvalue = trials > 0 ? worst : 0.0;
  rep.hermitian_defect = herm;
  rep.unital_defect = flat_unital_defect(one);
  rep.norm_bound = flat_norm(one);
  rep.pass = herm <= tol.eq_tol && rep.min_eigenvalue >= -tol.psd_tol;
  return rep;
}

CPReport positivity_probe(const LinearMapTable& table, int k, int trials, std::uint64_t seed,
                          const Tolerances& tol) {
  return positivity_probe(table.as_map(), k, trials, seed, tol);
}

CPReport certify_cp(const LinearMap& map, const Tolerances& tol, int choi_cap, int probe_trials,
                    std::uint64_t seed) {
  if (choi_side(map.domain, map.codomain) <= choi_cap) return choi_cp_check(map, tol, choi_cap);
  return positivity_probe(map, 2, probe_trials, seed, tol);
}

}  // namespace pimsner
