#include "pimsner/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

namespace pimsner {

int FockWindow::default_hi(int n) {
  if (n <= 1) return 10;
  if (n == 2) return 6;
  return 4;
}

void FockWindow::validate(const Correspondence& corr) const {
  if (lo > 0 || hi < 0) throw ConfigError("window must satisfy lo <= 0 <= hi");
  if (two_sided && corr.n() != 1) throw ConfigError("two-sided windows need n = 1");
  if (!two_sided && lo != 0) throw ConfigError("one-sided windows start at degree 0");
  if (hi > corr.max_degree()) {
    throw ConfigError("window top degree " + std::to_string(hi) + " exceeds max_degree " +
                      std::to_string(corr.max_degree()));
  }
}

GradedOperator::GradedOperator(CorrespondencePtr corr, FockWindow window, int level)
    : corr_(std::move(corr)), window_(window), level_(level) {
  if (!corr_) throw ConfigError("graded operator needs a correspondence");
  if (level_ < 0) throw ConfigError("negative level");
  window_.validate(*corr_);
}

GradedOperator GradedOperator::identity(CorrespondencePtr corr, FockWindow window, int level) {
  return projection(std::move(corr), window, window.lo, window.hi, level);
}

GradedOperator GradedOperator::projection(CorrespondencePtr corr, FockWindow window, int a, int b, int level) {
  GradedOperator g(std::move(corr), window, level);
  for (int d = std::max(a, window.lo); d <= std::min(b, window.hi); ++d) {
    g.set_block(d, d, AMatrix::identity(g.corr_->algebra(), g.rank(d)));
  }
  return g;
}

GradedOperator GradedOperator::from_amatrix(CorrespondencePtr corr, FockWindow window, int level, const AMatrix& x) {
  GradedOperator g(std::move(corr), window, level);
  if (x.rows() != g.total_rank() || x.cols() != g.total_rank()) throw ShapeError("from_amatrix: wrong size");
  for (int i = window.lo; i <= window.hi; ++i) {
    for (int j = window.lo; j <= window.hi; ++j) {
      AMatrix b = x.sub(g.offset(i), g.offset(j), g.rank(i), g.rank(j));
      if (!b.is_zero()) g.blocks_.emplace(BlockKey{i, j}, std::move(b));
    }
  }
  return g;
}

int GradedOperator::rank(int degree) const {
  if (corr_->n() == 1) return 1;
  return corr_->rank(degree + level_);
}

int GradedOperator::total_rank() const {
  int t = 0;
  for (int d = window_.lo; d <= window_.hi; ++d) t += rank(d);
  return t;
}

int GradedOperator::offset(int degree) const {
  int t = 0;
  for (int d = window_.lo; d < degree; ++d) t += rank(d);
  return t;
}

AMatrix GradedOperator::block(int i, int j) const {
  auto it = blocks_.find({i, j});
  if (it != blocks_.end()) return it->second;
  return AMatrix(corr_->algebra(), rank(i), rank(j));
}

void GradedOperator::set_block(int i, int j, AMatrix x) {
  if (!window_.contains(i) || !window_.contains(j)) {
    throw ShapeError("block (" + std::to_string(i) + "," + std::to_string(j) + ") outside window");
  }
  if (x.rows() != rank(i) || x.cols() != rank(j)) {
    throw ShapeError("block (" + std::to_string(i) + "," + std::to_string(j) + ") has wrong shape");
  }
  blocks_.insert_or_assign(BlockKey{i, j}, std::move(x));
}

void GradedOperator::add_block(int i, int j, const AMatrix& x) {
  auto it = blocks_.find({i, j});
  if (it == blocks_.end()) {
    set_block(i, j, x);
  } else {
    it->second += x;
  }
}

void GradedOperator::check_compatible(const GradedOperator& y, const char* what) const {
  if (corr_ != y.corr_ || !(window_ == y.window_) || level_ != y.level_) {
    throw ShapeError(std::string("incompatible graded operators in ") + what);
  }
}

GradedOperator GradedOperator::adjoint() const {
  GradedOperator g(corr_, window_, level_);
  for (const auto& [k, b] : blocks_) g.blocks_.emplace(BlockKey{k.second, k.first}, b.adjoint());
  return g;
}

GradedOperator& GradedOperator::operator+=(const GradedOperator& y) {
  check_compatible(y, "addition");
  for (const auto& [k, b] : y.blocks_) add_block(k.first, k.second, b);
  return *this;
}

GradedOperator& GradedOperator::operator-=(const GradedOperator& y) {
  check_compatible(y, "subtraction");
  for (const auto& [k, b] : y.blocks_) add_block(k.first, k.second, cplx(-1.0) * b);
  return *this;
}

GradedOperator& GradedOperator::operator*=(cplx c) {
  for (auto& [k, b] : blocks_) b *= c;
  return *this;
}

AMatrix GradedOperator::to_amatrix() const {
  AMatrix out(corr_->algebra(), total_rank(), total_rank());
  for (const auto& [k, b] : blocks_) out.set_sub(offset(k.first), offset(k.second), b);
  return out;
}

std::vector<int> GradedOperator::band_offsets() const {
  std::set<int> s;
  for (const auto& [k, b] : blocks_) s.insert(k.second - k.first);
  return {s.begin(), s.end()};
}

double GradedOperator::norm() const {
  if (blocks_.empty()) return 0.0;
  if (band_offsets().size() == 1) {
    double m = 0.0;
    for (const auto& [k, b] : blocks_) m = std::max(m, b.norm(corr_->tolerances().norm_rel_tol));
    return m;
  }
  return to_amatrix().norm(corr_->tolerances().norm_rel_tol);
}

double GradedOperator::max_block_diff(const GradedOperator& y) const {
  check_compatible(y, "comparison");
  double m = 0.0;
  for (const auto& [k, b] : blocks_) {
    auto it = y.blocks_.find(k);
    m = std::max(m, it == y.blocks_.end() ? b.max_abs() : b.max_abs_diff(it->second));
  }
  for (const auto& [k, b] : y.blocks_) {
    if (!blocks_.count(k)) m = std::max(m, b.max_abs());
  }
  return m;
}

double GradedOperator::max_abs() const {
  double m = 0.0;
  for (const auto& [k, b] : blocks_) m = std::max(m, b.max_abs());
  return m;
}

GradedOperator operator+(GradedOperator x, const GradedOperator& y) { return x += y; }
GradedOperator operator-(GradedOperator x, const GradedOperator& y) { return x -= y; }
GradedOperator operator*(cplx c, GradedOperator x) { return x *= c; }

GradedOperator operator*(const GradedOperator& x, const GradedOperator& y) {
  if (x.corr() != y.corr() || !(x.window() == y.window()) || x.level() != y.level()) {
    throw ShapeError("incompatible graded operators in product");
  }
  GradedOperator out(x.corr(), x.window(), x.level());
  std::multimap<int, std::pair<int, const AMatrix*>> by_row;
  for (const auto& [k, b] : y.blocks()) by_row.emplace(k.first, std::make_pair(k.second, &b));
  for (const auto& [k, a] : x.blocks()) {
    auto range = by_row.equal_range(k.second);
    for (auto it = range.first; it != range.second; ++it) {
      out.add_block(k.first, it->second.first, a * *it->second.second);
    }
  }
  return out;
}

GradedOperator band_op(CorrespondencePtr corr, const AMatrix& e, int r, int s, FockWindow window, int level) {
  GradedOperator g(corr, window, level);
  if (e.rows() != g.rank(r) || e.cols() != g.rank(s)) throw ShapeError("band_op: generator shape does not match degrees");
  if (r < 0 || s < 0) throw ShapeError("band_op: negative generator degree");
  AMatrix cur = e;
  for (int k = 0; r + k <= window.hi && s + k <= window.hi; ++k) {
    g.set_block(r + k, s + k, cur);
    cur = corr->amplify1(cur);
  }
  if (window.two_sided) {
    cur = e;
    for (int k = -1; r + k >= window.lo && s + k >= window.lo; --k) {
      cur = corr->amplify(cur, -1);
      if (r + k <= window.hi && s + k <= window.hi) g.set_block(r + k, s + k, cur);
    }
  }
  return g;
}

GradedOperator creation_op(CorrespondencePtr corr, const AMatrix& mu, int r, FockWindow window) {
  if (mu.cols() != 1) throw ShapeError("creation_op takes a column vector");
  if (window.two_sided && corr->n() != 1) throw ConfigError("two-sided creation operators need n = 1");
  return band_op(std::move(corr), mu, r, 0, window);
}

GradedOperator toeplitz_op(CorrespondencePtr corr, const AMatrix& mu, int r, const AMatrix& nu, int s,
                           FockWindow window) {
  if (r > window.hi || s > window.hi) throw ShapeError("toeplitz_op: generator degree exceeds window");
  return band_op(std::move(corr), rank_one(mu, nu), r, s, window);
}

GradedOperator compress(const GradedOperator& x, int N) {
  if (N < 0 || N > x.window().hi) throw ShapeError("compress: N out of range");
  GradedOperator g(x.corr(), x.window(), x.level());
  for (const auto& [k, b] : x.blocks()) {
    if (k.first >= 0 && k.first <= N && k.second >= 0 && k.second <= N) g.set_block(k.first, k.second, b);
  }
  return g;
}

GradedOperator psi_amplify(const GradedOperator& x, int N) {
  const FockWindow w = x.window();
  if (N < 0 || N > w.hi) throw ShapeError("psi_amplify: N out of range");
  for (const auto& [k, b] : x.blocks()) {
    if (k.first < 0 || k.first > N || k.second < 0 || k.second > N) {
      throw ShapeError("psi_amplify: input not supported in [0, N]^2");
    }
  }
  const auto& corr = x.corr();
  GradedOperator out(corr, w, x.level());
  for (int delta : x.band_offsets()) {
    // S_{a,b} = x_{a,b} + S_{a-1,b-1} (x) 1_E along the diagonal b - a = delta.
    const int a0 = std::max(w.lo, w.lo - delta);
    const int a1 = std::min(w.hi, w.hi - delta);
    std::optional<AMatrix> S;
    for (int a = a0; a <= a1; ++a) {
      if (S) S = corr->amplify1(*S);
      if (x.has_block(a, a + delta)) {
        if (S) {
          *S += x.block(a, a + delta);
        } else {
          S = x.block(a, a + delta);
        }
      }
      if (S) out.add_block(a, a + delta, *S);
    }
    if (w.two_sided) {
      // Downward part, k < 0: T_{a,b} = beta^{-1}(T_{a+1,b+1}) without the k = 0 term.
      std::optional<AMatrix> T;
      for (int a = a1; a >= a0; --a) {
        if (T) {
          T = corr->amplify(*T, -1);
          out.add_block(a, a + delta, *T);
        }
        if (x.has_block(a, a + delta)) {
          if (T) {
            *T += x.block(a, a + delta);
          } else {
            T = x.block(a, a + delta);
          }
        }
      }
    }
  }
  out *= cplx(1.0 / (N + 1));
  return out;
}

namespace {

int section_rank(const Correspondence& corr, int N, int level) {
  int D = 0;
  for (int d = 0; d <= N; ++d) D += corr.n() == 1 ? 1 : corr.rank(d + level);
  return D;
}

}  // namespace

LinearMap compress_map(CorrespondencePtr corr, FockWindow window, int N, int level) {
  const GradedOperator proto(corr, window, level);
  if (N < 0 || N > window.hi) throw ShapeError("compress_map: N out of range");
  const int total = proto.total_rank();
  const int D = section_rank(*corr, N, level);
  const int off = proto.offset(0);
  const AlgebraSpec spec = corr->algebra();
  return LinearMap{flat_shape(spec, total), flat_shape(spec, D), [spec, total, D, off](const FlatElement& x) {
                     return AMatrix(spec, total, total, x).sub(off, off, D, D).blocks();
                   }};
}

LinearMap psi_map(CorrespondencePtr corr, FockWindow window, int N, int level) {
  const GradedOperator proto(corr, window, level);
  if (N < 0 || N > window.hi) throw ShapeError("psi_map: N out of range");
  const int total = proto.total_rank();
  const int D = section_rank(*corr, N, level);
  const int off = proto.offset(0);
  const AlgebraSpec spec = corr->algebra();
  return LinearMap{flat_shape(spec, D), flat_shape(spec, total),
                   [corr, window, level, spec, total, D, off, N](const FlatElement& x) {
                     AMatrix full(spec, total, total);
                     full.set_sub(off, off, AMatrix(spec, D, D, x));
                     const GradedOperator g = GradedOperator::from_amatrix(corr, window, level, full);
                     return psi_amplify(g, N).to_amatrix().blocks();
                   }};
}

// ---------------------------------------------------------------------------

Rational Rational::make(long long num, long long den) {
  if (den == 0) throw std::invalid_argument("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const long long g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num == 0) den = 1;
  return Rational{num, den};
}

const char* sided_name(Sided s) { return s == Sided::one ? "one" : "two"; }

Rational schur_oracle(int N, int r, int s, int l, Sided sided) {
  long long count = 0;
  if (sided == Sided::one) {
    for (int k = 0; k <= N - std::max(r, s); ++k) {
      if (k <= l) ++count;
    }
  } else {
    const int reach = N + r + s + 2;
    for (int k = -reach; k <= reach; ++k) {
      if (s + k >= 0 && r + k <= N && s + k <= N && r + k >= 0) ++count;
    }
  }
  return Rational::make(count, N + 1);
}

Rational printed_coefficient(int N, int r, int s) {
  if (r > N || s > N) return Rational{0, 1};
  return Rational::make(std::min(N - r, N - s), N + 1);
}

const char* SchurTable::csv_header() { return "N,r,s,l,expected_num,expected_den,measured,abs_err,sided"; }

std::string SchurTable::to_csv() const {
  std::ostringstream os;
  os << csv_header() << "\n";
  char buf[64];
  for (const auto& row : rows) {
    os << row.N << "," << row.r << "," << row.s << "," << row.l << "," << row.expected.num << ","
       << row.expected.den << ",";
    std::snprintf(buf, sizeof buf, "%.17g", row.measured);
    os << buf << ",";
    std::snprintf(buf, sizeof buf, "%.17g", row.abs_err);
    os << buf << "," << sided_name(row.sided) << "\n";
  }
  return os.str();
}

double SchurTable::max_abs_err() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.abs_err);
  return m;
}

namespace {

// Measures the coefficient of every representable band block of `out`
// against the generator band of `in`.
PipelineResult measure(GradedOperator in, GradedOperator out, int r, int s, int N, Sided sided) {
  PipelineResult res{std::move(in), std::move(out), {}, 0.0, 0.0};
  const FockWindow w = res.input.window();
  const int l0 = sided == Sided::one ? 0 : w.lo - std::min(r, s);
  for (int l = l0; r + l <= w.hi && s + l <= w.hi; ++l) {
    if (!res.input.has_block(r + l, s + l)) continue;
    const AMatrix G = res.input.block(r + l, s + l);
    const AMatrix O = res.output.block(r + l, s + l);
    const double gg = G.frobenius_dot(G).real();
    const double c = gg > 0.0 ? G.frobenius_dot(O).real() / gg : 0.0;
    res.residual = std::max(res.residual, O.max_abs_diff(cplx(c) * G));
    SchurRow row;
    row.N = N;
    row.r = r;
    row.s = s;
    row.l = l;
    row.expected = schur_oracle(N, r, s, l, sided);
    row.measured = c;
    row.abs_err = std::abs(c - row.expected.value());
    row.sided = sided;
    row.printed = printed_coefficient(N, r, s);
    res.rows.push_back(row);
  }
  for (const auto& [k, b] : res.output.blocks()) {
    if (k.first - r != k.second - s) res.off_band = std::max(res.off_band, b.max_abs());
  }
  return res;
}

}  // namespace

PipelineResult v_n(CorrespondencePtr corr, const AMatrix& mu, int r, const AMatrix& nu, int s, int N,
                   FockWindow window) {
  if (window.two_sided) throw ConfigError("v_n works on a one-sided window");
  if (N > window.hi) throw ConfigError("window too small for N = " + std::to_string(N));
  GradedOperator g = toeplitz_op(corr, mu, r, nu, s, window);
  GradedOperator out = psi_amplify(compress(g, N), N);
  return measure(std::move(g), std::move(out), r, s, N, Sided::one);
}

PipelineResult w_n(CorrespondencePtr corr, const AMatrix& mu, int r, const AMatrix& nu, int s, int N,
                   FockWindow window) {
  if (corr->n() != 1) throw ConfigError("w_n needs n = 1");
  if (!window.two_sided) throw ConfigError("w_n works on a two-sided window");
  if (N > window.hi) throw ConfigError("window too small for N = " + std::to_string(N));
  GradedOperator g = toeplitz_op(corr, mu, r, nu, s, window);
  GradedOperator out = psi_amplify(compress(g, N), N);
  return measure(std::move(g), std::move(out), r, s, N, Sided::two);
}

double TailSymbol::coeff(int l) const {
  if (l >= stabilization) return tail;
  auto it = coeffs.find(l);
  return it == coeffs.end() ? tail : it->second;
}

TailSymbol oracle_tail(int N, int r, int s, const AMatrix& e, Sided sided) {
  TailSymbol t{r, s, e, {}, 0.0, 0};
  if (sided == Sided::two) {
    t.tail = schur_oracle(N, r, s, 0, sided).value();
    t.stabilization = std::numeric_limits<int>::min();
    return t;
  }
  const int stab = std::max(0, N - std::max(r, s));
  for (int l = 0; l < stab; ++l) t.coeffs[l] = schur_oracle(N, r, s, l, sided).value();
  t.stabilization = stab;
  t.tail = schur_oracle(N, r, s, stab, sided).value();
  return t;
}

TailSymbol measured_tail(const PipelineResult& res, const AMatrix& e) {
  if (res.rows.empty()) throw ShapeError("measured_tail: no rows");
  TailSymbol t{res.rows.front().r, res.rows.front().s, e, {}, res.rows.back().measured, 0};
  int stab = res.rows.back().l;
  for (auto it = res.rows.rbegin(); it != res.rows.rend(); ++it) {
    if (std::abs(it->measured - t.tail) > 1e-12) break;
    stab = it->l;
  }
  t.stabilization = stab;
  for (const auto& row : res.rows) {
    if (row.l < stab) t.coeffs[row.l] = row.measured;
  }
  return t;
}

TailReport tail_compare(const GradedOperator& x, const TailSymbol& t, double tol) {
  const auto& corr = x.corr();
  const FockWindow w = x.window();
  if (t.e.rows() != x.rank(t.r) || t.e.cols() != x.rank(t.s)) {
    throw ShapeError("tail_compare: symbol does not match operator levels");
  }
  TailReport rep;
  const int l0 = w.two_sided ? w.lo - std::min(t.r, t.s) : 0;
  AMatrix G = corr->amplify(t.e, l0);
  for (int l = l0; t.r + l <= w.hi && t.s + l <= w.hi; ++l) {
    if (l > l0) G = corr->amplify1(G);
    if (!w.contains(t.r + l) || !w.contains(t.s + l)) continue;
    const AMatrix O = x.block(t.r + l, t.s + l);
    const double dev_tail = O.max_abs_diff(cplx(t.tail) * G);
    const double dev_sym = O.max_abs_diff(cplx(t.coeff(l)) * G);
    rep.symbol_deviation = std::max(rep.symbol_deviation, dev_sym);
    if (l >= t.stabilization) rep.tail_deviation = std::max(rep.tail_deviation, dev_sym);
    if (dev_tail > tol) rep.compact_offsets.push_back(l);
  }
  for (const auto& [k, b] : x.blocks()) {
    if (k.first - t.r != k.second - t.s) rep.off_band = std::max(rep.off_band, b.max_abs());
  }
  rep.pass = rep.tail_deviation <= tol && rep.off_band <= tol;
  return rep;
}

double shared_block_deviation(const GradedOperator& x, const GradedOperator& y) {
  if (x.corr() != y.corr() || x.level() != y.level()) throw ShapeError("shared_block_deviation: incompatible");
  const int lo = std::max(x.window().lo, y.window().lo);
  const int hi = std::min(x.window().hi, y.window().hi);
  auto inside = [lo, hi](const BlockKey& k) { return k.first >= lo && k.first <= hi && k.second >= lo && k.second <= hi; };
  double m = 0.0;
  for (const auto& [k, b] : x.blocks()) {
    if (!inside(k)) continue;
    m = std::max(m, y.has_block(k.first, k.second) ? b.max_abs_diff(y.block(k.first, k.second)) : b.max_abs());
  }
  for (const auto& [k, b] : y.blocks()) {
    if (inside(k) && !x.has_block(k.first, k.second)) m = std::max(m, b.max_abs());
  }
  return m;
}

}  // namespace pimsner
