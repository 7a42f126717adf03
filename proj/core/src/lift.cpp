#include "pimsner/lift.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace pimsner {

EInftyContext::EInftyContext(CorrespondencePtr corr, int K) : corr_(std::move(corr)), K_(K) {
  if (!corr_) throw ConfigError("context needs a correspondence");
  if (K_ < 0 || K_ > corr_->max_degree()) throw ConfigError("level outside the tower cache");
}

void EInftyContext::check_vector(const AMatrix& x) const {
  if (!(x.spec() == corr_->algebra()) || x.cols() != b_rank() || x.rows() % b_rank() != 0) {
    throw ShapeError("not a vector of E (x) B at this level");
  }
}

AMatrix EInftyContext::embed(const AMatrix& xi, const AMatrix& b) const {
  if (xi.cols() != 1) throw ShapeError("embed: xi must be a column");
  if (b.rows() != b_rank() || b.cols() != b_rank()) throw ShapeError("embed: b must lie in B");
  return corr_->amplify(xi, K_) * b;
}

AMatrix EInftyContext::right_inner(const AMatrix& x, const AMatrix& y) const {
  check_vector(x);
  check_vector(y);
  return x.adjoint() * y;
}

AMatrix EInftyContext::left_inner(const AMatrix& x, const AMatrix& y) const {
  check_vector(x);
  check_vector(y);
  return x * y.adjoint();
}

double EInftyContext::bimodule_defect(const AMatrix& x, const AMatrix& y, const AMatrix& z) const {
  return (x * right_inner(y, z)).max_abs_diff(left_inner(x, y) * z);
}

AMatrix einfty_inner(const EInftyContext& ctx, const AMatrix& x, const AMatrix& y, InnerSide side) {
  return side == InnerSide::right ? ctx.right_inner(x, y) : ctx.left_inner(x, y);
}

GradedOperator pi_i(CorrespondencePtr corr, int i, const AMatrix& T, FockWindow window) {
  if (i < 0 || i > window.hi) throw ShapeError("pi_i: degree outside window");
  GradedOperator g(corr, window, 0);
  if (T.rows() != g.rank(i) || T.cols() != g.rank(i)) throw ShapeError("pi_i: T must act on E^i");
  AMatrix cur = T;
  for (int j = i; j <= window.hi; ++j) {
    g.set_block(j, j, cur);
    if (j < window.hi) cur = corr->amplify1(cur);
  }
  return g;
}

GradedOperator toeplitz_infty(const EInftyContext& ctx, const AMatrix& mu, int r, const AMatrix& b,
                              const AMatrix& nu, int s, const AMatrix& c, FockWindow window) {
  const AMatrix x = ctx.embed(mu, b);
  const AMatrix y = ctx.embed(nu, c);
  return band_op(ctx.corr(), x * y.adjoint(), r, s, window, ctx.level());
}

GradedOperator eps_hat_graded(const GradedOperator& x) {
  GradedOperator out(x.corr(), x.window(), 0);
  for (const auto& [k, b] : x.blocks()) out.set_block(k.first, k.second, ex_entrywise(*x.corr(), x.level(), b));
  return out;
}

LiftDefect lift_defect(const EInftyContext& ctx, const AMatrix& mu, int r, const AMatrix& nu, int s,
                       const AMatrix& b, const AMatrix& c, int i, FockWindow window, double tol) {
  const auto& corr = ctx.corr();
  const int K = ctx.level();
  if (i < 0 || i > K) throw ConfigError("lift_defect needs 0 <= i <= K");
  if (window.two_sided) throw ConfigError("lift_defect works on the one-sided Fock module");
  const AMatrix bB = corr->amplify(b, K - i);
  const AMatrix cB = corr->amplify(c, K - i);
  const GradedOperator lhs = eps_hat_graded(toeplitz_infty(ctx, mu, r, bB, nu, s, cB, window));
  const GradedOperator rhs =
      creation_op(corr, mu, r, window) * pi_i(corr, i, b * c.adjoint(), window) * creation_op(corr, nu, s, window).adjoint();
  LiftDefect res{lhs - rhs, {}, 0.0, 0.0, false};
  for (const auto& [key, blk] : res.defect.blocks()) {
    const double m = blk.max_abs();
    if (key.first - r != key.second - s) {
      res.off_band = std::max(res.off_band, m);
      continue;
    }
    const int k = key.first - r;
    if (k >= i) res.above_i = std::max(res.above_i, m);
    if (m > tol) res.support.push_back(k);
  }
  std::sort(res.support.begin(), res.support.end());
  res.pass = res.above_i <= tol && res.off_band <= tol &&
             std::all_of(res.support.begin(), res.support.end(), [i](int k) { return k < i; });
  return res;
}

BilateralLift bilateral_lift(CorrespondencePtr corr, const AMatrix& mu, int r, const AMatrix& nu, int s,
                             FockWindow window, double tol) {
  if (corr->n() != 1) throw ConfigError("bilateral_lift needs n = 1");
  if (!window.two_sided) throw ConfigError("bilateral_lift needs a two-sided window");
  const FockWindow half = FockWindow::one_sided(window.hi);
  const GradedOperator full = toeplitz_op(corr, mu, r, nu, s, window);
  GradedOperator lifted(corr, half, 0);
  for (const auto& [k, b] : full.blocks()) {
    if (k.first >= 0 && k.second >= 0) lifted.set_block(k.first, k.second, b);
  }
  GradedOperator toep = toeplitz_op(corr, mu, r, nu, s, half);
  BilateralLift res{lifted, toep, lifted.max_block_diff(toep), {}, {}, false};
  const GradedOperator diff = lifted - toep;
  for (const auto& [k, b] : diff.blocks()) {
    if (b.max_abs() > tol) res.differing_offsets.push_back(k.first - r);
  }
  std::sort(res.differing_offsets.begin(), res.differing_offsets.end());
  TailSymbol sym{r, s, rank_one(mu, nu), {}, 1.0, 0};
  res.tail = tail_compare(lifted, sym, tol);
  res.pass = res.max_deviation <= tol;
  return res;
}

LinearMap compression_lift_map(CorrespondencePtr corr, FockWindow window) {
  if (!window.two_sided) throw ConfigError("compression lift needs a two-sided window");
  return compress_map(std::move(corr), window, window.hi);
}

// ---------------------------------------------------------------------------

namespace {

struct Fnv {
  std::uint64_t h = 1469598103934665603ULL;
  void bytes(const void* p, size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 1099511628211ULL;
    }
  }
  void i(long long v) { bytes(&v, sizeof v); }
  void d(double v) {
    if (v == 0.0) v = 0.0;  // fold -0
    bytes(&v, sizeof v);
  }
  void m(const Mat& x) {
    i(x.rows());
    i(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      for (Eigen::Index r = 0; r < x.rows(); ++r) {
        d(x(r, c).real());
        d(x(r, c).imag());
      }
    }
  }
};

}  // namespace

std::uint64_t spec_fingerprint(const Correspondence& corr) {
  Fnv f;
  for (int d : corr.algebra().block_dims()) f.i(d);
  f.i(corr.n());
  for (const auto& b : corr.U().blocks()) f.m(b);
  for (const auto& a : corr.alphas()) {
    for (int p : a.perm()) f.i(p);
    for (int s = 0; s < corr.algebra().num_blocks(); ++s) f.m(a.unitary(s));
  }
  f.i(corr.max_degree());
  return f.h;
}

AMatrix generator_vector(const Correspondence& corr, int r, std::uint64_t seed) {
  return sample_unit_vector(corr.algebra(), corr.rank(r), seed);
}

CPAPCertificate cpap_certificate(CorrespondencePtr corr, int N, const std::vector<GeneratorSpec>& generators,
                                 FockWindow window, std::uint64_t seed, const CertificateOptions& opt) {
  window.validate(*corr);
  if (N < 0) throw ConfigError("N must be >= 0");
  if (N > window.hi) {
    throw ConfigError("window too small for N = " + std::to_string(N) + " (M = " + std::to_string(window.hi) + ")");
  }
  const auto& tol = corr->tolerances();
  CPAPCertificate cert;
  cert.spec_fingerprint = spec_fingerprint(*corr);
  cert.N = N;
  cert.window = window;
  cert.bilateral = window.two_sided;
  cert.tolerances = tol;
  cert.seed = seed;
  for (int d = 0; d <= N; ++d) cert.D += corr->rank(d);
  cert.flatten_dim = cert.D * corr->algebra().total_dim();

  const LinearMap down = compress_map(corr, window, N);
  const LinearMap up = psi_map(corr, window, N);
  for (const auto& [name, map] : {std::pair<const char*, const LinearMap*>{"down", &down}, {"up", &up}}) {
    FactorMapReport fm;
    fm.direction = name;
    fm.cp = certify_cp(*map, tol, opt.choi_cap, opt.probe_trials, seed);
    fm.norm = fm.cp.norm_bound;
    cert.factor_maps.push_back(fm);
  }

  bool ok = true;
  for (size_t gi = 0; gi < generators.size(); ++gi) {
    const GeneratorSpec gs = generators[gi];
    GeneratorResult res;
    res.r = gs.r;
    res.s = gs.s;
    res.seed = seed + 7919ULL * static_cast<std::uint64_t>(gi);
    if (gs.r > window.hi || gs.s > window.hi) throw ConfigError("generator degree exceeds window");
    const AMatrix mu = generator_vector(*corr, gs.r, res.seed);
    const AMatrix nu = generator_vector(*corr, gs.s, res.seed + 1);
    const AMatrix e = rank_one(mu, nu);
    int band = 0;
    if (cert.bilateral) {
      const PipelineResult p = w_n(corr, mu, gs.r, nu, gs.s, N, window);
      res.g_norm = p.input.norm();
      res.error = (p.output - p.input).norm();
      res.coeff_expected = schur_oracle(N, gs.r, gs.s, 0, Sided::two);
      res.coeff_measured = p.rows.empty() ? 0.0 : p.rows.front().measured;
      res.symbol_deviation = tail_compare(p.output, oracle_tail(N, gs.r, gs.s, e, Sided::two), tol.eq_tol).symbol_deviation;
      band = std::abs(gs.r - gs.s);
    } else {
      const PipelineResult p = v_n(corr, mu, gs.r, nu, gs.s, N, window);
      const TailSymbol oracle = oracle_tail(N, gs.r, gs.s, e, Sided::one);
      res.g_norm = p.input.norm();
      res.coeff_expected = schur_oracle(N, gs.r, gs.s, std::max(oracle.stabilization, 0), Sided::one);
      res.coeff_measured = p.rows.empty() ? 0.0 : p.rows.back().measured;
      res.symbol_deviation = tail_compare(p.output, oracle, tol.eq_tol).symbol_deviation;
      // Distance between the eventual blocks of V_N(g) and of g.
      for (const auto& row : p.rows) {
        if (row.l < oracle.stabilization) continue;
        const AMatrix O = p.output.block(gs.r + row.l, gs.s + row.l);
        const AMatrix G = p.input.block(gs.r + row.l, gs.s + row.l);
        res.error = std::max(res.error, (O - G).norm(tol.norm_rel_tol));
      }
      band = std::max(gs.r, gs.s);
    }
    res.bound = static_cast<double>(band) / (N + 1) * res.g_norm + tol.eq_tol;
    res.within_bound = res.error <= res.bound && res.symbol_deviation <= tol.eq_tol;
    ok = ok && res.within_bound;
    cert.generators.push_back(res);
  }
  for (const auto& fm : cert.factor_maps) ok = ok && fm.cp.pass && fm.norm <= 1.0 + 1e-8;
  cert.pass = ok;
  return cert;
}

FactorPair identity_pair(const FlatShape& shape) {
  auto id = [](const FlatElement& x) { return x; };
  return FactorPair{"identity", LinearMap{shape, shape, id}, LinearMap{shape, shape, id}};
}

FactorPair isometry_pair(const AlgebraSpec& spec, int p, int q, std::uint64_t seed) {
  if (q > p || q < 1) throw ConfigError("isometry_pair needs 1 <= q <= p");
  std::mt19937_64 rng(seed);
  std::vector<Mat> V;
  for (int d : spec.block_dims()) V.push_back(random_unitary(p * d, rng).leftCols(q * d));
  auto down = [V](const FlatElement& x) {
    FlatElement y;
    for (size_t s = 0; s < V.size(); ++s) y.push_back(V[s].adjoint() * x[s] * V[s]);
    return y;
  };
  auto up = [V](const FlatElement& y) {
    FlatElement x;
    for (size_t s = 0; s < V.size(); ++s) x.push_back(V[s] * y[s] * V[s].adjoint());
    return x;
  };
  return FactorPair{"isometry", LinearMap{flat_shape(spec, p), flat_shape(spec, q), down},
                    LinearMap{flat_shape(spec, q), flat_shape(spec, p), up}};
}

ComposedReport compose_certificates(const FactorPair& outer, const FactorPair& inner,
                                    const std::vector<FlatElement>& probes, const Tolerances& tol, int choi_cap) {
  if (!(outer.down.codomain == inner.down.domain) || !(inner.up.codomain == outer.up.domain)) {
    throw ShapeError("factor pairs do not chain");
  }
  ComposedReport rep{FactorPair{outer.name + "*" + inner.name, compose(inner.down, outer.down),
                                compose(outer.up, inner.up)},
                     {}, {}, {}, {}, 0.0, false};
  rep.down_cp = certify_cp(rep.pair.down, tol, choi_cap, 50, 1);
  rep.up_cp = certify_cp(rep.pair.up, tol, choi_cap, 50, 1);
  rep.outer_up_norm = flat_norm(outer.up(flat_identity(outer.up.domain)));
  bool ok = rep.down_cp.pass && rep.up_cp.pass;
  for (const auto& x : probes) {
    const FlatElement y = outer.down(x);
    const double outer_err = flat_norm(flat_sub(outer.up(y), x));
    const double inner_err = flat_norm(flat_sub(inner.up(inner.down(y)), y));
    const double err = flat_norm(flat_sub(rep.pair.up(rep.pair.down(x)), x));
    const double bound = outer_err + rep.outer_up_norm * inner_err;
    rep.errors.push_back(err);
    rep.bounds.push_back(bound);
    ok = ok && err <= bound + tol.eq_tol;
  }
  rep.pass = ok;
  return rep;
}

}  // namespace pimsner
