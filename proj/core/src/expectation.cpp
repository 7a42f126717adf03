#include "pimsner/expectation.hpp"

#include <algorithm>
#include <sstream>

namespace pimsner {

AElement ex_trace(const Correspondence& corr, const AMatrix& x) {
  const int n = corr.n();
  if (x.rows() != n || x.cols() != n) throw ShapeError("ex_trace takes an n x n matrix");
  AElement acc = AElement::zero(corr.algebra());
  for (int i = 0; i < n; ++i) acc += x.entry(i, i);
  return cplx(1.0 / n) * acc;
}

AMatrix embed_jk(const Correspondence& corr, int k, const AMatrix& T) {
  const int m = corr.rank(k);
  if (T.rows() != m || T.cols() != m) throw ShapeError("embed_jk: T must be n^k x n^k");
  return corr.amplify1(T);
}

AMatrix ex1_entrywise(const Correspondence& corr, const AMatrix& x) {
  const int n = corr.n();
  if (x.rows() % n != 0 || x.cols() % n != 0) throw ShapeError("ex1_entrywise: sides must be multiples of n");
  const AlgebraSpec& spec = corr.algebra();
  const int p = x.rows() / n;
  const int q = x.cols() / n;
  const int B = spec.num_blocks();

  // Y = (1 (x) U) x (1 (x) U)^*, blockwise per summand.
  std::vector<Mat> Y;
  for (int u = 0; u < B; ++u) {
    const int nd = n * spec.dim(u);
    const Mat& Uu = corr.U().block(u);
    const Mat& xu = x.block(u);
    Mat y(xu.rows(), xu.cols());
    for (int a = 0; a < p; ++a) {
      for (int b = 0; b < q; ++b) y.block(a * nd, b * nd, nd, nd) = Uu * xu.block(a * nd, b * nd, nd, nd) * Uu.adjoint();
    }
    Y.push_back(std::move(y));
  }

  // Output summand t collects alpha_i^{-1} of the diagonal entries (i, i):
  // alpha_i^{-1}(y)_t = V_{i,perm_i(t)} y_{perm_i(t)} V_{i,perm_i(t)}^*.
  std::vector<Mat> out;
  for (int t = 0; t < B; ++t) {
    const int d = spec.dim(t);
    Mat o = Mat::Zero(p * d, q * d);
    for (int i = 0; i < n; ++i) {
      const Automorphism& alpha = corr.alphas()[static_cast<size_t>(i)];
      const int u = alpha.perm()[static_cast<size_t>(t)];
      const Mat& V = alpha.unitary(u);
      const int nd = n * d;
      for (int a = 0; a < p; ++a) {
        for (int b = 0; b < q; ++b) {
          o.block(a * d, b * d, d, d) += V * Y[static_cast<size_t>(u)].block(a * nd + i * d, b * nd + i * d, d, d) * V.adjoint();
        }
      }
    }
    out.push_back(o / static_cast<double>(n));
  }
  return AMatrix(spec, p, q, std::move(out));
}

AMatrix ex_entrywise(const Correspondence& corr, int K, const AMatrix& x) {
  if (K < 0) throw ShapeError("negative level");
  AMatrix y = x;
  for (int i = 0; i < K; ++i) y = ex1_entrywise(corr, y);
  return y;
}

AElement ex_k(const Correspondence& corr, int k, const AMatrix& x) {
  const int m = corr.rank(k);
  if (x.rows() != m || x.cols() != m) throw ShapeError("ex_k: x must be n^k x n^k");
  return ex_entrywise(corr, k, x).entry(0, 0);
}

LinearMap ex_map(const Correspondence& corr, int k) {
  const AlgebraSpec spec = corr.algebra();
  const int m = corr.rank(k);
  const Correspondence* c = &corr;
  return LinearMap{flat_shape(spec, m), flat_shape(spec, 1), [c, spec, k, m](const FlatElement& x) {
                     return ex_k(*c, k, AMatrix(spec, m, m, x)).blocks();
                   }};
}

AMatrix eps_bar(const Correspondence& corr, int K, const AMatrix& zeta) {
  const int b = corr.rank(K);
  if (zeta.cols() != b || zeta.rows() % b != 0) throw ShapeError("eps_bar: zeta must be (n^m n^K) x n^K");
  return ex_entrywise(corr, K, zeta);
}

AMatrix eps_hat(const Correspondence& corr, int K, const AMatrix& T) {
  const int b = corr.rank(K);
  if (T.rows() % b != 0 || T.cols() != T.rows()) throw ShapeError("eps_hat: T must be square over B");
  return ex_entrywise(corr, K, T);
}

LinearMap eps_hat_map(const Correspondence& corr, int K, int m) {
  const AlgebraSpec spec = corr.algebra();
  const int side = m * corr.rank(K);
  const Correspondence* c = &corr;
  return LinearMap{flat_shape(spec, side), flat_shape(spec, m), [c, spec, K, side](const FlatElement& x) {
                     return eps_hat(*c, K, AMatrix(spec, side, side, x)).blocks();
                   }};
}

namespace {

AMatrix sample_square(const AlgebraSpec& spec, int m, std::uint64_t seed) { return sample_amatrix(spec, m, m, seed); }

}  // namespace

CondExpReport verify_cond_exp(const Correspondence& corr, int K, const CondExpOptions& opt) {
  const auto& spec = corr.algebra();
  const auto& tol = corr.tolerances();
  const int m = corr.rank(K);
  CondExpReport rep;
  auto add = [&rep, K](std::string axiom, double dev, bool pass, std::string witness) {
    rep.results.push_back(AxiomResult{std::move(axiom), K, dev, pass, pass ? std::string() : std::move(witness)});
  };
  auto seed_of = [&opt](int i, int salt) { return opt.seed + 1000003ULL * static_cast<std::uint64_t>(salt) + static_cast<std::uint64_t>(i); };

  // (i) Ex_K o phi_K = id, on the basis and on samples.
  {
    double dev = 0.0;
    std::string witness;
    std::vector<AElement> as;
    for (int b = 0; b < spec.linear_dim(); ++b) as.push_back(AElement::basis(spec, b));
    for (int i = 0; i < opt.samples; ++i) as.push_back(sample(spec, SampleKind::element, seed_of(i, 1)));
    for (size_t i = 0; i < as.size(); ++i) {
      const double d = ex_k(corr, K, corr.amplify(AMatrix::from_element(as[i]), K)).max_abs_diff(as[i]);
      if (d > dev) {
        dev = d;
        witness = "input #" + std::to_string(i);
      }
    }
    add("Ex_K o phi_K = id", dev, dev <= tol.eq_tol, witness);
  }

  // (ii) Ex_K(phi_K(a) x phi_K(b)) = a Ex_K(x) b.
  {
    double dev = 0.0;
    std::string witness;
    for (int i = 0; i < opt.samples; ++i) {
      const AElement a = sample(spec, SampleKind::element, seed_of(i, 2));
      const AElement b = sample(spec, SampleKind::element, seed_of(i, 3));
      const AMatrix x = sample_square(spec, m, seed_of(i, 4));
      const AMatrix pa = corr.amplify(AMatrix::from_element(a), K);
      const AMatrix pb = corr.amplify(AMatrix::from_element(b), K);
      const double d = ex_k(corr, K, pa * x * pb).max_abs_diff(a * ex_k(corr, K, x) * b);
      if (d > dev) {
        dev = d;
        witness = "sample " + std::to_string(i);
      }
    }
    add("bimodule property", dev, dev <= tol.eq_tol, witness);
  }

  // (iii) Ex_K(x^* x) - Ex_K(x)^* Ex_K(x) >= 0. The recorded deviation is the
  // negative part of the smallest eigenvalue.
  {
    double worst = 0.0;
    std::string witness;
    for (int i = 0; i < opt.samples; ++i) {
      const AMatrix x = sample_square(spec, m, seed_of(i, 5));
      const AElement e = ex_k(corr, K, x);
      const AElement gap = ex_k(corr, K, x.adjoint() * x) - e.adjoint() * e;
      const double neg = std::max(0.0, -gap.min_eigenvalue());
      const double herm = gap.hermitian_defect();
      const double d = std::max(neg, herm);
      if (d > worst) {
        worst = d;
        witness = "sample " + std::to_string(i);
      }
    }
    add("Schwarz inequality", worst, worst <= tol.psd_tol, witness);
  }

  // (iv) Ex_{K+1}(T (x) 1) = Ex_K(T).
  if (K + 1 <= corr.max_degree()) {
    double dev = 0.0;
    std::string witness;
    for (int i = 0; i < opt.samples; ++i) {
      const AMatrix T = sample_square(spec, m, seed_of(i, 6));
      const double d = ex_k(corr, K + 1, embed_jk(corr, K, T)).max_abs_diff(ex_k(corr, K, T));
      if (d > dev) {
        dev = d;
        witness = "sample " + std::to_string(i);
      }
    }
    add("tower compatibility", dev, dev <= tol.eq_tol, witness);
  }

  // (v) complete positivity, unitality and contractivity.
  {
    const LinearMap map = ex_map(corr, K);
    const CPReport cp = certify_cp(map, tol, opt.choi_cap, opt.probe_trials, opt.seed);
    std::ostringstream w;
    w << method_name(cp.method) << " min eigenvalue " << cp.min_eigenvalue;
    add("completely positive", std::max(0.0, -cp.min_eigenvalue), cp.pass, w.str());
    add("unital", cp.unital_defect, cp.unital_defect <= tol.eq_tol, "||Ex_K(1) - 1||");
    // A unital CP map has norm ||Ex_K(1)|| = 1; also check sampled ratios.
    double ratio = cp.norm_bound;
    for (int i = 0; i < opt.samples; ++i) {
      const AMatrix x = sample_square(spec, m, seed_of(i, 7));
      ratio = std::max(ratio, ex_k(corr, K, x).norm() / x.norm());
    }
    add("contractive", std::max(0.0, ratio - 1.0), ratio <= 1.0 + 1e-8, "norm ratio");
  }

  rep.pass = std::all_of(rep.results.begin(), rep.results.end(), [](const AxiomResult& r) { return r.pass; });
  return rep;
}

}  // namespace pimsner
