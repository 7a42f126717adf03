#pragma once

#include "lab/config.hpp"
#include "pimsner/lift.hpp"

#include <random>
#include <string>

namespace fixtures {

using namespace pimsner;

inline CorrespondencePtr preset(const std::string& name, int max_degree = -1) {
  lab::RunConfig c = lab::make_preset(name);
  c.max_degree = max_degree;
  c.resolve();
  return c.build();
}

// A = M_2 + C, n = 2, Haar U and inner automorphisms: nothing commutes,
// nothing is trivial.
inline CorrespondencePtr generic(std::uint64_t seed = 99, int max_degree = 4) {
  const AlgebraSpec spec({2, 1});
  std::mt19937_64 rng(seed);
  AMatrix U(spec, 2, 2, {random_unitary(4, rng), random_unitary(2, rng)});
  std::vector<Automorphism> alphas;
  for (int i = 0; i < 2; ++i) {
    alphas.push_back(Automorphism::inner(spec, {random_unitary(2, rng), random_unitary(1, rng)}));
  }
  return std::make_shared<const Correspondence>(spec, 2, U, alphas, max_degree);
}

// n = 1 over M_2 + M_2 with the summands swapped and twisted by a unitary.
inline CorrespondencePtr generic_bimodule(std::uint64_t seed = 5, int max_degree = 8) {
  const AlgebraSpec spec({2, 2});
  std::mt19937_64 rng(seed);
  AMatrix U(spec, 1, 1, {random_unitary(2, rng), random_unitary(2, rng)});
  std::vector<Automorphism> alphas{Automorphism(spec, {1, 0}, {random_unitary(2, rng), random_unitary(2, rng)})};
  return std::make_shared<const Correspondence>(spec, 1, U, alphas, max_degree);
}

inline double dense_diff(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return 1e300;
  return a.rows() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

}  // namespace fixtures
