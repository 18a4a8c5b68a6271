#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "torsionlab/linalg.hpp"
#include "torsionlab/operator.hpp"

namespace tltest {

inline tl::Mat random_matrix(std::mt19937_64& rng, tl::Index r, tl::Index c) {
  std::normal_distribution<double> n(0.0, 1.0);
  tl::Mat m(r, c);
  for (tl::Index i = 0; i < r; ++i)
    for (tl::Index j = 0; j < c; ++j) m(i, j) = tl::cplx(n(rng), n(rng));
  return m;
}

/// Random matrix with singular values in [lo, hi].
inline tl::Mat random_well_conditioned(std::mt19937_64& rng, tl::Index k, double lo = 0.5, double hi = 2.0) {
  Eigen::HouseholderQR<tl::Mat> q1(random_matrix(rng, k, k)), q2(random_matrix(rng, k, k));
  std::uniform_real_distribution<double> u(lo, hi);
  tl::RVec s(k);
  for (tl::Index i = 0; i < k; ++i) s(i) = u(rng);
  tl::Mat U = q1.householderQ(), V = q2.householderQ();
  return U * s.cast<tl::cplx>().asDiagonal() * V.adjoint();
}

inline tl::Mat random_unitary(std::mt19937_64& rng, tl::Index k) {
  Eigen::HouseholderQR<tl::Mat> q(random_matrix(rng, k, k));
  return q.householderQ();
}

/// e^{2πit} − 1 as a 1×1 trig symbol.
inline tl::Operator alpha_symbol() {
  return tl::Operator::trig_poly(1, 1, {{0, tl::Mat::Constant(1, 1, -1.0)}, {1, tl::Mat::Constant(1, 1, 1.0)}});
}

}  // namespace tltest
