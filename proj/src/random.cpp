#include "torsionlab/random.hpp"

#include "torsionlab/errors.hpp"

namespace tl {

Mat gaussian_matrix(Rng& rng, Index rows, Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = cplx(n(rng), n(rng));
  return m;
}

Mat well_conditioned_matrix(Rng& rng, Index k, double lo, double hi) {
  Eigen::HouseholderQR<Mat> q1(gaussian_matrix(rng, k, k)), q2(gaussian_matrix(rng, k, k));
  std::uniform_real_distribution<double> u(lo, hi);
  RVec s(k);
  for (Index i = 0; i < k; ++i) s(i) = u(rng);
  Mat U = q1.householderQ(), V = q2.householderQ();
  return U * s.cast<cplx>().asDiagonal() * V.adjoint();
}

HilbertComplex random_complex(Rng& rng, const std::vector<Index>& dims) {
  require(!dims.empty(), ErrorKind::InvalidArgument, "random_complex: no modules");
  std::vector<Operator> d;
  Mat prev = Mat::Zero(dims[0], 0);
  for (std::size_t q = 0; q + 1 < dims.size(); ++q) {
    // Orthonormal basis of range(d_{q−1})^⊥, so d_q is exactly zero when that complement is empty.
    Index r = prev.size() ? count_above(singular_values(prev), kSigmaTol * op_norm(prev)) : 0;
    Mat w = Mat::Zero(dims[q], dims[q] - r);
    if (prev.cols() > 0 && r > 0) {
      Eigen::JacobiSVD<Mat> svd(prev, Eigen::ComputeFullU);
      w = svd.matrixU().rightCols(dims[q] - r);
    } else {
      w = Mat::Identity(dims[q], dims[q]);
    }
    Mat dq = gaussian_matrix(rng, dims[q + 1], dims[q] - r) * w.adjoint();
    d.push_back(Operator::scalar(dq));
    prev = dq;
  }
  return HilbertComplex(Algebra::Scalar, dims, std::move(d));
}

HilbertComplex random_acyclic_complex(Rng& rng, const std::vector<Index>& ranks) {
  std::size_t n = ranks.size();
  std::vector<Index> dims;
  for (std::size_t q = 0; q <= n; ++q) dims.push_back((q > 0 ? ranks[q - 1] : 0) + (q < n ? ranks[q] : 0));
  std::vector<Mat> g, ginv;
  for (Index k : dims) {
    Mat m = well_conditioned_matrix(rng, k);
    g.push_back(m);
    ginv.push_back(m.inverse());
  }
  std::vector<Operator> d;
  for (std::size_t q = 0; q < n; ++q) {
    // Canonical form: the ℂ^{r_q} summand of C_q maps isomorphically onto the ℂ^{r_q} summand of C_{q+1}.
    Index a = q > 0 ? ranks[q - 1] : 0, r = ranks[q];
    Mat canon = Mat::Zero(dims[q + 1], dims[q]);
    canon.block(0, a, r, r) = well_conditioned_matrix(rng, r);
    d.push_back(Operator::scalar(g[q + 1] * canon * ginv[q]));
  }
  return HilbertComplex(Algebra::Scalar, dims, std::move(d));
}

std::vector<Index> random_dims(Rng& rng, int max_len, Index max_dim) {
  std::uniform_int_distribution<int> len(1, max_len);
  std::uniform_int_distribution<Index> dim(0, max_dim);
  std::vector<Index> dims(static_cast<std::size_t>(len(rng)) + 1);
  for (auto& k : dims) k = dim(rng);
  return dims;
}

}  // namespace tl
