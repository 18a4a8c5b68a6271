#pragma once

#include <Eigen/Dense>
#include <complex>

namespace tl {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative kernel threshold: singular values below kSigmaTol * (largest) count as zero.
inline constexpr double kSigmaTol = 1e-12;

/// Singular values in descending order (empty for an empty matrix).
RVec singular_values(const Mat& m);

/// Number of entries of a descending singular-value vector above `threshold`.
Index count_above(const RVec& sv, double threshold);

/// Orthonormal basis (columns) of the range of `m`, using singular values above `threshold`.
Mat range_basis(const Mat& m, double threshold);

/// Moore-Penrose pseudo-inverse with absolute singular value cutoff.
Mat pseudo_inverse(const Mat& m, double threshold);

/// Functional calculus on a Hermitian matrix: V f(Λ) V*.
template <class F>
Mat hermitian_apply(const Mat& h, F&& f) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  RVec lam = es.eigenvalues();
  Eigen::VectorXcd fl(lam.size());
  for (Index i = 0; i < lam.size(); ++i) fl(i) = f(lam(i));
  return es.eigenvectors() * fl.asDiagonal() * es.eigenvectors().adjoint();
}

/// ‖m − m*‖ relative to ‖m‖ (Frobenius), 0 for the zero matrix.
double hermitian_defect(const Mat& m);

/// Spectral norm.
double op_norm(const Mat& m);

Mat kron(const Mat& a, const Mat& b);

}  // namespace tl
