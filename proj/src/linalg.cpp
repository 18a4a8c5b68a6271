#include "torsionlab/linalg.hpp"

#include <algorithm>

namespace tl {

RVec singular_values(const Mat& m) {
  if (m.rows() == 0 || m.cols() == 0) return RVec(0);
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues();
}

Index count_above(const RVec& sv, double threshold) {
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > threshold) ++r;
  return r;
}

Mat range_basis(const Mat& m, double threshold) {
  if (m.rows() == 0 || m.cols() == 0) return Mat(m.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
  Index r = count_above(svd.singularValues(), threshold);
  return svd.matrixU().leftCols(r);
}

Mat pseudo_inverse(const Mat& m, double threshold) {
  if (m.rows() == 0 || m.cols() == 0) return Mat::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVec& s = svd.singularValues();
  Index r = count_above(s, threshold);
  Mat out = Mat::Zero(m.cols(), m.rows());
  for (Index i = 0; i < r; ++i)
    out += svd.matrixV().col(i) * (1.0 / s(i)) * svd.matrixU().col(i).adjoint();
  return out;
}

double hermitian_defect(const Mat& m) {
  double n = m.norm();
  if (n == 0.0) return 0.0;
  return (m - m.adjoint()).norm() / n;
}

double op_norm(const Mat& m) {
  RVec s = singular_values(m);
  return s.size() ? s(0) : 0.0;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace tl
