#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <vector>

#include "torsionlab/linalg.hpp"

namespace tl {

/// The two finite-trace algebras: plain matrices, and multiplication operators on L²(S¹)ᵏ
/// (the Fourier picture of the group von Neumann algebra of ℤ).
enum class Algebra { Scalar, CircleFibered };

const char* algebra_name(Algebra a);

/// Bounded operator between finite-multiplicity modules of one algebra.
///
/// Circle-fibered operators are stored either as a trigonometric polynomial symbol
/// Σ cₙ e^{2πint} or as samples F(j/N), j = 0..N−1.
class Operator {
 public:
  enum class Payload { Matrix, TrigPoly, Sampled };

  Operator() = default;

  static Operator scalar(Mat m);
  static Operator trig_poly(Index rows, Index cols, std::map<int, Mat> terms);
  static Operator sampled(Index rows, Index cols, std::vector<Mat> fibers);
  static Operator sample(Index rows, Index cols, std::size_t n, const std::function<Mat(double)>& symbol);
  static Operator identity(Algebra a, Index k);
  static Operator zero(Algebra a, Index rows, Index cols);
  /// A constant matrix viewed as an element of algebra `a`.
  static Operator constant(Algebra a, Mat m);

  Algebra algebra() const { return algebra_; }
  Payload payload() const { return payload_; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }
  bool is_scalar() const { return algebra_ == Algebra::Scalar; }

  const Mat& matrix() const;
  const std::map<int, Mat>& terms() const;
  const std::vector<Mat>& samples() const;
  /// Grid size of a sampled payload, 0 otherwise.
  std::size_t sample_count() const { return payload_ == Payload::Sampled ? samples_.size() : 0; }

  /// Fiber matrix at t. Sampled payloads only accept grid points.
  Mat fiber(double t) const;
  /// Fiber at grid point j of an n-point grid.
  Mat fiber_at(std::size_t j, std::size_t n) const;

  Operator adjoint() const;
  /// Re-express on an n-point sample grid.
  Operator resampled(std::size_t n) const;

 private:
  Algebra algebra_ = Algebra::Scalar;
  Payload payload_ = Payload::Matrix;
  Index rows_ = 0, cols_ = 0;
  Mat matrix_;
  std::map<int, Mat> terms_;
  std::vector<Mat> samples_;
};

/// a ∘ b (b applied first).
Operator compose(const Operator& a, const Operator& b);
Operator add(const Operator& a, const Operator& b);
Operator scale(const Operator& a, cplx c);
inline Operator operator*(const Operator& a, const Operator& b) { return compose(a, b); }
inline Operator operator+(const Operator& a, const Operator& b) { return add(a, b); }
inline Operator operator-(const Operator& a, const Operator& b) { return add(a, scale(b, -1.0)); }
inline Operator operator-(const Operator& a) { return scale(a, -1.0); }
Operator adjoint(const Operator& a);

/// Tensor product. Scalar ⊗ circle gives a circle-fibered operator; circle ⊗ circle is rejected.
Operator kron(const Operator& a, const Operator& b);

/// View a scalar operator as a constant circle-fibered one (no-op if already in `a`).
Operator promote(const Operator& op, Algebra a);

/// Fiberwise matrix map. Circle-fibered inputs come back sampled on `n` points
/// (or on their own grid if already sampled).
Operator fiberwise(const Operator& op, const std::function<Mat(const Mat&)>& f, std::size_t n = 4096);

/// Fiberwise inverse; throws NotInvertible if any fiber is singular.
Operator inverse(const Operator& op, std::size_t n = 4096);

/// Largest fiber operator norm (on the sample grid, or on a fine grid for trig symbols).
double sup_norm(const Operator& op);

/// Block matrix of operators over one algebra. Unset blocks are zero.
class BlockOperator {
 public:
  BlockOperator(Algebra a, std::vector<Index> row_dims, std::vector<Index> col_dims);
  void set(std::size_t i, std::size_t j, const Operator& op);
  Operator assemble() const;

 private:
  Algebra algebra_;
  std::vector<Index> row_dims_, col_dims_;
  std::map<std::pair<std::size_t, std::size_t>, Operator> blocks_;
};

/// Block-diagonal sum.
Operator direct_sum(const Operator& a, const Operator& b);

/// Common sample grid of a set of operators: 0 if none is sampled. Throws on mismatched grids.
std::size_t common_grid(const std::vector<const Operator*>& ops);

}  // namespace tl
