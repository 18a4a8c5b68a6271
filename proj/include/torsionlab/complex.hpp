#pragma once

#include <string>
#include <vector>

#include "torsionlab/operator.hpp"
#include "torsionlab/spectral.hpp"

namespace tl {

/// Finite cochain complex C₀ → C₁ → … → C_N of modules over one algebra.
class HilbertComplex {
 public:
  HilbertComplex() = default;
  /// `diffs[q]` maps degree q to q+1; there are dims.size() − 1 of them. Validates d² = 0.
  HilbertComplex(Algebra a, std::vector<Index> dims, std::vector<Operator> diffs, bool validate = true);
  static HilbertComplex zero(Algebra a, std::vector<Index> dims);

  Algebra algebra() const { return algebra_; }
  int top_degree() const { return static_cast<int>(dims_.size()) - 1; }
  const std::vector<Index>& dims() const { return dims_; }
  /// Multiplicity in degree q (0 outside 0..N).
  Index dim(int q) const;
  const Operator& d(int q) const;
  /// d_q, or the zero map when q is outside 0..N−1.
  Operator d_or_zero(int q) const;
  const std::vector<Operator>& differentials() const { return diffs_; }

  /// max_q ‖d_{q+1} d_q‖ / max(1, ‖d_{q+1}‖‖d_q‖).
  double d_squared_defect() const;
  double euler_characteristic() const;

 private:
  Algebra algebra_ = Algebra::Scalar;
  std::vector<Index> dims_;
  std::vector<Operator> diffs_;
};

/// Relative tolerance for d² = 0 and for intertwining relations.
inline constexpr double kComplexTol = 1e-10;
/// reduced_betti below this counts as zero.
inline constexpr double kAcyclicTol = 1e-6;
/// Rank-jump fibers of smaller total measure are treated as isolated and dropped from quadrature.
inline constexpr double kRankJumpTol = 1e-3;

std::vector<Operator> laplacians(const HilbertComplex& c);

struct HodgeData {
  /// Per degree: projectors onto H, C⁺ = closure of range d_{q−1}, C⁻ = closure of range d_q*.
  std::vector<Operator> harmonic, plus, minus;
  /// Reduced Laplacians on C⁺ and C⁻ in singular-vector coordinates (diagonal).
  std::vector<Operator> delta_plus, delta_minus;
  double rank_jump_measure = 0.0;
  std::vector<std::string> warnings;
};

HodgeData hodge_decompose(const HilbertComplex& c, const SpectralOptions& opt = {});
std::vector<double> reduced_betti(const HilbertComplex& c, const SpectralOptions& opt = {});
bool is_acyclic(const HilbertComplex& c, const SpectralOptions& opt = {});

struct TorsionReport {
  /// ½ Σ (−1)^{q+1} q log det′Δ_q.
  double log_torsion = 0.0;
  /// ½ Σ (−1)^q log det′Δ⁻_q.
  double log_torsion_reduced = 0.0;
  /// Same as log_torsion with log det′Δ_q taken from the SVD of [d_{q−1}*; d_q].
  double log_torsion_direct = 0.0;
  /// |log_torsion_direct − log_torsion_reduced|.
  double formula_gap = 0.0;
  /// False when the stacked matrices' dynamic range exceeds what double precision resolves.
  bool direct_reliable = true;
  std::vector<double> log_det_laplacian;
  std::vector<double> log_det_laplacian_direct;
  std::vector<double> log_det_reduced;
  std::vector<DetClassVerdict> determinant_class;
  std::vector<double> reduced_betti;
  bool acyclic = false;
  double rank_jump_measure = 0.0;
  std::size_t fibers = 0;
};

/// Throws DivergentDeterminant naming the first degree that is not of determinant class.
TorsionReport torsion(const HilbertComplex& c, const SpectralOptions& opt = {});
inline double log_torsion(const HilbertComplex& c, const SpectralOptions& opt = {}) {
  return torsion(c, opt).log_torsion;
}

/// Pads to odd top degree 2N+1 and sets C♯_j = C_{2N+1−j}, d♯_j = d*_{2N−j}.
HilbertComplex dual(const HilbertComplex& c);
/// ΣC_i = C_{i−1}, Σd_i = −d_{i−1}.
HilbertComplex suspension(const HilbertComplex& c);
HilbertComplex direct_sum(const HilbertComplex& a, const HilbertComplex& b);
/// Graded tensor product with differential d⊗1 + (−1)^p 1⊗d.
HilbertComplex tensor_product(const HilbertComplex& a, const HilbertComplex& b);
/// Append zero modules up to top degree n.
HilbertComplex pad_to(const HilbertComplex& c, int n);

}  // namespace tl
