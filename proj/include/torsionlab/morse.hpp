#pragma once

#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "torsionlab/cone.hpp"

namespace tl {

/// g₁^{p₁} g₂^{p₂} … as a list of (generator, power); empty is the unit.
struct Letter {
  std::string generator;
  int power = 1;
  bool operator==(const Letter&) const = default;
};
using Word = std::vector<Letter>;

/// Parses "g", "g^-1", "g^2 h^-1", "" or "e".
Word parse_word(const std::string& text);
std::string format_word(const Word& w);
Word inverse_word(const Word& w);

struct CriticalPoint {
  std::string id;
  int index = 0;
  double value = 0.0;
  /// Position on the circle in [0, 1); NaN when the datum is not a circle triangulation.
  double position = std::numeric_limits<double>::quiet_NaN();
};

/// ν(to, from) contribution: `from` has index q, `to` has index q+1.
struct Incidence {
  std::string from, to;
  Word word;
  int coeff = 1;
};

struct MorseDatum {
  int dimension = 1;
  std::vector<CriticalPoint> points;
  std::vector<Incidence> incidences;

  /// Positions in `points` of the index-q critical points, in input order.
  std::vector<std::size_t> cells(int q) const;
  std::size_t count(int q) const { return cells(q).size(); }
  std::size_t find(const std::string& id) const;
  int max_index() const;
};

/// Unique ids, indices within 0..dimension, incidences between adjacent indices.
void validate(const MorseDatum& m);

/// One minimum and one maximum on S¹ with δ = I − ρ(g); h(t) = (cos 2π(t − t_max) + 1)/2.
MorseDatum circle_datum(double t_min = 0.25, double t_max = 0.75, const std::string& generator = "g");
/// Alternating minima (index 0) and maxima (index 1) at the given positions; incidences from the cell geometry.
MorseDatum circle_triangulation(const std::vector<std::pair<double, int>>& points, const std::string& generator = "g");
/// Sⁿ with one minimum and one maximum, no incidences (n ≥ 2).
MorseDatum sphere_datum(int n);
/// Cartesian product; incidences carry the Koszul sign (−1)^{ind x} on the second factor.
MorseDatum product_datum(const MorseDatum& a, const MorseDatum& b);
/// Indices q ↦ n − q, values h ↦ n − h, incidences reversed with inverse words.
MorseDatum dual_triangulation(const MorseDatum& m);
/// Inserts a cancelling (min, max) pair at `at` and `at + spacing` inside one cell of a circle triangulation.
MorseDatum subdivide_circle(const MorseDatum& m, double at, double spacing = 0.02);

/// Γ → GL(W): invertible operators assigned to generator names.
struct Representation {
  Algebra algebra = Algebra::Scalar;
  Index dim = 1;
  std::map<std::string, Operator> generators;

  /// ρ(word); negative powers use fiberwise inverses sampled on `n` points for circle symbols.
  Operator evaluate(const Word& w, std::size_t n = 4096) const;
  /// ρ♯(γ) = ρ(γ⁻¹)*.
  Representation dual() const;
};

Representation scalar_representation(const std::string& generator, cplx holonomy);
Representation single_generator(const std::string& generator, const Operator& holonomy);
/// ρ₁ ⊗ ρ₂ on W₁ ⊗ W₂; generator names must be distinct.
Representation product_representation(const Representation& a, const Representation& b);

/// Hermitian structure μ on the flat bundle over S¹ with holonomy A, lifted to ℝ by μ(s + 1) = A⁻* μ(s) A⁻¹
/// (sections of the lift satisfy f(s + 1) = A f(s)).
struct HermitianStructure {
  Algebra algebra = Algebra::Scalar;
  Index dim = 1;
  Operator holonomy;
  /// μ on [0, 1).
  std::function<Operator(double)> base;
  /// log det μ on [0, 1); derived from `base` when empty.
  std::function<double(double)> log_det;

  Operator at(double s) const;
  double log_det_at(double s) const;
  /// ‖μ(1) − A⁻* μ(0) A⁻¹‖ relative to ‖μ(1)‖, with μ(1) the left limit of `base`.
  double equivariance_defect() const;
};

/// μ ≡ I; parallel exactly when the holonomy is unitary.
HermitianStructure identity_structure(const Operator& holonomy);
/// Identity on [t₁ − ε, t₂ + ε], (AA*)^{−s(u)} across the complementary arc with s a C^∞ step.
HermitianStructure canonical_structure(const Operator& holonomy, double t1 = 0.25, double t2 = 0.75,
                                       double eps = 0.05, std::size_t n = 4096);
/// μ · e^{φ} with φ 1-periodic.
HermitianStructure conformal_structure(const HermitianStructure& mu, std::function<double(double)> phi);
/// Piecewise-linear interpolation of samples μ(t_j), t_j ascending in [0, 1); wraps through the holonomy.
HermitianStructure sampled_structure(const Operator& holonomy, std::vector<double> t, std::vector<Operator> mu);

/// ½ log det(μ₁(s)⁻¹ μ₂(s)).
double V_function(const HermitianStructure& mu1, const HermitianStructure& mu2, double s);
/// θ(μ)(s) = −½ d/ds log det μ(s) by central differences.
double theta_form(const HermitianStructure& mu, double s, double h = 1e-5);

/// Weighted combinatorial complex: C^q = ⊕_{x ∈ Cr_q} E_x with inner product μ_x, written in orthonormal coordinates.
HilbertComplex build_complex(const MorseDatum& m, const Representation& rho, const std::vector<Operator>& weights = {});
/// Weights μ(position of x).
HilbertComplex build_complex(const MorseDatum& m, const Representation& rho, const HermitianStructure& mu);
std::vector<Operator> point_weights(const MorseDatum& m, const HermitianStructure& mu);

/// |(log T(μ₁) − log T(μ₂)) − Σ(−1)^{ind x} V(μ₁, μ₂)(x)|.
CheckResult hermitian_anomaly_check(const MorseDatum& m, const Representation& rho, const HermitianStructure& mu1,
                                    const HermitianStructure& mu2, double tol = 1e-8);

/// Parallel transport along the lift from s to s′: ρ(g)^{⌊s⌋ − ⌊s′⌋}.
Operator circle_transport(const Representation& rho, const std::string& generator, double from, double to);

/// Σ_{x ∈ Cr(τ₀)} (−1)^{ind x} log vol(T^{τ₂}_{x,x₂} ∘ (T^{τ₁}_{x,x₁})⁻¹).
double omega(const MorseDatum& tau1, const MorseDatum& tau2, const MorseDatum& common, const Representation& rho,
             const HermitianStructure& mu);

/// A: C(fine) → C(coarse), A_q(s)(x) = Σ_{y ∈ Cr_q(fine) ∩ W⁻_x} T_{yx} s(y), in orthonormal coordinates.
ComplexMorphism subdivision_morphism(const MorseDatum& coarse, const MorseDatum& fine, const Representation& rho,
                                     const HermitianStructure& mu);

struct SubdivisionReport {
  double log_t_coarse = 0.0, log_t_fine = 0.0;
  double log_t_cone = 0.0;
  double omega_fine_coarse = 0.0;
  /// |log T(C(A)) − ω(fine, coarse)|.
  CheckResult cone_vs_omega;
  /// |(log T(fine) − log T(coarse)) − ω(fine, coarse)|.
  CheckResult torsion_difference;
};

SubdivisionReport subdivision_check(const MorseDatum& coarse, const MorseDatum& fine, const Representation& rho,
                                    const HermitianStructure& mu, double tol = 1e-8);

}  // namespace tl
