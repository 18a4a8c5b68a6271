#pragma once

#include <string>
#include <vector>

#include "torsionlab/complex.hpp"
#include "torsionlab/random.hpp"

namespace tl {

/// Chain map f: source → target, f_i in degree i.
struct ComplexMorphism {
  HilbertComplex source, target;
  std::vector<Operator> f;
};

/// max_i ‖d_{2,i} f_i − f_{i+1} d_{1,i}‖ / max(1, ‖d₂‖‖f‖, ‖f‖‖d₁‖).
double intertwining_defect(const ComplexMorphism& m);
/// Validates shapes, algebra tags and the intertwining relation (NotAMorphism on failure).
ComplexMorphism make_morphism(HilbertComplex source, HilbertComplex target, std::vector<Operator> f);
ComplexMorphism identity_morphism(const HilbertComplex& c);
/// f2 ∘ f1.
ComplexMorphism compose(const ComplexMorphism& f2, const ComplexMorphism& f1);

struct ConeComplex {
  HilbertComplex complex;
  ComplexMorphism morphism;
};

/// C(f)_i = C²_{i−1} ⊕ C¹_i with d(f)_i = [[−d_{2,i−1}, f_i], [0, d_{1,i}]].
ConeComplex mapping_cone(const ComplexMorphism& f);
/// Largest entrywise gap between the cone Laplacians and their 2×2 block expression.
double cone_laplacian_defect(const ComplexMorphism& f);

/// ½ log det′(op* op).
double log_vol(const Operator& op, const SpectralOptions& opt = {});

struct CheckResult {
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  double lhs = 0.0, rhs = 0.0;
  std::string detail;
};

/// |log T(C(f)) − Σ(−1)^j log vol(f_j)| for an isomorphism f.
CheckResult check_cone_volume(const ComplexMorphism& f, double tol = 1e-8, const SpectralOptions& opt = {});

/// Upper-triangular complex C_i = C¹_i ⊕ C²_i with d_i = [[d_{1,i}, f_i], [0, d_{2,i}]], f_i: C²_i → C¹_{i+1}.
HilbertComplex cmm_assemble(const HilbertComplex& c1, const HilbertComplex& c2, const std::vector<Operator>& coupling);
/// max_i ‖f_{i+1} d_{2,i} + d_{1,i+1} f_i‖, relative as in intertwining_defect.
double coupling_defect(const HilbertComplex& c1, const HilbertComplex& c2, const std::vector<Operator>& coupling);
/// |log T(C) − log T(C¹) − log T(C²)|.
CheckResult check_cmm(const HilbertComplex& c1, const HilbertComplex& c2, const std::vector<Operator>& coupling,
                      double tol = 1e-8, const SpectralOptions& opt = {});
/// Central difference of log T along the deformation t·f at t, step h.
CheckResult check_cmm_derivative(const HilbertComplex& c1, const HilbertComplex& c2,
                                 const std::vector<Operator>& coupling, double t, double h = 1e-4,
                                 double tol = 1e-6, const SpectralOptions& opt = {});

/// Harmonic comparison: equal reduced betti numbers and induced harmonic map with singular values above 1e-6.
bool induces_cohomology_iso(const ComplexMorphism& f, const SpectralOptions& opt = {});

/// |log T(C(f₂∘f₁)) − log T(C(f₁)) − log T(C(f₂))|.
CheckResult check_composition(const ComplexMorphism& f1, const ComplexMorphism& f2, double tol = 1e-8,
                              const SpectralOptions& opt = {});

/// Degreewise short exact sequence 0 → sub → middle → quotient → 0 (scalar only).
struct ShortExactSequence {
  HilbertComplex sub, middle, quotient;
  std::vector<Operator> inclusion, projection;
};

/// 0 → ΣC² → C(f) → C¹ → 0 with the canonical inclusion and projection.
ShortExactSequence cone_sequence(const ComplexMorphism& f);
/// 0 → C¹ → C¹ ⊕ C² → C² → 0.
ShortExactSequence split_sequence(const HilbertComplex& c1, const HilbertComplex& c2);

struct MilnorReport {
  CheckResult result;
  double log_t_sub = 0, log_t_middle = 0, log_t_quotient = 0, log_t_long = 0;
  /// Σ(−1)^i log T(0 → sub_i → middle_i → quotient_i → 0).
  double short_sequence_sum = 0;
  /// The long sequence in reduced cohomology, H_{3i} = H̄^i(sub), H_{3i+1} = H̄^i(middle), H_{3i+2} = H̄^i(quotient).
  HilbertComplex long_sequence;
};

/// Residual of log T(middle) = log T(sub) + log T(quotient) + log T(H) − Σ(−1)^i log T(short_i).
MilnorReport milnor_check(const ShortExactSequence& s, double tol = 1e-8);

/// Random invertible g_i with target = g C g⁻¹; returns g as a morphism.
ComplexMorphism random_isomorphism(Rng& rng, const HilbertComplex& c, double lo = 0.5, double hi = 2.0);
/// Random f_i: C²_i → C¹_{i+1} solving the coupling relation in degree order; C² must be acyclic.
std::vector<Operator> random_coupling(Rng& rng, const HilbertComplex& c1, const HilbertComplex& c2);

}  // namespace tl
