#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "torsionlab/morse.hpp"

namespace tl {

/// ζ_H(s, a) = Σ_{k≥0} (k + a)^{−s}, continued to s ≠ 1 by Euler–Maclaurin (50-term head, 8 Bernoulli terms).
double hurwitz_zeta(double s, double a);

/// ζ-function of −d²/dt² on S¹ twisted by e^{2πiθ}: (2π)^{−2s}[ζ_H(2s, θ) + ζ_H(2s, 1 − θ)].
double circle_zeta(double s, double theta);

/// exp(−ζ′(0)) for the twisted Laplacian; θ is taken mod 1 and must not be an integer.
double zeta_det_circle(double theta);

/// ½ log det Δ₁ − log T_comb of the two-point circle complex with holonomy e^{2πiθ}.
double relative_torsion_circle_unitary(double theta);

/// h(t) = (cos 2πt + 1)/2.
double circle_morse_function(double t);

struct WittenSpectrum {
  double t = 0.0;
  std::size_t grid = 0;
  std::vector<double> twists;
  /// Ascending, grid·twists.size() values.
  std::vector<double> eigenvalues;
  /// Eigenvalues in [0, 1].
  std::size_t small_count = 0;
  /// Smallest eigenvalue above 1.
  double first_large = 0.0;
  /// Largest spectral weight on the upper half of the Fourier band among the eigenvectors up to first_large.
  double tail_weight = 0.0;
  bool resolved = true;
};

/// Spectrum of −(d/ds + 2πiθ)² + t²h′² − t h″ by trigonometric collocation on `grid` nodes, one block per twist θ.
WittenSpectrum witten_spectrum_circle(double t, std::size_t grid = 1024, const std::vector<double>& twists = {0.0});

struct WittenSplitReport {
  std::vector<double> t;
  std::vector<std::size_t> small_counts;
  std::vector<double> first_large;
  std::size_t expected_small = 0;
  /// Least-squares line through (t, first_large).
  double slope = 0.0, intercept = 0.0;
  bool counts_match = false;
  bool resolved = true;
  bool pass = false;
};

/// Expected small count is twists.size() · m₀ with m₀ = 1 minimum of h.
WittenSplitReport witten_split(const std::vector<double>& t, std::size_t grid = 1024,
                               const std::vector<double>& twists = {0.0});

struct CircleBundleSpec {
  Operator holonomy;
  HermitianStructure mu;
  /// Minimum and maximum of the Morse function, 0 < t₁ < ½ < t₂ < 1.
  double t1 = 0.25, t2 = 0.75;
};

/// X*Ψ on S¹ for X = −grad h: +½ on (t₁, t₂), −½ on the complementary arc.
double pullback_psi(double t, double t1, double t2);

struct EulerInvariantResult {
  double value = 0.0;
  /// ∫ θ(μ₀) X*Ψ by quadrature.
  double theta_term = 0.0;
  /// −Σ (−1)^{ind x} V(μ, μ₀)(x).
  double v_term = 0.0;
  /// ∫ V e(M, g); zero on S¹.
  double euler_term = 0.0;
  /// −½ log det_FK A + ½ (log det μ(t₁) − log det μ(t₂)); equals ½ log vol(A⁻¹) when μ is constant on the critical points.
  double closed_form = 0.0;
  /// max |θ(μ₀)| within 0.01 of the critical points.
  double admissibility_defect = 0.0;
};

/// Throws InvalidArgument when μ₀ is not parallel near the critical points (|θ| > 1e−9).
EulerInvariantResult euler_invariant_circle(const CircleBundleSpec& spec, const HermitianStructure& mu0);

struct ProductInvariantResult {
  /// χ(N) · euler_invariant_circle(A, μ = μ₀ canonical).
  double pipeline = 0.0;
  /// −χ(N)/2 · log det_FK (A*A)^{1/2}.
  double formula = 0.0;
  double residual = 0.0;
  EulerInvariantResult circle;
};

ProductInvariantResult euler_invariant_product(const Operator& holonomy, int chi_n);

}  // namespace tl
