#pragma once

#include <vector>

#include "torsionlab/morse.hpp"

namespace tl {

/// Basis of the expansion G(t) = Σ a_k t^{i_k} + Σ b_k t^{i_k} log t + Σ c_r t^{r}.
struct ExpansionBasis {
  /// i₁ > … > i_N = 0.
  std::vector<double> exponents = {1.0, 0.0};
  /// Exponents that also get a t^i log t term; each must appear in `exponents`.
  std::vector<double> log_exponents = {1.0, 0.0};
  /// Negative powers modelling the o(1) remainder; empty for the bare expansion.
  std::vector<double> remainder = {};
};

struct AsymptoticExpansion {
  ExpansionBasis basis;
  std::vector<double> a, b, c;
  /// a_N, the coefficient of t⁰.
  double free_term = 0.0;
  /// Largest absolute fit residual over the samples.
  double residual = 0.0;
  /// Condition number of the column-normalized design matrix.
  double condition = 0.0;

  double coefficient(double exponent) const;
  double log_coefficient(double exponent) const;
  double evaluate(double t) const;
};

/// Maximum condition number accepted by fit_expansion.
inline constexpr double kMaxFitCondition = 1e12;

/// Least-squares fit; needs ≥ 2·(basis size) samples spread over at least a decade of t.
AsymptoticExpansion fit_expansion(const std::vector<double>& t, const std::vector<double>& g,
                                  const ExpansionBasis& basis = {});

/// n log-spaced points in [lo, hi]; defaults to 40 points in [5, 500].
std::vector<double> log_grid(std::size_t n = 40, double lo = 5.0, double hi = 500.0);

/// S_x(t) = e^{−t h(x)} (π/t)^{n/4 − ind(x)/2} on E_x.
std::vector<Operator> scaling_components(const MorseDatum& m, const Representation& rho, double t);

struct ScalingCone {
  double t = 0.0;
  /// log T(C(f)) for f = S(t)⁻¹ from the deformed complex (C, SδS⁻¹) to (C, δ), computed on the cone.
  double log_t_cone = 0.0;
  /// Σ (−1)^j log vol(f_j).
  double log_t_volumes = 0.0;
  double gap = 0.0;
};

/// Throws InvalidArgument for t ≤ 0.
ScalingCone scaling_cone_torsion(double t, const MorseDatum& m, const Representation& rho);

struct ScalingCheck {
  std::vector<double> t;
  std::vector<double> g;
  AsymptoticExpansion fit;
  /// dim E · Σ_j (−1)^j Σ_{x ∈ Cr_j} h(x).
  double expected_linear = 0.0;
  /// −dim E · Σ_j (−1)^j (n/4 − j/2) m_j, the coefficient of log(π/t).
  double expected_log = 0.0;
  double linear_residual = 0.0;
  double log_residual = 0.0;
  /// Largest |log_t_cone − log_t_volumes| over the grid.
  double max_route_gap = 0.0;
  bool pass = false;
};

/// Fits log T(C(f(t))) on the basis {t, log t, 1} and compares with the scaling coefficients.
ScalingCheck check_scaling_coefficients(const MorseDatum& m, const Representation& rho,
                                        const std::vector<double>& t = log_grid(), double tol = 1e-6);

}  // namespace tl
