#pragma once

#include <string>
#include <vector>

#include "torsionlab/operator.hpp"
#include "torsionlab/quadrature.hpp"

namespace tl {

struct SpectralOptions {
  /// Uniform fiber count used for trig symbols where no adaptive rule applies.
  std::size_t samples = 4096;
  AdaptiveOptions adaptive;
  /// Take the ranks of an acyclic complex from its dimensions (r_q = dim C_q − r_{q−1}) instead of the
  /// kernel threshold. For complexes acyclic by construction whose singular values span more than 1e12.
  bool known_acyclic = false;
};

/// Weighted list of singular-value vectors: Σ wᵢ δ(σᵢ) summed over fibers.
struct SpectralMeasure {
  std::vector<double> weights;
  std::vector<RVec> sv;
  /// Largest singular value over all fibers; the kernel threshold is kSigmaTol times this.
  double norm = 0.0;
  /// Fibers whose numerical rank is below the maximal one.
  double rank_jump_measure = 0.0;

  double kernel_threshold() const { return kSigmaTol * norm; }
};

/// Scalar: one atom. Sampled: the sample grid. Trig symbol: `n` midpoint fibers.
SpectralMeasure uniform_measure(const Operator& op, std::size_t n);
/// Fibers of a circle-fibered operator at the given quadrature nodes.
SpectralMeasure quadrature_measure(const Operator& op, const std::vector<QuadNode>& nodes);
/// Fill norm and rank_jump_measure from weights and sv.
void finalize_measure(SpectralMeasure& m, double norm_override = -1.0);

struct SpectralDensity {
  std::vector<double> grid;
  std::vector<double> values;
  double kernel_dim = 0.0;
};

enum class DetClass { Yes, No, Unresolved };

const char* det_class_name(DetClass d);

struct DetClassVerdict {
  DetClass state = DetClass::Unresolved;
  bool is_determinant_class = false;
  std::vector<double> epsilons;
  /// ∫_{ε_k}^{∞} log λ dF over positive singular values; nonincreasing in k.
  std::vector<double> log_det_lower_bound_sequence;
  /// Growth exponent γ of the fitted law |I(ε_k)| ~ k^γ (0 when convergent).
  double divergence_rate_estimate = 0.0;
  double limit = 0.0;
  double near_kernel_measure = 0.0;
  std::string diagnostics;
};

cplx vn_trace(const Operator& op);

SpectralDensity spectral_density(const SpectralMeasure& m, const std::vector<double>& grid);
SpectralDensity spectral_density(const Operator& op, const std::vector<double>& grid,
                                 const SpectralOptions& opt = {});

/// Stabilization tolerance of the determinant-class test.
inline constexpr double kDetClassTol = 1e-4;

/// Empty `epsilons` means 2^{-k}, k = 1, 2, ... until the data stop resolving new mass.
DetClassVerdict determinant_class_check(const SpectralMeasure& m, const std::vector<double>& epsilons = {});
DetClassVerdict determinant_class_check(const Operator& op, const std::vector<double>& epsilons = {},
                                        const SpectralOptions& opt = {});

/// Σ w Σ_{σ > threshold} log σ.
double log_det_prime(const SpectralMeasure& m);

struct FkResult {
  double log_det = 0.0;
  DetClassVerdict verdict;
  std::size_t fibers = 0;
  double rank_jump_measure = 0.0;
  double error_estimate = 0.0;
};

/// Full report; throws DivergentDeterminant when the verdict is negative.
FkResult fk_log_det_report(const Operator& op, const SpectralOptions& opt = {});
double fk_log_det(const Operator& op, const SpectralOptions& opt = {});

double heat_trace(const SpectralMeasure& m, double t);
double heat_trace(const Operator& op, double t, const SpectralOptions& opt = {});

cplx gamma_fn(cplx s);
cplx zeta_I(const SpectralMeasure& m, cplx s);
cplx zeta_I(const Operator& op, cplx s, const SpectralOptions& opt = {});

/// ∫ λ dF.
double trace_norm(const Operator& op, const SpectralOptions& opt = {});

/// C∞ step: 0 for x ≤ 0, 1 for x ≥ 1.
double smoothstep(double x);
double smoothstep_derivative(double x);

/// g(op) with g(λ) = a + (λ − a)·s((λ − a)/(b − a)) for λ > a and g = a below.
Operator spectral_shift(const Operator& op, double a, double b, const SpectralOptions& opt = {});
double spectral_shift_function(double lambda, double a, double b);

}  // namespace tl
