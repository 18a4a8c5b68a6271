#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace tl {

struct QuadNode {
  double t;
  double w;
};

/// n-point Gauss-Legendre rule on [a, b].
std::vector<QuadNode> gauss_legendre(int n, double a, double b);

/// Composite Gauss-Legendre: `panels` equal panels of order `order`.
double integrate_gl(const std::function<double(double)>& f, double a, double b, int panels, int order = 8);

struct AdaptiveOptions {
  std::size_t initial_panels = 256;
  double min_width = 1.0 / (1 << 20);
  /// Per-unit-length absolute tolerance on the Kronrod/Gauss difference.
  double tol = 1e-11;
  std::size_t max_panels = 1 << 18;
};

struct AdaptiveResult {
  std::vector<double> value;
  /// Kronrod nodes and weights of every accepted panel; reusable as a quadrature of [0,1].
  std::vector<QuadNode> nodes;
  double error_estimate = 0.0;
  std::size_t panels = 0;
  double smallest_width = 1.0;
};

/// Adaptive Gauss-Kronrod (7/15) integration of a vector-valued f over [0, 1].
/// Panels are bisected until the componentwise error is below tol·width or min_width is reached.
AdaptiveResult integrate_adaptive(const std::function<std::vector<double>(double)>& f, std::size_t dim,
                                  const AdaptiveOptions& opt = {});

}  // namespace tl
