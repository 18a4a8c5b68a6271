#include "torsionlab/circle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "torsionlab/errors.hpp"
#include "torsionlab/quadrature.hpp"

namespace tl {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kHead = 50;
constexpr double kZetaStep = 1e-4;

// B_{2j} / (2j)!, j = 1..8.
constexpr std::array<double, 8> kBernoulliOverFactorial = {
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
};

double reduce_twist(double theta) {
  double r = theta - std::floor(theta);
  require(r > 1e-12 && r < 1.0 - 1e-12, ErrorKind::NotAcyclic,
          "integral twist: the twisted Laplacian has a kernel");
  return r;
}

double fk_of(const Operator& a) {
  return a.is_scalar() ? std::log(std::abs(a.matrix().determinant())) : fk_log_det(a);
}

Eigen::VectorXd block_spectrum(double t, std::size_t n, double theta, double& tail, bool want_tail) {
  // Fourier modes k = −n/2 .. n/2 − 1; multiplication by V is a circulant convolution of its coefficients.
  // V(s) = t²π² sin²2πs + 2π²t cos 2πs.
  Index m = static_cast<Index>(n);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
  const std::array<std::pair<int, double>, 5> coeffs = {{{0, t * t * kPi * kPi / 2.0},
                                                          {1, kPi * kPi * t},
                                                          {-1, kPi * kPi * t},
                                                          {2, -t * t * kPi * kPi / 4.0},
                                                          {-2, -t * t * kPi * kPi / 4.0}}};
  for (Index i = 0; i < m; ++i) {
    double k = static_cast<double>(i) - static_cast<double>(m / 2);
    double w = 2.0 * kPi * (k + theta);
    h(i, i) += w * w;
    for (const auto& [shift, c] : coeffs) {
      Index j = ((i - shift) % m + m) % m;
      h(i, j) += c;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, want_tail ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  Eigen::VectorXd ev = es.eigenvalues();
  if (want_tail) {
    for (Index c = 0; c < m; ++c) {
      double w = 0.0;
      for (Index i = 0; i < m; ++i) {
        double k = std::abs(static_cast<double>(i) - static_cast<double>(m / 2));
        if (k >= static_cast<double>(m) / 4.0) w += es.eigenvectors()(i, c) * es.eigenvectors()(i, c);
      }
      tail = std::max(tail, w);
      if (ev(c) > 1.0) break;
    }
  }
  return ev;
}

}  // namespace

double hurwitz_zeta(double s, double a) {
  require(a > 0.0, ErrorKind::InvalidArgument, "hurwitz_zeta: a must be positive");
  require(std::abs(s - 1.0) > 1e-14, ErrorKind::InvalidArgument, "hurwitz_zeta: pole at s = 1");
  double sum = 0.0;
  for (int k = 0; k < kHead; ++k) sum += std::pow(k + a, -s);
  double x = kHead + a;
  sum += std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s);
  double rising = s;  // s (s+1) … (s+2j−2)
  for (std::size_t j = 0; j < kBernoulliOverFactorial.size(); ++j) {
    double p = static_cast<double>(2 * j + 1);
    sum += kBernoulliOverFactorial[j] * rising * std::pow(x, -s - p);
    rising *= (s + p) * (s + p + 1.0);
  }
  return sum;
}

double circle_zeta(double s, double theta) {
  double th = reduce_twist(theta);
  return std::pow(2.0 * kPi, -2.0 * s) * (hurwitz_zeta(2.0 * s, th) + hurwitz_zeta(2.0 * s, 1.0 - th));
}

double zeta_det_circle(double theta) {
  auto z = [theta](double s) { return circle_zeta(s, theta); };
  const double h = kZetaStep;
  double d = (8.0 * (z(h) - z(-h)) - (z(2.0 * h) - z(-2.0 * h))) / (12.0 * h);
  return std::exp(-d);
}

double relative_torsion_circle_unitary(double theta) {
  double th = reduce_twist(theta);
  double log_t_an = 0.5 * std::log(zeta_det_circle(th));
  double log_t_comb = log_torsion(build_complex(circle_datum(), scalar_representation("g", std::polar(1.0, 2.0 * kPi * th))));
  return log_t_an - log_t_comb;
}

double circle_morse_function(double t) { return (std::cos(2.0 * kPi * t) + 1.0) / 2.0; }

WittenSpectrum witten_spectrum_circle(double t, std::size_t grid, const std::vector<double>& twists) {
  require(t >= 0.0, ErrorKind::InvalidArgument, "witten_spectrum_circle: t must be non-negative");
  require(grid >= 256 && grid % 2 == 0, ErrorKind::InvalidArgument, "witten_spectrum_circle: grid must be even and >= 256");
  require(!twists.empty(), ErrorKind::InvalidArgument, "witten_spectrum_circle: at least one twist");
  WittenSpectrum out;
  out.t = t;
  out.grid = grid;
  out.twists = twists;
  for (double th : twists) {
    Eigen::VectorXd ev = block_spectrum(t, grid, th - std::floor(th), out.tail_weight, true);
    out.eigenvalues.insert(out.eigenvalues.end(), ev.data(), ev.data() + ev.size());
  }
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end());
  out.first_large = std::numeric_limits<double>::infinity();
  for (double e : out.eigenvalues) {
    if (e <= 1.0) ++out.small_count;
    else {
      out.first_large = e;
      break;
    }
  }
  out.resolved = out.tail_weight < 1e-10;
  return out;
}

WittenSplitReport witten_split(const std::vector<double>& t, std::size_t grid, const std::vector<double>& twists) {
  require(t.size() >= 2, ErrorKind::InvalidArgument, "witten_split: need at least two values of t");
  WittenSplitReport r;
  r.t = t;
  r.expected_small = twists.size();
  r.counts_match = true;
  for (double x : t) {
    WittenSpectrum s = witten_spectrum_circle(x, grid, twists);
    r.small_counts.push_back(s.small_count);
    r.first_large.push_back(s.first_large);
    r.counts_match = r.counts_match && s.small_count == r.expected_small;
    r.resolved = r.resolved && s.resolved;
  }
  double n = static_cast<double>(t.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sx += t[i];
    sy += r.first_large[i];
    sxx += t[i] * t[i];
    sxy += t[i] * r.first_large[i];
  }
  r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  r.intercept = (sy - r.slope * sx) / n;
  r.pass = r.counts_match && r.resolved && r.slope > 0.0;
  return r;
}

double pullback_psi(double t, double t1, double t2) {
  double u = t - std::floor(t);
  return (u > t1 && u < t2) ? 0.5 : -0.5;
}

EulerInvariantResult euler_invariant_circle(const CircleBundleSpec& spec, const HermitianStructure& mu0) {
  require(0.0 < spec.t1 && spec.t1 < 0.5 && 0.5 < spec.t2 && spec.t2 < 1.0, ErrorKind::InvalidArgument,
          "critical points must satisfy 0 < t1 < 1/2 < t2 < 1");
  require(mu0.equivariance_defect() < 1e-10, ErrorKind::InvalidArgument, "mu0 violates equivariance");
  require(spec.mu.equivariance_defect() < 1e-10, ErrorKind::InvalidArgument, "mu violates equivariance");
  EulerInvariantResult r;
  for (double c : {spec.t1, spec.t2})
    for (int k = -10; k <= 10; ++k)
      r.admissibility_defect = std::max(r.admissibility_defect, std::abs(theta_form(mu0, c + 1e-3 * k)));
  require(r.admissibility_defect < 1e-9, ErrorKind::InvalidArgument,
          "mu0 is not parallel near the critical points");
  auto integrand = [&](double s) { return theta_form(mu0, s) * pullback_psi(s, spec.t1, spec.t2); };
  r.theta_term = integrate_gl(integrand, 0.0, spec.t1, 64) + integrate_gl(integrand, spec.t1, spec.t2, 64) +
                 integrate_gl(integrand, spec.t2, 1.0, 64);
  // Index 0 at t₁, index 1 at t₂.
  r.v_term = -(V_function(spec.mu, mu0, spec.t1) - V_function(spec.mu, mu0, spec.t2));
  r.value = r.theta_term + r.v_term + r.euler_term;
  r.closed_form =
      -0.5 * fk_of(spec.holonomy) + 0.5 * (spec.mu.log_det_at(spec.t1) - spec.mu.log_det_at(spec.t2));
  return r;
}

ProductInvariantResult euler_invariant_product(const Operator& holonomy, int chi_n) {
  CircleBundleSpec spec;
  spec.holonomy = holonomy;
  spec.mu = canonical_structure(holonomy, spec.t1, spec.t2);
  ProductInvariantResult r;
  r.circle = euler_invariant_circle(spec, spec.mu);
  r.pipeline = chi_n * r.circle.value;
  Operator modulus = fiberwise(adjoint(holonomy) * holonomy, [](const Mat& m) {
    return hermitian_apply(m, [](double l) { return std::sqrt(l); });
  });
  double ld = modulus.is_scalar() ? std::log(std::abs(modulus.matrix().determinant())) : fk_log_det(modulus);
  r.formula = -0.5 * chi_n * ld;
  r.residual = std::abs(r.pipeline - r.formula);
  return r;
}

}  // namespace tl
