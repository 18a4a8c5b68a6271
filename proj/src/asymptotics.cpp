#include "torsionlab/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "torsionlab/errors.hpp"

namespace tl {

namespace {

bool contains(const std::vector<double>& v, double x) { return std::find(v.begin(), v.end(), x) != v.end(); }

void validate_basis(const ExpansionBasis& b) {
  require(!b.exponents.empty() && b.exponents.back() == 0.0, ErrorKind::InvalidArgument,
          "expansion exponents must end at 0");
  for (std::size_t i = 1; i < b.exponents.size(); ++i)
    require(b.exponents[i] < b.exponents[i - 1], ErrorKind::InvalidArgument,
            "expansion exponents must be strictly decreasing");
  for (double e : b.log_exponents)
    require(contains(b.exponents, e), ErrorKind::InvalidArgument, "log exponent without a matching power");
  for (double r : b.remainder) require(r < 0.0, ErrorKind::InvalidArgument, "remainder powers must be negative");
}

}  // namespace

double AsymptoticExpansion::coefficient(double exponent) const {
  for (std::size_t i = 0; i < basis.exponents.size(); ++i)
    if (basis.exponents[i] == exponent) return a[i];
  return 0.0;
}

double AsymptoticExpansion::log_coefficient(double exponent) const {
  for (std::size_t i = 0; i < basis.log_exponents.size(); ++i)
    if (basis.log_exponents[i] == exponent) return b[i];
  return 0.0;
}

double AsymptoticExpansion::evaluate(double t) const {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::pow(t, basis.exponents[i]);
  for (std::size_t i = 0; i < b.size(); ++i) s += b[i] * std::pow(t, basis.log_exponents[i]) * std::log(t);
  for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * std::pow(t, basis.remainder[i]);
  return s;
}

AsymptoticExpansion fit_expansion(const std::vector<double>& t, const std::vector<double>& g,
                                  const ExpansionBasis& basis) {
  validate_basis(basis);
  require(t.size() == g.size(), ErrorKind::DimensionMismatch, "fit_expansion: |t| != |G|");
  std::size_t p = basis.exponents.size() + basis.log_exponents.size() + basis.remainder.size();
  require(t.size() >= 2 * p, ErrorKind::InvalidArgument, "fit_expansion: need at least twice as many samples as basis functions");
  double lo = *std::min_element(t.begin(), t.end()), hi = *std::max_element(t.begin(), t.end());
  require(lo > 0.0, ErrorKind::InvalidArgument, "fit_expansion: t must be positive");
  require(hi >= 10.0 * lo, ErrorKind::InvalidArgument, "fit_expansion: samples must span at least a decade");

  Index n = static_cast<Index>(t.size());
  Eigen::MatrixXd x(n, static_cast<Index>(p));
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    double ti = t[static_cast<std::size_t>(i)];
    Index col = 0;
    for (double e : basis.exponents) x(i, col++) = std::pow(ti, e);
    for (double e : basis.log_exponents) x(i, col++) = std::pow(ti, e) * std::log(ti);
    for (double r : basis.remainder) x(i, col++) = std::pow(ti, r);
    y(i) = g[static_cast<std::size_t>(i)];
  }
  Eigen::VectorXd norms = x.colwise().norm();
  Eigen::MatrixXd xs = x * norms.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(xs, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd sv = svd.singularValues();
  AsymptoticExpansion out;
  out.basis = basis;
  out.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  require(out.condition <= kMaxFitCondition, ErrorKind::IllConditioned,
          "fit_expansion: design matrix condition number " + std::to_string(out.condition) + " exceeds 1e12");
  Eigen::VectorXd coef = norms.cwiseInverse().asDiagonal() * svd.solve(y);
  Index col = 0;
  for (std::size_t i = 0; i < basis.exponents.size(); ++i) out.a.push_back(coef(col++));
  for (std::size_t i = 0; i < basis.log_exponents.size(); ++i) out.b.push_back(coef(col++));
  for (std::size_t i = 0; i < basis.remainder.size(); ++i) out.c.push_back(coef(col++));
  out.free_term = out.a.back();
  out.residual = (x * coef - y).cwiseAbs().maxCoeff();
  return out;
}

std::vector<double> log_grid(std::size_t n, double lo, double hi) {
  require(n >= 2 && lo > 0.0 && hi > lo, ErrorKind::InvalidArgument, "log_grid: bad range");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
  out.back() = hi;
  return out;
}

namespace {

/// Diagonal scaling; `power` = 1 for S(t), −1 for S(t)⁻¹ (computed directly, the range can exceed e^{±400}).
std::vector<Operator> scaling_diagonal(const MorseDatum& m, const Representation& rho, double t, double power) {
  require(t > 0.0, ErrorKind::InvalidArgument, "scaling morphism needs t > 0");
  double lo = 0.0, hi = 0.0;
  for (const auto& x : m.points) {
    lo = std::min(lo, -t * x.value);
    hi = std::max(hi, -t * x.value);
  }
  require(hi - lo + std::abs(std::log(std::numbers::pi / t)) * (1.0 + m.dimension) < 700.0, ErrorKind::IllConditioned,
          "scaling morphism: e^{t h} leaves the double-precision range");
  std::vector<Operator> s;
  double n = static_cast<double>(m.dimension);
  for (int q = 0; q <= m.dimension; ++q) {
    auto cells = m.cells(q);
    Index k = rho.dim;
    Mat diag = Mat::Zero(static_cast<Index>(cells.size()) * k, static_cast<Index>(cells.size()) * k);
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const auto& x = m.points[cells[j]];
      double v = std::exp(power * (-t * x.value + (n / 4.0 - q / 2.0) * std::log(std::numbers::pi / t)));
      for (Index i = 0; i < k; ++i) diag(static_cast<Index>(j) * k + i, static_cast<Index>(j) * k + i) = v;
    }
    s.push_back(Operator::constant(rho.algebra, diag));
  }
  return s;
}

}  // namespace

std::vector<Operator> scaling_components(const MorseDatum& m, const Representation& rho, double t) {
  return scaling_diagonal(m, rho, t, 1.0);
}

ScalingCone scaling_cone_torsion(double t, const MorseDatum& m, const Representation& rho) {
  HilbertComplex c = build_complex(m, rho);
  std::vector<Operator> s = scaling_components(m, rho, t);
  std::vector<Operator> s_inv = scaling_diagonal(m, rho, t, -1.0);
  std::vector<Operator> deformed;
  for (int q = 0; q < c.top_degree(); ++q)
    deformed.push_back(s[static_cast<std::size_t>(q) + 1] * c.d(q) * s_inv[static_cast<std::size_t>(q)]);
  HilbertComplex ct(c.algebra(), c.dims(), deformed, false);
  ComplexMorphism f = make_morphism(ct, c, s_inv);
  ScalingCone out;
  out.t = t;
  // The cone of an isomorphism is acyclic; its singular values span e^{±t·(max h − min h)}.
  SpectralOptions opt;
  opt.known_acyclic = true;
  out.log_t_cone = log_torsion(mapping_cone(f).complex, opt);
  for (std::size_t j = 0; j < s_inv.size(); ++j) out.log_t_volumes += (j % 2 ? -1.0 : 1.0) * log_vol(s_inv[j]);
  out.gap = std::abs(out.log_t_cone - out.log_t_volumes);
  return out;
}

ScalingCheck check_scaling_coefficients(const MorseDatum& m, const Representation& rho, const std::vector<double>& t,
                                        double tol) {
  validate(m);
  ScalingCheck r;
  r.t = t;
  double k = static_cast<double>(rho.dim), n = static_cast<double>(m.dimension);
  for (int j = 0; j <= m.dimension; ++j) {
    double sign = j % 2 ? -1.0 : 1.0;
    for (std::size_t i : m.cells(j)) r.expected_linear += sign * k * m.points[i].value;
    r.expected_log -= sign * (n / 4.0 - j / 2.0) * static_cast<double>(m.count(j)) * k;
  }
  for (double x : t) {
    ScalingCone sc = scaling_cone_torsion(x, m, rho);
    r.g.push_back(sc.log_t_cone);
    r.max_route_gap = std::max(r.max_route_gap, sc.gap);
  }
  ExpansionBasis basis;
  basis.exponents = {1.0, 0.0};
  basis.log_exponents = {0.0};
  r.fit = fit_expansion(t, r.g, basis);
  // B log(π/t) = B log π − B log t.
  r.linear_residual = std::abs(r.fit.coefficient(1.0) - r.expected_linear);
  r.log_residual = std::abs(-r.fit.log_coefficient(0.0) - r.expected_log);
  r.pass = r.linear_residual < tol && r.log_residual < tol;
  return r;
}

}  // namespace tl
