#include "torsionlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "torsionlab/errors.hpp"

namespace tl {

namespace {

struct Atom {
  double u;  // log σ
  double w;
};

double ln2() { return std::numbers::ln2; }

// Least-squares line y = c + m x; returns {m, rms residual}.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  double n = static_cast<double>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  double m = sxx > 0 ? sxy / sxx : 0.0;
  double r = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double e = y[i] - (my + m * (x[i] - mx));
    r += e * e;
  }
  return {m, std::sqrt(r / n)};
}

struct AdaptiveFk {
  double value;
  double error;
  SpectralMeasure measure;
};

AdaptiveFk adaptive_fk(const Operator& op, const SpectralOptions& opt) {
  double norm = sup_norm(op);
  double thr = kSigmaTol * norm;
  auto res = integrate_adaptive(
      [&](double t) {
        RVec s = singular_values(op.fiber(t));
        double acc = 0;
        for (Index i = 0; i < s.size(); ++i)
          if (s(i) > thr) acc += std::log(s(i));
        return std::vector<double>{acc};
      },
      1, opt.adaptive);
  SpectralMeasure m = quadrature_measure(op, res.nodes);
  finalize_measure(m, std::max(norm, m.norm));
  return {res.value[0], res.error_estimate, std::move(m)};
}

}  // namespace

const char* det_class_name(DetClass d) {
  switch (d) {
    case DetClass::Yes:
      return "determinant_class";
    case DetClass::No:
      return "not_determinant_class";
    case DetClass::Unresolved:
      return "unresolved";
  }
  return "?";
}

void finalize_measure(SpectralMeasure& m, double norm_override) {
  double norm = 0.0;
  for (const auto& s : m.sv)
    if (s.size()) norm = std::max(norm, s(0));
  m.norm = norm_override >= 0 ? norm_override : norm;
  double thr = m.kernel_threshold();
  Index max_rank = 0;
  std::vector<Index> ranks(m.sv.size());
  for (std::size_t i = 0; i < m.sv.size(); ++i) {
    ranks[i] = count_above(m.sv[i], thr);
    max_rank = std::max(max_rank, ranks[i]);
  }
  m.rank_jump_measure = 0.0;
  for (std::size_t i = 0; i < m.sv.size(); ++i)
    if (ranks[i] < max_rank) m.rank_jump_measure += m.weights[i];
}

SpectralMeasure uniform_measure(const Operator& op, std::size_t n) {
  SpectralMeasure m;
  if (op.is_scalar()) {
    m.weights = {1.0};
    m.sv = {singular_values(op.matrix())};
  } else if (op.payload() == Operator::Payload::Sampled) {
    std::size_t k = op.sample_count();
    m.weights.assign(k, 1.0 / static_cast<double>(k));
    for (const auto& f : op.samples()) m.sv.push_back(singular_values(f));
  } else {
    require(n > 0, ErrorKind::InvalidArgument, "uniform_measure: zero fibers");
    m.weights.assign(n, 1.0 / static_cast<double>(n));
    for (std::size_t j = 0; j < n; ++j) m.sv.push_back(singular_values(op.fiber((j + 0.5) / static_cast<double>(n))));
  }
  finalize_measure(m);
  return m;
}

SpectralMeasure quadrature_measure(const Operator& op, const std::vector<QuadNode>& nodes) {
  SpectralMeasure m;
  for (const auto& q : nodes) {
    m.weights.push_back(q.w);
    m.sv.push_back(singular_values(op.fiber(q.t)));
  }
  finalize_measure(m);
  return m;
}

cplx vn_trace(const Operator& op) {
  require(op.is_square(), ErrorKind::DimensionMismatch, "vn_trace: operator is not square");
  switch (op.payload()) {
    case Operator::Payload::Matrix:
      return op.matrix().trace();
    case Operator::Payload::TrigPoly: {
      auto it = op.terms().find(0);
      return it == op.terms().end() ? cplx(0.0) : it->second.trace();
    }
    case Operator::Payload::Sampled: {
      cplx s = 0.0;
      for (const auto& f : op.samples()) s += f.trace();
      return s / static_cast<double>(op.sample_count());
    }
  }
  return 0.0;
}

SpectralDensity spectral_density(const SpectralMeasure& m, const std::vector<double>& grid) {
  require(!grid.empty(), ErrorKind::InvalidArgument, "spectral_density: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(grid[i] >= 0.0, ErrorKind::InvalidArgument, "spectral_density: negative grid point");
    require(i == 0 || grid[i] >= grid[i - 1], ErrorKind::InvalidArgument, "spectral_density: grid not ascending");
  }
  SpectralDensity d;
  d.grid = grid;
  d.values.assign(grid.size(), 0.0);
  double thr = m.kernel_threshold();
  for (std::size_t a = 0; a < m.sv.size(); ++a) {
    const RVec& s = m.sv[a];
    for (Index i = 0; i < s.size(); ++i) {
      if (s(i) <= thr) d.kernel_dim += m.weights[a];
      auto it = std::lower_bound(grid.begin(), grid.end(), s(i));
      for (auto g = it - grid.begin(); g < static_cast<std::ptrdiff_t>(grid.size()); ++g)
        d.values[static_cast<std::size_t>(g)] += m.weights[a];
    }
  }
  return d;
}

SpectralDensity spectral_density(const Operator& op, const std::vector<double>& grid, const SpectralOptions& opt) {
  return spectral_density(uniform_measure(op, opt.samples), grid);
}

DetClassVerdict determinant_class_check(const SpectralMeasure& m, const std::vector<double>& epsilons) {
  DetClassVerdict v;
  double thr = m.kernel_threshold();
  // A single fiber has a finite spectrum, so sub-threshold values are roundoff and belong to the
  // kernel. For fibered measures they carry the near-zero tail that decides the verdict.
  double floor = m.sv.size() == 1 ? thr : 0.0;
  std::vector<Atom> atoms;
  for (std::size_t a = 0; a < m.sv.size(); ++a)
    for (Index i = 0; i < m.sv[a].size(); ++i) {
      double s = m.sv[a](i);
      if (s <= thr) v.near_kernel_measure += m.weights[a];
      if (s > floor) atoms.push_back({std::log(s), m.weights[a]});
    }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& x, const Atom& y) { return x.u < y.u; });

  std::vector<double> eps = epsilons;
  if (eps.empty()) {
    double umin = atoms.empty() ? 0.0 : std::min(0.0, atoms.front().u);
    int kmax = std::clamp(static_cast<int>(std::ceil(-umin / ln2())) + 4, 4, 1074);
    for (int k = 1; k <= kmax; ++k) eps.push_back(std::ldexp(1.0, -k));
  }
  for (std::size_t i = 0; i < eps.size(); ++i)
    require(eps[i] > 0 && (i == 0 || eps[i] < eps[i - 1]), ErrorKind::InvalidArgument,
            "determinant_class_check: epsilons must be positive and strictly decreasing");
  v.epsilons = eps;

  // Exact partial integrals from suffix sums over ascending atoms.
  std::vector<double> suffix(atoms.size() + 1, 0.0);
  for (std::size_t i = atoms.size(); i-- > 0;) suffix[i] = suffix[i + 1] + atoms[i].w * atoms[i].u;
  for (double e : eps) {
    double le = std::log(e);
    auto it = std::lower_bound(atoms.begin(), atoms.end(), le, [](const Atom& x, double u) { return x.u < u; });
    v.log_det_lower_bound_sequence.push_back(suffix[static_cast<std::size_t>(it - atoms.begin())]);
  }
  v.limit = v.log_det_lower_bound_sequence.empty() ? 0.0 : v.log_det_lower_bound_sequence.back();

  // Shell increments of a smoothed distribution: atom i is spread uniformly in log σ over
  // [u_{i-1}, u_i]. This removes the plateaus that a finite fiber sample produces between
  // consecutive sample values without changing where the mass sits asymptotically.
  std::size_t shells = eps.size() > 0 ? eps.size() - 1 : 0;
  std::vector<double> bound(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) bound[i] = std::log(eps[i]);
  std::vector<double> inc(shells, 0.0);
  auto shell_of = [&](double u) -> std::ptrdiff_t {
    // shell j covers (bound[j+1], bound[j]]
    auto it = std::lower_bound(bound.begin(), bound.end(), u, [](double b, double x) { return b >= x; });
    return (it - bound.begin()) - 1;
  };
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    double hi = atoms[i].u;
    double lo = i == 0 ? hi : atoms[i - 1].u;
    if (hi - lo <= 1e-300) {
      std::ptrdiff_t j = shell_of(hi);
      if (j >= 0 && j < static_cast<std::ptrdiff_t>(shells)) inc[static_cast<std::size_t>(j)] += atoms[i].w * hi;
      continue;
    }
    double dens = atoms[i].w / (hi - lo);
    for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(shell_of(hi), 0); j < static_cast<std::ptrdiff_t>(shells); ++j) {
      auto ju = static_cast<std::size_t>(j);
      double top = std::min(hi, bound[ju]);
      double bot = std::max(lo, bound[ju + 1]);
      if (top > bot) inc[ju] += dens * 0.5 * (top * top - bot * bot);
      if (bound[ju + 1] <= lo) break;
    }
  }

  std::ostringstream diag;
  diag << "shells=" << shells << " near_kernel_measure=" << v.near_kernel_measure;
  // Tail law over the resolved range (up to the last shell that received mass). A power law
  // |inc_k| ~ k^{-p} with p ≤ 1 has a divergent sum; geometric decay or a finite spectrum does not.
  std::size_t last = 0;
  for (std::size_t j = 0; j < shells; ++j)
    if (inc[j] != 0.0) last = j + 1;
  std::vector<double> lx, ly, x;
  for (std::size_t j = last / 2; j < last; ++j)
    if (inc[j] != 0.0) {
      double k = -std::log2(eps[j]);
      x.push_back(k);
      lx.push_back(std::log(k));
      ly.push_back(std::log(std::abs(inc[j])));
    }
  if (x.size() >= 10) {
    auto [mp, rp] = fit_line(lx, ly);
    auto [mg, rg] = fit_line(x, ly);
    double p = -mp;
    diag << " power_exponent=" << p << " power_rms=" << rp << " geometric_rate=" << -mg << " geometric_rms=" << rg;
    // Extrapolated remaining tail under each law; both large means the integral diverges.
    double inc_last = std::abs(inc[last - 1]), k_last = x.back();
    double beta = -mg;
    double tail_geo = beta > 0 ? inc_last * std::exp(-beta) / (1.0 - std::exp(-beta)) : HUGE_VAL;
    double tail_pow = p > 1 ? inc_last * k_last / (p - 1.0) : HUGE_VAL;
    diag << " tail_geometric=" << tail_geo << " tail_power=" << tail_pow;
    if (tail_geo >= 1.0 && tail_pow >= 1.0) {
      v.state = DetClass::No;
      v.divergence_rate_estimate = std::max(0.0, 1.0 - p);
    }
  }
  if (v.state != DetClass::No && shells >= 3 && std::abs(inc[shells - 1]) < kDetClassTol &&
      std::abs(inc[shells - 2]) < kDetClassTol && std::abs(inc[shells - 3]) < kDetClassTol)
    v.state = DetClass::Yes;
  v.is_determinant_class = v.state == DetClass::Yes;
  v.diagnostics = diag.str();
  return v;
}

DetClassVerdict determinant_class_check(const Operator& op, const std::vector<double>& epsilons,
                                        const SpectralOptions& opt) {
  if (op.payload() == Operator::Payload::TrigPoly) return determinant_class_check(adaptive_fk(op, opt).measure, epsilons);
  return determinant_class_check(uniform_measure(op, opt.samples), epsilons);
}

double log_det_prime(const SpectralMeasure& m) {
  double thr = m.kernel_threshold(), acc = 0.0;
  for (std::size_t a = 0; a < m.sv.size(); ++a)
    for (Index i = 0; i < m.sv[a].size(); ++i)
      if (m.sv[a](i) > thr) acc += m.weights[a] * std::log(m.sv[a](i));
  return acc;
}

FkResult fk_log_det_report(const Operator& op, const SpectralOptions& opt) {
  FkResult r;
  SpectralMeasure m;
  if (op.payload() == Operator::Payload::TrigPoly) {
    AdaptiveFk a = adaptive_fk(op, opt);
    m = std::move(a.measure);
    r.log_det = a.value;
    r.error_estimate = a.error;
  } else {
    m = uniform_measure(op, opt.samples);
    r.log_det = log_det_prime(m);
  }
  r.fibers = m.sv.size();
  r.rank_jump_measure = m.rank_jump_measure;
  r.verdict = determinant_class_check(m);
  if (r.verdict.state == DetClass::No)
    throw DivergentDeterminant("fk_log_det: operator is not of determinant class (" + r.verdict.diagnostics + ")");
  return r;
}

double fk_log_det(const Operator& op, const SpectralOptions& opt) { return fk_log_det_report(op, opt).log_det; }

double heat_trace(const SpectralMeasure& m, double t) {
  require(t > 0, ErrorKind::InvalidArgument, "heat_trace: t must be positive");
  double thr = m.kernel_threshold(), acc = 0.0;
  for (std::size_t a = 0; a < m.sv.size(); ++a)
    for (Index i = 0; i < m.sv[a].size(); ++i)
      if (m.sv[a](i) > thr) acc += m.weights[a] * std::exp(-t * m.sv[a](i));
  return acc;
}

double heat_trace(const Operator& op, double t, const SpectralOptions& opt) {
  return heat_trace(uniform_measure(op, opt.samples), t);
}

cplx gamma_fn(cplx s) {
  static const double g = 7.0;
  static const double c[9] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                              771.32342877765313,   -176.61502916214059,   12.507343278686905,
                              -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (s.real() < 0.5) return std::numbers::pi / (std::sin(std::numbers::pi * s) * gamma_fn(1.0 - s));
  s -= 1.0;
  cplx x = c[0];
  for (int i = 1; i < 9; ++i) x += c[i] / (s + static_cast<double>(i));
  cplx t = s + g + 0.5;
  return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, s + 0.5) * std::exp(-t) * x;
}

cplx zeta_I(const SpectralMeasure& m, cplx s) {
  require(s.real() > 0, ErrorKind::InvalidArgument,
          "zeta_I: Re s must be positive (the Mellin integral over [0,1] diverges otherwise)");
  // Substitute t = e^{-x}: ∫₀¹ t^{s-1} θ(t) dt = ∫₀^∞ e^{-xs} θ(e^{-x}) dx.
  double xmax = std::min(40.0 / s.real(), 800.0);
  int panels = static_cast<int>(std::ceil(xmax / 0.5));
  std::vector<QuadNode> ref = gauss_legendre(10, 0.0, 1.0);
  double h = xmax / panels;
  cplx acc = 0.0;
  for (int p = 0; p < panels; ++p)
    for (const auto& q : ref) {
      double x = (p + q.t) * h;
      acc += h * q.w * std::exp(-x * s) * heat_trace(m, std::exp(-x));
    }
  return acc / gamma_fn(s);
}

cplx zeta_I(const Operator& op, cplx s, const SpectralOptions& opt) {
  return zeta_I(uniform_measure(op, opt.samples), s);
}

double trace_norm(const Operator& op, const SpectralOptions& opt) {
  SpectralMeasure m = uniform_measure(op, opt.samples);
  double acc = 0.0;
  for (std::size_t a = 0; a < m.sv.size(); ++a) acc += m.weights[a] * m.sv[a].sum();
  return acc;
}

double smoothstep(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double p = std::exp(-1.0 / x), q = std::exp(-1.0 / (1.0 - x));
  return p / (p + q);
}

double smoothstep_derivative(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  double p = std::exp(-1.0 / x), q = std::exp(-1.0 / (1.0 - x));
  double dp = p / (x * x), dq = -q / ((1.0 - x) * (1.0 - x));
  return (dp * q - p * dq) / ((p + q) * (p + q));
}

double spectral_shift_function(double lambda, double a, double b) {
  return a + (lambda - a) * smoothstep((lambda - a) / (b - a));
}

Operator spectral_shift(const Operator& op, double a, double b, const SpectralOptions& opt) {
  require(0 < a && a < b, ErrorKind::InvalidArgument, "spectral_shift: need 0 < a < b");
  require(op.is_square(), ErrorKind::DimensionMismatch, "spectral_shift: operator is not square");
  return fiberwise(
      op,
      [&](const Mat& m) -> Mat {
        require(hermitian_defect(m) < 1e-10, ErrorKind::NotSelfAdjoint, "spectral_shift: fiber is not selfadjoint");
        return hermitian_apply(0.5 * (m + m.adjoint()), [&](double l) {
          require(l > -1e-10 * std::max(1.0, m.norm()), ErrorKind::NotSelfAdjoint,
                  "spectral_shift: fiber is not nonnegative");
          return cplx(spectral_shift_function(l, a, b));
        });
      },
      opt.samples);
}

}  // namespace tl
