#include "torsionlab/suite.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>

#include "torsionlab/circle.hpp"
#include "torsionlab/commands.hpp"
#include "torsionlab/errors.hpp"

namespace tl {

Profile parse_profile(const std::string& name) {
  if (name == "smoke") return Profile::Smoke;
  if (name == "desk") return Profile::Desk;
  if (name == "deep") return Profile::Deep;
  fail(ErrorKind::InvalidArgument, "unknown profile \"" + name + "\" (smoke, desk, deep)");
}

const char* profile_name(Profile p) {
  switch (p) {
    case Profile::Smoke: return "smoke";
    case Profile::Desk: return "desk";
    case Profile::Deep: return "deep";
  }
  return "desk";
}

SuiteSettings settings_for(Profile p) {
  switch (p) {
    case Profile::Smoke: return {p, 3, 1024, 6};
    case Profile::Desk: return {p, 6, 4096, 15};
    case Profile::Deep: return {p, 10, 16384, 30};
  }
  return {};
}

namespace {

constexpr double kPi = std::numbers::pi;

/// Worst residual over instances; NaN sticks.
struct Worst {
  double value = 0.0;
  int count = 0;
  void add(double r) {
    ++count;
    if (!(r <= value)) value = std::isnan(value) ? value : r;
  }
};

SuiteCheck finish(const std::string& oracle, double tol, const Worst& w, bool extra_ok = true,
                  const std::string& detail = "") {
  SuiteCheck c;
  c.oracle = oracle;
  c.tolerance = tol;
  c.residual = w.value;
  c.instances = w.count;
  c.pass = extra_ok && w.value <= tol;
  c.detail = detail;
  return c;
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Operator scalar_op(cplx a) { return Operator::scalar(Mat::Constant(1, 1, a)); }

Mat unitary(Rng& rng, Index k) {
  Eigen::HouseholderQR<Mat> q(gaussian_matrix(rng, k, k));
  return q.householderQ();
}

Mat positive(Rng& rng, Index k, double lo, double hi) {
  Mat u = unitary(rng, k);
  RVec l(k);
  for (Index i = 0; i < k; ++i) l(i) = uniform(rng, lo, hi);
  return u * l.cast<cplx>().asDiagonal() * u.adjoint();
}

/// c + N e^{2πit} with ‖N‖ = 1 < c, so every fiber is invertible.
Operator invertible_symbol(Rng& rng, Index k, double c) {
  Mat n = gaussian_matrix(rng, k, k);
  n /= op_norm(n);
  return Operator::trig_poly(k, k, {{0, Mat::Identity(k, k) * cplx(c)}, {uniform_int(rng, 0, 1) ? 1 : -1, n}});
}

Operator random_symbol(Rng& rng, Index r, Index c) {
  return Operator::trig_poly(r, c, {{-1, gaussian_matrix(rng, r, c)}, {0, gaussian_matrix(rng, r, c)},
                                    {1, gaussian_matrix(rng, r, c)}});
}

Index dim_in(Rng& rng, Index hi) { return uniform_int(rng, 1, static_cast<int>(std::max<Index>(1, hi))); }

std::vector<Index> random_ranks(Rng& rng, int len, Index max_dim, int lo = 0) {
  std::vector<Index> r(static_cast<std::size_t>(len));
  for (auto& x : r) x = uniform_int(rng, lo, static_cast<int>(std::max<Index>(lo, max_dim / 2)));
  return r;
}

/// Σ(−1)^q log|det(d_q : (ker d_q)^⊥ → ker d_{q+1})| with QR bases and LU determinants.
double dense_acyclic_torsion(const HilbertComplex& c) {
  int n = c.top_degree();
  std::vector<Mat> ker(static_cast<std::size_t>(n + 1)), comp(static_cast<std::size_t>(n + 1));
  Index r_in = 0;
  for (int q = 0; q <= n; ++q) {
    Index k = c.dim(q);
    Mat full = Mat::Identity(k, k);
    if (q > 0 && r_in > 0) {
      Eigen::HouseholderQR<Mat> qr(c.d(q - 1).matrix());
      full = qr.householderQ();
    }
    ker[static_cast<std::size_t>(q)] = full.leftCols(r_in);
    comp[static_cast<std::size_t>(q)] = full.rightCols(k - r_in);
    r_in = k - r_in;
  }
  double s = 0.0;
  for (int q = 0; q < n; ++q) {
    Mat m = ker[static_cast<std::size_t>(q + 1)].adjoint() * c.d(q).matrix() * comp[static_cast<std::size_t>(q)];
    if (m.size() == 0) continue;
    s += (q % 2 ? -1.0 : 1.0) * std::log(std::abs(Eigen::PartialPivLU<Mat>(m).determinant()));
  }
  return s;
}

/// 2m alternating critical points at sorted random positions at least 0.03 apart.
MorseDatum random_circle(Rng& rng, int m) {
  std::vector<double> pos;
  for (;;) {
    pos.clear();
    for (int i = 0; i < 2 * m; ++i) pos.push_back(uniform(rng, 0.0, 1.0));
    std::sort(pos.begin(), pos.end());
    bool ok = pos.back() - pos.front() < 1.0 - 0.03;
    for (std::size_t i = 1; i < pos.size(); ++i) ok = ok && pos[i] - pos[i - 1] > 0.03;
    if (ok) break;
  }
  int first = uniform_int(rng, 0, 1);
  std::vector<std::pair<double, int>> pts;
  for (std::size_t i = 0; i < pos.size(); ++i) pts.emplace_back(pos[i], static_cast<int>((first + i) % 2));
  MorseDatum d = circle_triangulation(pts);
  for (auto& p : d.points) p.value = p.index == 0 ? uniform(rng, 0.0, 0.4) : uniform(rng, 0.6, 1.0);
  return d;
}

/// Subdivides inside the widest gap of a circle triangulation.
MorseDatum subdivide_widest(Rng& rng, const MorseDatum& m) {
  std::vector<double> pos;
  for (const auto& p : m.points) pos.push_back(p.position);
  std::sort(pos.begin(), pos.end());
  double best = pos.front() + 1.0 - pos.back(), start = pos.back();
  for (std::size_t i = 1; i < pos.size(); ++i)
    if (pos[i] - pos[i - 1] > best) {
      best = pos[i] - pos[i - 1];
      start = pos[i - 1];
    }
  double at = std::fmod(start + best * uniform(rng, 0.15, 0.35), 1.0);
  return subdivide_circle(m, at, best * uniform(rng, 0.2, 0.4));
}

/// Piecewise-linear structure through four random positive samples.
HermitianStructure random_structure(Rng& rng, const Operator& holonomy) {
  std::vector<double> t;
  double x = 0.05 * uniform(rng, 0.0, 1.0);
  for (int i = 0; i < 4; ++i) {
    t.push_back(x);
    x += 0.1 + 0.12 * uniform(rng, 0.0, 1.0);
  }
  std::vector<Operator> mu;
  for (std::size_t i = 0; i < t.size(); ++i) mu.push_back(Operator::scalar(positive(rng, holonomy.rows(), 0.4, 2.5)));
  return sampled_structure(holonomy, t, mu);
}

Operator random_holonomy(Rng& rng, Index k) { return Operator::scalar(well_conditioned_matrix(rng, k, 1.3, 2.8)); }

// trace-algebra

SuiteCheck trace_commutativity(Rng& rng, const SuiteSettings& s) {
  Worst w;
  for (int i = 0; i < s.instances; ++i) {
    Index k = dim_in(rng, s.max_dim), l = dim_in(rng, s.max_dim);
    Operator a = Operator::scalar(gaussian_matrix(rng, k, l)), b = Operator::scalar(gaussian_matrix(rng, l, k));
    cplx ab = vn_trace(a * b);
    w.add(std::abs(ab - vn_trace(b * a)) / std::max(1.0, std::abs(ab)));
    Operator p = random_symbol(rng, k, l), q = random_symbol(rng, l, k);
    cplx pq = vn_trace(p * q);
    w.add(std::abs(pq - vn_trace(q * p)) / std::max(1.0, std::abs(pq)));
  }
  return finish("tr(ba)", 1e-9, w);
}

SuiteCheck trace_norm_submultiplicative(Rng& rng, const SuiteSettings& s) {
  Worst w;
  SpectralOptions opt;
  opt.samples = s.fibers;
  for (int i = 0; i < s.instances; ++i) {
    Index k = dim_in(rng, s.max_dim), l = dim_in(rng, s.max_dim);
    Operator v = Operator::scalar(gaussian_matrix(rng, k, k)), u = Operator::scalar(gaussian_matrix(rng, k, l));
    double rhs = op_norm(v.matrix()) * trace_norm(u);
    w.add(std::max(0.0, trace_norm(v * u) - rhs) / std::max(1.0, rhs));
    Operator vs = random_symbol(rng, k, k), us = random_symbol(rng, k, l);
    double rhs_s = sup_norm(vs) * trace_norm(us, opt);
    w.add(std::max(0.0, trace_norm(vs * us, opt) - rhs_s) / std::max(1.0, rhs_s));
  }
  return finish("||v|| ||u||_tr (excess over the bound)", 1e-9, w);
}

SuiteCheck density_monotone(Rng& rng, const SuiteSettings& s) {
  Worst w;
  SpectralOptions opt;
  opt.samples = s.fibers;
  std::vector<double> grid{0.0};
  for (int i = -12; i <= 6; ++i) grid.push_back(std::pow(10.0, 0.5 * i));
  grid.push_back(1e12);
  for (int i = 0; i < s.instances; ++i) {
    Index k = dim_in(rng, s.max_dim), l = dim_in(rng, s.max_dim);
    for (const Operator& op : {Operator::scalar(gaussian_matrix(rng, k, l)), random_symbol(rng, k, l)}) {
      auto d = spectral_density(op, grid, opt);
      double r = std::abs(d.values.back() - static_cast<double>(std::min(k, l)));
      for (std::size_t j = 1; j < d.values.size(); ++j) r = std::max(r, d.values[j - 1] - d.values[j]);
      w.add(r);
    }
  }
  return finish("F nondecreasing with F(inf) = min(rows, cols)", 1e-12, w);
}

SuiteCheck fk_multiplicative(Rng& rng, const SuiteSettings& s) {
  Worst w;
  SpectralOptions opt;
  opt.samples = s.fibers;
  for (int i = 0; i < s.instances; ++i) {
    Index k = dim_in(rng, s.max_dim);
    Operator p = Operator::scalar(well_conditioned_matrix(rng, k)), q = Operator::scalar(well_conditioned_matrix(rng, k));
    w.add(std::abs(fk_log_det(p * q) - fk_log_det(p) - fk_log_det(q)));
    Index ks = dim_in(rng, std::min<Index>(s.max_dim, 3));
    Operator a = invertible_symbol(rng, ks, 2.0), b = invertible_symbol(rng, ks, 1.5);
    w.add(std::abs(fk_log_det(a * b, opt) - fk_log_det(a, opt) - fk_log_det(b, opt)));
  }
  return finish("fk_log_det(a) + fk_log_det(b)", 1e-7, w);
}

SuiteCheck heat_trace_decay(Rng& rng, const SuiteSettings& s) {
  Worst w;
  const double eps = 0.2;
  for (int i = 0; i < s.instances; ++i) {
    Operator h = Operator::scalar(positive(rng, dim_in(rng, s.max_dim), eps, 3.0));
    double c = heat_trace(h, 1e-12);
    for (double t : {0.1, 1.0, 5.0, 20.0, 60.0}) w.add(std::max(0.0, heat_trace(h, t) - c * std::exp(-t * eps / 2.0)));
  }
  return finish("C exp(-t eps / 2) (excess over the bound)", 0.0, w);
}

SuiteCheck spectral_shift_properties(Rng& rng, const SuiteSettings& s) {
  Worst w;
  std::vector<double> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back(2.5 * i / 200.0);
  auto one = [&](const Operator& op, double a, double b) {
    Operator out = spectral_shift(op, a, b);
    auto fin = spectral_density(op, grid), fout = spectral_density(out, grid), fa = spectral_density(op, {a});
    double r = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i] < a) r = std::max(r, std::abs(fout.values[i]));
      if (grid[i] >= a) r = std::max(r, fa.values[0] - fout.values[i]);
      if (grid[i] >= b) r = std::max(r, std::abs(fout.values[i] - fin.values[i]));
    }
    w.add(r);
  };
  for (int i = 0; i < s.instances; ++i) {
    double a = uniform(rng, 0.1, 0.5), b = a + uniform(rng, 0.1, 0.6);
    one(Operator::scalar(positive(rng, dim_in(rng, s.max_dim), 0.0, 2.0)), a, b);
  }
  double phase = uniform(rng, 0.0, 1.0);
  one(Operator::sample(1, 1, s.fibers, [phase](double t) {
        return Mat::Constant(1, 1, 2.0 * std::abs(std::sin(kPi * (t + phase))));
      }),
      0.3, 0.6);
  return finish("density zero below a, at least F(a) above a, unchanged above b", 1e-12, w);
}

SuiteCheck alpha_determinant_class(Rng&, const SuiteSettings&) {
  Worst w;
  Operator alpha = Operator::trig_poly(1, 1, {{0, Mat::Constant(1, 1, -1.0)}, {1, Mat::Constant(1, 1, 1.0)}});
  FkResult f = fk_log_det_report(alpha);
  w.add(std::abs(f.log_det));
  return finish("zero (Jensen's formula)", 1e-4, w, f.verdict.state == DetClass::Yes,
                std::string("verdict ") + det_class_name(f.verdict.state));
}

SuiteCheck flat_symbol_density(Rng&, const SuiteSettings& s) {
  Worst w;
  Operator e = Operator::sample(1, 1, s.fibers, [](double x) { return Mat::Constant(1, 1, std::exp(-1.0 / (x * x))); });
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(std::exp(std::log(1e-6) + (-1.0 - std::log(1e-6)) * i / 40.0));
  auto d = spectral_density(e, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double exact = 1.0 / std::sqrt(-std::log(grid[i]));
    w.add(std::abs(d.values[i] - exact) / exact);
  }
  DetClassVerdict v = determinant_class_check(e);
  return finish("(-log lambda)^(-1/2), relative", 0.02, w, v.state == DetClass::No,
                std::string("verdict ") + det_class_name(v.state));
}

// hilbert-complex

SuiteCheck d_squared_enforced(Rng& rng, const SuiteSettings& s) {
  Worst w;
  bool rejected = true;
  for (int i = 0; i < s.instances; ++i) {
    HilbertComplex c = random_complex(rng, random_dims(rng, 5, s.max_dim));
    w.add(c.d_squared_defect());
    for (int q = 0; q + 1 < c.top_degree(); ++q) {
      std::vector<Operator> d = c.differentials();
      d[static_cast<std::size_t>(q + 1)] = Operator::scalar(gaussian_matrix(rng, c.dim(q + 2), c.dim(q + 1)));
      if (op_norm((d[static_cast<std::size_t>(q + 1)] * d[static_cast<std::size_t>(q)]).matrix()) < 1e-6) continue;
      try {
        HilbertComplex bad(Algebra::Scalar, c.dims(), d);
        rejected = false;
      } catch (const Error&) {
      }
      break;
    }
  }
  return finish("zero; corrupted differentials rejected", kComplexTol, w, rejected);
}

SuiteCheck laplacian_density_split(Rng& rng, const SuiteSettings& s) {
  Worst w;
  std::vector<double> grid, root;
  for (int i = 0; i <= 60; ++i) grid.push_back(std::pow(10.0, -3.0 + 0.1 * i) + 1e-7 * i);
  for (double g : grid) root.push_back(std::sqrt(g));
  for (int i = 0; i < s.instances; ++i) {
    HilbertComplex c = random_complex(rng, random_dims(rng, 4, s.max_dim));
    auto lap = laplacians(c);
    for (int q = 0; q <= c.top_degree(); ++q) {
      auto n = spectral_density(lap[static_cast<std::size_t>(q)], grid);
      std::vector<double> f(grid.size(), 0.0);
      for (int p : {q, q - 1}) {
        if (p < 0 || p >= c.top_degree()) continue;
        auto fp = spectral_density(c.d(p), root);
        for (std::size_t j = 0; j < grid.size(); ++j) f[j] += fp.values[j] - fp.kernel_dim;
      }
      for (std::size_t j = 0; j < grid.size(); ++j) w.add(std::abs(n.values[j] - n.kernel_dim - f[j]));
    }
  }
  return finish("densities of the adjacent differentials", 1e-8, w);
}

template <class F>
SuiteCheck over_random_complexes(Rng& rng, const SuiteSettings& s, const std::string& oracle, double tol, F&& f) {
  Worst w;
  for (int i = 0; i < s.instances; ++i) w.add(f(random_complex(rng, random_dims(rng, 5, s.max_dim))));
  return finish(oracle, tol, w);
}

SuiteCheck duality(Rng& rng, const SuiteSettings& s) {
  return over_random_complexes(rng, s, "log T(C)", 1e-8,
                               [](const HilbertComplex& c) { return std::abs(log_torsion(dual(c)) - log_torsion(c)); });
}

SuiteCheck suspension_sign(Rng& rng, const SuiteSettings& s) {
  return over_random_complexes(rng, s, "-log T(C)", 1e-8, [](const HilbertComplex& c) {
    return std::abs(log_torsion(suspension(c)) + log_torsion(c));
  });
}

SuiteCheck torsion_two_formulas(Rng& rng, const SuiteSettings& s) {
  return over_random_complexes(rng, s, "torsion from the reduced Laplacians", 1e-8, [](const HilbertComplex& c) {
    auto t = torsion(c);
    return std::abs(t.log_torsion - t.log_torsion_reduced);
  });
}

SuiteCheck acyclic_dense_oracle(Rng& rng, const SuiteSettings& s) {
  Worst w;
  bool acyclic = true;
  for (int i = 0; i < s.instances; ++i) {
    HilbertComplex c = random_acyclic_complex(rng, random_ranks(rng, uniform_int(rng, 1, 4), s.max_dim));
    auto t = torsion(c);
    acyclic = acyclic && t.acyclic;
    w.add(std::abs(t.log_torsion - dense_acyclic_torsion(c)));
  }
  return finish("alternating log|det| on orthogonal complements (QR + LU)", 1e-9, w, acyclic);
}

// mapping-cone

SuiteCheck cone_volume(Rng& rng, const SuiteSettings& s) {
  Worst w;
  for (int i = 0; i < s.instances; ++i) {
    HilbertComplex c = random_complex(rng, random_dims(rng, 5, s.max_dim));
    w.add(check_cone_volume(random_isomorphism(rng, c)).residual);
    w.add(std::abs(log_torsion(mapping_cone(identity_morphism(c)).complex)));
  }
  return finish("alternating sum of log vol(f_j); zero for the identity", 1e-8, w);
}

SuiteCheck cone_laplacian_block(Rng& rng, const SuiteSettings& s) {
  Worst w;
  for (int i = 0; i < s.instances; ++i) {
    HilbertComplex c = random_complex(rng, random_dims(rng, 4, s.max_dim));
    w.add(cone_laplacian_defect(random_isomorphism(rng, c)));
  }
  return finish("2x2 block expression", 1e-10, w);
}

SuiteCheck cone_acyclic_for_iso(Rng& rng, const SuiteSettings& s) {
  Worst w;
  bool iso = true;
  for (int i = 0; i < s.instances; ++i) {
    HilbertComplex c = random_complex(rng, random_dims(rng, 4, s.max_dim));
    ComplexMorphism f = random_isomorphism(rng, c);
    iso = iso && induces_cohomology_iso(f);
    for (double b : reduced_betti(mapping_cone(f).complex)) w.add(b);
  }
  return finish("zero reduced betti numbers", kAcyclicTol, w, iso);
}

SuiteCheck cone_duality(Rng& rng, const SuiteSettings& s) {
  Worst w;
  for (int i = 0; i < s.instances; ++i) {
    HilbertComplex c = random_complex(rng, random_dims(rng, 4, s.max_dim));
    HilbertComplex cone = mapping_cone(random_isomorphism(rng, c)).complex;
    w.add(std::abs(log_torsion(dual(cone)) - log_torsion(cone)));
  }
  return finish("log T(C(f))", 1e-8, w);
}

struct Coupled {
  HilbertComplex c1, c2;
  std::vector<Operator> f;
};

Coupled random_coupled(Rng& rng, const SuiteSettings& s) {
  Index hi = std::max<Index>(2, s.max_dim);
  Coupled c;
  c.c1 = random_acyclic_complex(rng, random_ranks(rng, 3, hi, 1));
  c.c2 = random_acyclic_complex(rng, random_ranks(rng, 2, hi, 1));
  c.f = random_coupling(rng, c.c1, c.c2);
  return c;
}

SuiteCheck cmm_additivity(Rng& rng, const SuiteSettings& s) {
  Worst w;
  for (int i = 0; i < s.instances; ++i) {
    Coupled c = random_coupled(rng, s);
    double t = uniform(rng, 0.0, 2.0);
    std::vector<Operator> g;
    for (const auto& x : c.f) g.push_back(scale(x, t));
    w.add(check_cmm(c.c1, c.c2, g).residual);
  }
  return finish("log T(C1) + log T(C2)", 1e-8, w);
}

SuiteCheck cmm_derivative(Rng& rng, const SuiteSettings& s) {
  Worst w;
  for (int i = 0; i < s.instances; ++i) {
    Coupled c = random_coupled(rng, s);
    w.add(check_cmm_derivative(c.c1, c.c2, c.f, uniform(rng, 0.2, 1.5)).residual);
  }
  return finish("zero (central difference, step 1e-4)", 1e-6, w);
}

SuiteCheck composition(Rng& rng, const SuiteSettings& s) {
  Worst w;
  for (int i = 0; i < s.instances; ++i) {
    HilbertComplex c = random_complex(rng, random_dims(rng, 4, s.max_dim));
    ComplexMorphism f1 = random_isomorphism(rng, c);
    ComplexMorphism f2 = random_isomorphism(rng, f1.target);
    w.add(check_composition(f1, f2).residual);
  }
  return finish("sum of the cone torsions of the factors", 1e-8, w);
}

ShortExactSequence scaled_split(Rng& rng, const HilbertComplex& a, const HilbertComplex& b) {
  HilbertComplex mid = direct_sum(a, b);
  ShortExactSequence s{a, mid, b, {}, {}};
  double ci = uniform(rng, 0.5, 3.0), cp = uniform(rng, 0.5, 3.0);
  for (int i = 0; i <= mid.top_degree(); ++i) {
    Index ka = a.dim(i), kb = b.dim(i);
    Mat inc = Mat::Zero(mid.dim(i), ka);
    inc.topRows(ka) = ci * Mat::Identity(ka, ka);
    Mat proj = Mat::Zero(kb, mid.dim(i));
    proj.rightCols(kb) = cp * Mat::Identity(kb, kb);
    s.inclusion.push_back(Operator::scalar(inc));
    s.projection.push_back(Operator::scalar(proj));
  }
  return s;
}

ShortExactSequence random_sequence(Rng& rng, const SuiteSettings& s, int kind) {
  Index d = std::max<Index>(2, std::min<Index>(s.max_dim, 4));
  if (kind == 0) return cone_sequence(random_isomorphism(rng, random_complex(rng, random_dims(rng, 3, d))));
  std::vector<Index> dims = random_dims(rng, 3, d);
  HilbertComplex a = random_complex(rng, dims), b = random_complex(rng, random_dims(rng, 3, d));
  b = pad_to(b, std::max(a.top_degree(), b.top_degree()));
  a = pad_to(a, b.top_degree());
  return kind == 1 ? split_sequence(a, b) : scaled_split(rng, a, b);
}

SuiteCheck milnor(Rng& rng, const SuiteSettings& s) {
  Worst w;
  for (int i = 0; i < s.instances; ++i) w.add(milnor_check(random_sequence(rng, s, i % 3), 1e-7).result.residual);
  return finish("torsions of the sub, quotient and long exact sequence", 1e-7, w);
}

// morse-combinatorial

SuiteCheck built_complex_d_squared(Rng& rng, const SuiteSettings& s) {
  Worst w;
  Index k = std::min<Index>(s.max_dim, 3);
  for (int i = 0; i < s.instances; ++i) {
    MorseDatum m = random_circle(rng, uniform_int(rng, 1, 3));
    w.add(build_complex(m, single_generator("g", random_holonomy(rng, dim_in(rng, k)))).d_squared_defect());
    MorseDatum torus = product_datum(random_circle(rng, uniform_int(rng, 1, 2)), circle_datum(0.2, 0.7, "h"));
    auto rho = product_representation(single_generator("g", random_holonomy(rng, dim_in(rng, 2))),
                                      single_generator("h", random_holonomy(rng, dim_in(rng, 2))));
    w.add(build_complex(torus, rho).d_squared_defect());
  }
  Operator sym = Operator::trig_poly(1, 1, {{0, Mat::Constant(1, 1, 3.0)}, {1, Mat::Constant(1, 1, 1.0)}});
  w.add(build_complex(random_circle(rng, 2), single_generator("g", sym)).d_squared_defect());
  return finish("zero", kComplexTol, w);
}

SuiteCheck rescaling_invariance(Rng& rng, const SuiteSettings& s) {
  Worst w;
  for (int i = 0; i < s.instances; ++i) {
    MorseDatum m = random_circle(rng, uniform_int(rng, 1, 3));
    auto rho = scalar_representation("g", std::polar(uniform(rng, 1.5, 3.0), uniform(rng, 0.0, 2.0 * kPi)));
    auto mu = canonical_structure(rho.generators.at("g"));
    double c = uniform(rng, -2.0, 2.0);
    auto scaled = conformal_structure(mu, [c](double) { return c; });
    CheckResult r = hermitian_anomaly_check(m, rho, mu, scaled, 1e-10);
    w.add(std::abs(r.lhs));
    w.add(std::abs(r.rhs));
  }
  return finish("zero (signed V terms cancel)", 1e-10, w);
}

SuiteCheck dual_representation_symmetry(Rng& rng, const SuiteSettings& s) {
  Worst w;
  Index k = std::min<Index>(s.max_dim, 3);
  for (int i = 0; i < s.instances; ++i) {
    MorseDatum m = random_circle(rng, uniform_int(rng, 1, 3));
    Index kk = dim_in(rng, k);
    auto rho = single_generator("g", random_holonomy(rng, kk));
    std::vector<Operator> wt, wt_dual;
    for (std::size_t j = 0; j < m.points.size(); ++j) {
      Mat p = positive(rng, kk, 0.4, 2.5);
      wt.push_back(Operator::scalar(p));
      wt_dual.push_back(Operator::scalar(p.inverse()));
    }
    double a = log_torsion(build_complex(m, rho, wt));
    double b = log_torsion(build_complex(dual_triangulation(m), rho.dual(), wt_dual));
    w.add(std::abs(a - b));
  }
  return finish("log T of the original complex", 1e-8, w);
}

SuiteCheck hermitian_anomaly(Rng& rng, const SuiteSettings& s) {
  Worst w;
  Index k = std::min<Index>(s.max_dim, 3);
  for (int i = 0; i < s.instances; ++i) {
    MorseDatum m = random_circle(rng, uniform_int(rng, 1, 3));
    Operator a = random_holonomy(rng, dim_in(rng, k));
    w.add(hermitian_anomaly_check(m, single_generator("g", a), random_structure(rng, a), random_structure(rng, a))
              .residual);
  }
  return finish("signed sum of V(mu1, mu2) over critical points", 1e-8, w);
}

SuiteCheck subdivision_anomaly(Rng& rng, const SuiteSettings& s) {
  Worst w;
  Index k = std::min<Index>(s.max_dim, 3);
  for (int i = 0; i < s.instances; ++i) {
    MorseDatum m = random_circle(rng, uniform_int(rng, 1, 2));
    Operator a = random_holonomy(rng, dim_in(rng, k));
    auto r = subdivision_check(m, subdivide_widest(rng, m), single_generator("g", a), random_structure(rng, a));
    w.add(r.cone_vs_omega.residual);
    w.add(r.torsion_difference.residual);
  }
  return finish("omega(fine, coarse)", 1e-8, w);
}

SuiteCheck omega_cocycle(Rng& rng, const SuiteSettings& s) {
  Worst w;
  Index k = std::min<Index>(s.max_dim, 3);
  for (int i = 0; i < s.instances; ++i) {
    MorseDatum t1 = random_circle(rng, 1);
    MorseDatum t2 = subdivide_widest(rng, t1);
    MorseDatum t3 = subdivide_widest(rng, t2);
    Operator a = random_holonomy(rng, dim_in(rng, k));
    auto rho = single_generator("g", a);
    auto mu = random_structure(rng, a);
    w.add(std::abs(omega(t1, t2, t3, rho, mu) + omega(t2, t3, t3, rho, mu) - omega(t1, t3, t3, rho, mu)));
  }
  return finish("omega(t1, t3)", 1e-10, w);
}

// circle-geometry

SuiteCheck zeta_det_gold(Rng& rng, const SuiteSettings&) {
  Worst w;
  for (int i = 0; i < 20; ++i) {
    double th = uniform(rng, 0.02, 0.98), sn = std::sin(kPi * th);
    w.add(std::abs(zeta_det_circle(th) - 4.0 * sn * sn));
  }
  return finish("4 sin^2(pi theta)", 1e-6, w);
}

SuiteCheck relative_torsion_unitary(Rng& rng, const SuiteSettings&) {
  Worst w;
  for (int i = 0; i < 20; ++i) w.add(std::abs(relative_torsion_circle_unitary(uniform(rng, 0.02, 0.98))));
  return finish("zero", 1e-6, w);
}

SuiteCheck euler_unitary_character(Rng& rng, const SuiteSettings& s) {
  Worst w;
  Index k = std::min<Index>(s.max_dim, 3);
  for (int i = 0; i < s.instances; ++i) {
    Mat a = well_conditioned_matrix(rng, dim_in(rng, k), 0.4, 2.5);
    Operator oa = Operator::scalar(a), ob = Operator::scalar(a * std::polar(1.0, uniform(rng, 0.0, 2.0 * kPi)));
    double va = euler_invariant_circle({oa, canonical_structure(oa)}, canonical_structure(oa)).value;
    double vb = euler_invariant_circle({ob, canonical_structure(ob)}, canonical_structure(ob)).value;
    w.add(std::abs(va - vb));
  }
  return finish("value for the untwisted holonomy", 1e-8, w);
}

SuiteCheck euler_product_formula(Rng& rng, const SuiteSettings& s) {
  Worst w;
  Index k = std::min<Index>(s.max_dim, 3);
  for (int i = 0; i < s.instances; ++i)
    w.add(euler_invariant_product(Operator::scalar(well_conditioned_matrix(rng, dim_in(rng, k), 0.4, 2.5)),
                                  uniform_int(rng, -4, 4))
              .residual);
  w.add(euler_invariant_product(scalar_op(std::polar(1.0, uniform(rng, 0.0, 2.0 * kPi))), 2).pipeline);
  return finish("-chi(N)/2 log det (A*A)^(1/2)", 1e-4, w);
}

SuiteCheck free_term_grid_independence(Rng& rng, const SuiteSettings& s) {
  Worst w;
  Index k = std::min<Index>(s.max_dim, 2);
  for (int i = 0; i < s.instances; ++i) {
    MorseDatum m = random_circle(rng, uniform_int(rng, 1, 2));
    auto rho = single_generator("g", random_holonomy(rng, dim_in(rng, k)));
    double lo = uniform(rng, 5.0, 10.0), hi = uniform(rng, 150.0, 300.0);
    auto a = check_scaling_coefficients(m, rho, log_grid(40, 5.0, 300.0));
    auto b = check_scaling_coefficients(m, rho, log_grid(25, lo, hi));
    w.add(std::abs(a.fit.free_term - b.fit.free_term));
  }
  return finish("free term on a second t-grid", 1e-6, w);
}

SuiteCheck witten_count_constant(Rng& rng, const SuiteSettings& s) {
  std::size_t grid = s.profile == Profile::Smoke ? 256 : s.profile == Profile::Desk ? 512 : 1024;
  WittenSplitReport r = witten_split({20.0, 40.0, 60.0, 80.0}, grid, {0.0, uniform(rng, 0.05, 0.95)});
  Worst w;
  for (auto c : r.small_counts) w.add(std::abs(static_cast<double>(c) - static_cast<double>(r.expected_small)));
  return finish("twists x number of minima", 0.0, w, r.counts_match && r.resolved && r.slope > 0.0,
                "slope " + std::to_string(r.slope));
}

// asymptotics

SuiteCheck ft_linearity(Rng& rng, const SuiteSettings& s) {
  Worst w;
  ExpansionBasis basis{{1.0, 0.0}, {1.0, 0.0}, {-1.0}};
  auto t = log_grid(40, 5.0, 500.0);
  for (int i = 0; i < s.instances; ++i) {
    std::vector<double> g1, g2, g12;
    double c1[5], c2[5];
    for (int j = 0; j < 5; ++j) {
      c1[j] = uniform(rng, -3.0, 3.0);
      c2[j] = uniform(rng, -3.0, 3.0);
    }
    for (double x : t) {
      auto f = [x](const double* c) { return c[0] * x + c[1] * x * std::log(x) + c[2] + c[3] * std::log(x) + c[4] / x; };
      g1.push_back(f(c1));
      g2.push_back(f(c2));
      g12.push_back(f(c1) + f(c2));
    }
    double a = fit_expansion(t, g1, basis).free_term, b = fit_expansion(t, g2, basis).free_term;
    w.add(std::abs(fit_expansion(t, g12, basis).free_term - a - b) / std::max(1.0, std::abs(a + b)));
  }
  return finish("FT(G1) + FT(G2)", 1e-9, w);
}

template <class F>
SuiteCheck over_scaling_models(Rng& rng, const SuiteSettings& s, const std::string& oracle, double tol, F&& f) {
  Worst w;
  Index k = std::min<Index>(s.max_dim, 2);
  int n = std::max(2, s.instances / 3);
  for (int i = 0; i < n; ++i) {
    MorseDatum m = random_circle(rng, uniform_int(rng, 1, 2));
    auto rho = single_generator("g", random_holonomy(rng, dim_in(rng, k)));
    f(w, check_scaling_coefficients(m, rho, log_grid(40, 5.0, 300.0)));
  }
  return finish(oracle, tol, w);
}

SuiteCheck scaling_two_routes(Rng& rng, const SuiteSettings& s) {
  return over_scaling_models(rng, s, "alternating log vol of S(t)^-1", 1e-9,
                             [](Worst& w, const ScalingCheck& c) { w.add(c.max_route_gap); });
}

SuiteCheck affine_log_fit(Rng& rng, const SuiteSettings& s) {
  return over_scaling_models(rng, s, "exact fit on {t, log t, 1}", 1e-8,
                             [](Worst& w, const ScalingCheck& c) { w.add(c.fit.residual); });
}

SuiteCheck scaling_coefficients(Rng& rng, const SuiteSettings& s) {
  return over_scaling_models(rng, s, "critical values and indices", 1e-6, [](Worst& w, const ScalingCheck& c) {
    w.add(c.linear_residual);
    w.add(c.log_residual);
  });
}

// cli

SuiteCheck report_byte_stability(Rng& rng, const SuiteSettings& s) {
  Worst w;
  int n = std::max(2, s.instances / 3);
  for (int i = 0; i < n; ++i) {
    HilbertComplex c = random_complex(rng, random_dims(rng, 3, std::min<Index>(s.max_dim, 4)));
    io::Json j = io::parse_text(io::write_complex(c).dump());
    w.add(cmd_torsion(j).dump() == cmd_torsion(j).dump() ? 0.0 : 1.0);
    CircleOptions o;
    o.theta = uniform(rng, 0.05, 0.95);
    w.add(cmd_circle(o).dump(true) == cmd_circle(o).dump(true) ? 0.0 : 1.0);
    // Round trip through the file format.
    HilbertComplex back = io::read_complex(j);
    w.add(std::abs(log_torsion(back) - log_torsion(c)));
  }
  return finish("identical bytes on repeated runs", 1e-12, w);
}

SuiteCheck exit_code_contract(Rng&, const SuiteSettings&) {
  Worst w;
  auto expect = [&](Status got, Status want) { w.add(got == want ? 0.0 : 1.0); };
  try {
    io::parse_text("{\"modules\": [1, 1,]}");
    w.add(1.0);
  } catch (const std::exception& e) {
    expect(status_for(e), Status::InputError);
  }
  try {
    cmd_torsion(io::parse_text(R"({"modules": [1, 2], "differentials": [{"algebra": "scalar", "matrix": [[1]]}]})"));
    w.add(1.0);
  } catch (const std::exception& e) {
    expect(status_for(e), Status::InputError);
  }
  expect(status_for(DivergentDeterminant("x")), Status::Divergent);
  io::Json flat = io::write_operator(
      Operator::sample(1, 1, 1024, [](double x) { return Mat::Constant(1, 1, std::exp(-1.0 / (x * x))); }));
  expect(cmd_fkdet(flat).status(), Status::Divergent);
  CircleOptions o;
  o.theta = 0.25;
  expect(cmd_circle(o).status(), Status::Ok);
  RunReport failing;
  failing.check("always_fails", 1.0, 0.0, "none");
  expect(failing.status(), Status::CheckFailed);
  return finish("0 pass, 1 check failure, 2 input error, 3 divergence", 0.0, w);
}

}  // namespace

const std::vector<SuiteEntry>& suite_entries() {
  static const std::vector<SuiteEntry> entries = {
      {"trace-algebra", "trace_commutativity", trace_commutativity},
      {"trace-algebra", "trace_norm_submultiplicative", trace_norm_submultiplicative},
      {"trace-algebra", "density_monotone_bounded", density_monotone},
      {"trace-algebra", "fk_multiplicative", fk_multiplicative},
      {"trace-algebra", "heat_trace_decay", heat_trace_decay},
      {"trace-algebra", "spectral_shift_properties", spectral_shift_properties},
      {"trace-algebra", "alpha_determinant_class", alpha_determinant_class},
      {"trace-algebra", "flat_symbol_density", flat_symbol_density},
      {"hilbert-complex", "d_squared_enforced", d_squared_enforced},
      {"hilbert-complex", "laplacian_density_split", laplacian_density_split},
      {"hilbert-complex", "duality", duality},
      {"hilbert-complex", "suspension_sign", suspension_sign},
      {"hilbert-complex", "torsion_two_formulas", torsion_two_formulas},
      {"hilbert-complex", "acyclic_dense_oracle", acyclic_dense_oracle},
      {"mapping-cone", "cone_volume", cone_volume},
      {"mapping-cone", "cone_laplacian_block", cone_laplacian_block},
      {"mapping-cone", "cone_acyclic_for_iso", cone_acyclic_for_iso},
      {"mapping-cone", "cone_duality", cone_duality},
      {"mapping-cone", "cmm_additivity", cmm_additivity},
      {"mapping-cone", "cmm_derivative", cmm_derivative},
      {"mapping-cone", "composition", composition},
      {"mapping-cone", "milnor", milnor},
      {"morse-combinatorial", "built_complex_d_squared", built_complex_d_squared},
      {"morse-combinatorial", "rescaling_invariance", rescaling_invariance},
      {"morse-combinatorial", "dual_representation_symmetry", dual_representation_symmetry},
      {"morse-combinatorial", "hermitian_anomaly", hermitian_anomaly},
      {"morse-combinatorial", "subdivision_anomaly", subdivision_anomaly},
      {"morse-combinatorial", "omega_cocycle", omega_cocycle},
      {"circle-geometry", "zeta_det_gold", zeta_det_gold},
      {"circle-geometry", "relative_torsion_unitary", relative_torsion_unitary},
      {"circle-geometry", "euler_unitary_character", euler_unitary_character},
      {"circle-geometry", "euler_product_formula", euler_product_formula},
      {"circle-geometry", "free_term_grid_independence", free_term_grid_independence},
      {"circle-geometry", "witten_count_constant", witten_count_constant},
      {"asymptotics", "ft_linearity", ft_linearity},
      {"asymptotics", "scaling_two_routes", scaling_two_routes},
      {"asymptotics", "affine_log_fit", affine_log_fit},
      {"asymptotics", "scaling_coefficients", scaling_coefficients},
      {"cli", "report_byte_stability", report_byte_stability},
      {"cli", "exit_code_contract", exit_code_contract},
  };
  return entries;
}

unsigned suite_threads() {
  if (const char* env = std::getenv("TORSIONLAB_THREADS")) {
    char* end = nullptr;
    long n = std::strtol(env, &end, 10);
    if (end != env && n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SuiteCheck> run_suite(std::uint64_t seed, Profile profile, unsigned threads) {
  const auto& entries = suite_entries();
  SuiteSettings settings = settings_for(profile);
  std::vector<SuiteCheck> out(entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(i)};
      Rng rng(seq);
      SuiteCheck c;
      try {
        c = entries[i].run(rng, settings);
      } catch (const std::exception& e) {
        c.pass = false;
        c.residual = std::numeric_limits<double>::quiet_NaN();
        c.detail = std::string("raised: ") + e.what();
      }
      c.module = entries[i].module;
      c.name = entries[i].name;
      out[i] = std::move(c);
    }
  };
  unsigned n = std::min<unsigned>(threads ? threads : suite_threads(), static_cast<unsigned>(entries.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace tl
