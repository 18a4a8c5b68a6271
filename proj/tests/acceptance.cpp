// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "torsionlab/asymptotics.hpp"
#include "torsionlab/circle.hpp"
#include "torsionlab/cone.hpp"
#include "torsionlab/morse.hpp"
#include "torsionlab/random.hpp"
#include "torsionlab/spectral.hpp"

using namespace tl;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
  bool pass = false;
  std::string summary;
};

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

/// Worst residual; NaN sticks so a broken instance cannot hide.
struct Worst {
  double value = 0.0;
  void add(double r) {
    if (std::isnan(r) || r > value) value = std::isnan(value) ? value : r;
  }
  bool below(double tol) const { return value < tol; }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// 200 complexes of length ≤ 5 and dimensions ≤ 6, shared by the complex-level criteria.
const std::vector<HilbertComplex>& corpus() {
  static const std::vector<HilbertComplex> c = [] {
    Rng rng(kSeed);
    std::vector<HilbertComplex> out;
    for (int i = 0; i < 200; ++i) out.push_back(random_complex(rng, random_dims(rng, 5, 6)));
    return out;
  }();
  return c;
}

Mat positive(Rng& rng, Index k, double lo, double hi) {
  Eigen::HouseholderQR<Mat> q(gaussian_matrix(rng, k, k));
  Mat u = q.householderQ();
  RVec l(k);
  for (Index i = 0; i < k; ++i) l(i) = uniform(rng, lo, hi);
  return u * l.cast<cplx>().asDiagonal() * u.adjoint();
}

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

/// Alternating minima and maxima at random positions at least 0.03 apart.
MorseDatum random_circle(Rng& rng, int m) {
  std::vector<double> pos;
  for (;;) {
    pos.clear();
    for (int i = 0; i < 2 * m; ++i) pos.push_back(uniform(rng, 0.0, 1.0));
    std::sort(pos.begin(), pos.end());
    bool ok = pos.back() - pos.front() < 0.97;
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
  return subdivide_circle(m, std::fmod(start + best * uniform(rng, 0.15, 0.35), 1.0), best * uniform(rng, 0.2, 0.4));
}

Operator random_holonomy(Rng& rng) {
  return Operator::scalar(well_conditioned_matrix(rng, uniform_int(rng, 1, 3), 1.3, 2.8));
}

// Criteria

Outcome cone_identity_and_suspension() {
  auto start = std::chrono::steady_clock::now();
  Worst id, susp;
  for (const auto& c : corpus()) {
    id.add(std::abs(log_torsion(mapping_cone(identity_morphism(c)).complex)));
    susp.add(std::abs(log_torsion(suspension(c)) + log_torsion(c)));
  }
  double secs = seconds_since(start);
  return {id.below(1e-9) && susp.below(1e-9) && secs < 30.0,
          fmt("cone(id) %.2e, suspension %.2e (tol 1e-9); %.2f s (limit 30 s)", id.value, susp.value, secs)};
}

Outcome cone_volume_isomorphisms() {
  Rng rng(kSeed + 2);
  Worst w;
  for (const auto& c : corpus()) w.add(check_cone_volume(random_isomorphism(rng, c)).residual);
  return {w.below(1e-8), fmt("200 isomorphisms, max residual %.2e (tol 1e-8)", w.value)};
}

Outcome cmm_additivity_and_derivative() {
  Rng rng(kSeed + 3);
  auto ranks = [&](int len) {
    std::vector<Index> r(static_cast<std::size_t>(len));
    for (auto& x : r) x = uniform_int(rng, 1, 3);
    return r;
  };
  Worst add, der;
  for (int i = 0; i < 100; ++i) {
    HilbertComplex c1 = random_acyclic_complex(rng, ranks(3));
    HilbertComplex c2 = random_acyclic_complex(rng, ranks(2));
    std::vector<Operator> f = random_coupling(rng, c1, c2);
    add.add(check_cmm(c1, c2, f).residual);
    der.add(check_cmm_derivative(c1, c2, f, uniform(rng, 0.2, 1.5)).residual);
  }
  return {add.below(1e-8) && der.below(1e-6),
          fmt("100 coupled complexes, additivity %.2e (tol 1e-8), |d/dt log T| %.2e (tol 1e-6)", add.value, der.value)};
}

Outcome composition_pairs() {
  Rng rng(kSeed + 4);
  Worst w;
  for (int i = 0; i < 100; ++i) {
    const HilbertComplex& c = corpus()[static_cast<std::size_t>(i)];
    ComplexMorphism f1 = random_isomorphism(rng, c);
    ComplexMorphism f2 = random_isomorphism(rng, f1.target);
    w.add(check_composition(f1, f2).residual);
  }
  return {w.below(1e-8), fmt("100 pairs, max residual %.2e (tol 1e-8)", w.value)};
}

/// 0 → A → A ⊕ B → B → 0 with inclusion and projection scaled by ci and cp.
ShortExactSequence scaled_split(Rng& rng, const HilbertComplex& a, const HilbertComplex& b) {
  ShortExactSequence s = split_sequence(a, b);
  double ci = uniform(rng, 0.5, 3.0), cp = uniform(rng, 0.5, 3.0);
  for (auto& i : s.inclusion) i = scale(i, ci);
  for (auto& p : s.projection) p = scale(p, cp);
  return s;
}

Outcome milnor_sequences() {
  Rng rng(kSeed + 5);
  Worst w;
  for (int i = 0; i < 50; ++i) {
    ShortExactSequence s;
    if (i % 2 == 0) {
      s = cone_sequence(random_isomorphism(rng, random_complex(rng, random_dims(rng, 3, 4))));
    } else {
      HilbertComplex a = random_complex(rng, random_dims(rng, 3, 4)), b = random_complex(rng, random_dims(rng, 3, 4));
      int n = std::max(a.top_degree(), b.top_degree());
      s = scaled_split(rng, pad_to(a, n), pad_to(b, n));
    }
    w.add(milnor_check(s, 1e-7).result.residual);
  }
  return {w.below(1e-7), fmt("50 sequences (cone and scaled split), max residual %.2e (tol 1e-7)", w.value)};
}

Outcome duality_corpus() {
  Worst w;
  for (const auto& c : corpus()) w.add(std::abs(log_torsion(dual(c)) - log_torsion(c)));
  return {w.below(1e-8), fmt("200 complexes, max |log T(dual) - log T| %.2e (tol 1e-8)", w.value)};
}

Outcome circle_gold_values() {
  auto start = std::chrono::steady_clock::now();
  Worst det, rel;
  for (int i = 0; i < 20; ++i) {
    double th = (i + 0.5) / 20.0, s = std::sin(kPi * th);
    det.add(std::abs(zeta_det_circle(th) - 4.0 * s * s));
    rel.add(std::abs(relative_torsion_circle_unitary(th)));
  }
  double secs = seconds_since(start);
  return {det.below(1e-6) && rel.below(1e-6) && secs < 10.0,
          fmt("20 theta: det %.2e, relative torsion %.2e (tol 1e-6); %.2f s (limit 10 s)", det.value, rel.value, secs)};
}

Outcome determinant_class_examples() {
  Operator alpha = Operator::trig_poly(1, 1, {{0, Mat::Constant(1, 1, -1.0)}, {1, Mat::Constant(1, 1, 1.0)}});
  FkResult a = fk_log_det_report(alpha);
  Operator flat =
      Operator::sample(1, 1, 16384, [](double x) { return Mat::Constant(1, 1, std::exp(-1.0 / (x * x))); });
  DetClassVerdict v = determinant_class_check(flat);
  std::vector<double> grid;
  for (int i = 0; i <= 60; ++i) grid.push_back(std::exp(std::log(1e-6) + (-1.0 - std::log(1e-6)) * i / 60.0));
  SpectralDensity d = spectral_density(flat, grid);
  Worst rel;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double exact = 1.0 / std::sqrt(-std::log(grid[i]));
    rel.add(std::abs(d.values[i] - exact) / exact);
  }
  bool certified = a.verdict.state == DetClass::Yes && std::abs(a.log_det) < 1e-4;
  bool refuted = v.state == DetClass::No;
  return {certified && refuted && rel.below(0.02),
          std::string("alpha log det ") + fmt("%.2e (tol 1e-4), ", a.log_det) + det_class_name(a.verdict.state) +
              "; exp(-1/x^2) " + det_class_name(v.state) + fmt(", density rel. error %.4f (tol 0.02)", rel.value)};
}

Outcome product_formula() {
  struct Case {
    Operator a;
    double log_det;  // log det_FK |A|, computed by hand
  };
  std::vector<Case> cases = {
      {Operator::scalar(Mat::Constant(1, 1, 2.0)), std::log(2.0)},
      {Operator::scalar(Mat::Constant(1, 1, 0.5)), -std::log(2.0)},
      {Operator::scalar(Mat::Constant(1, 1, std::polar(1.0, kPi / 4))), 0.0},
      // Mahler measure of 3 + z.
      {Operator::trig_poly(1, 1, {{0, Mat::Constant(1, 1, 3.0)}, {1, Mat::Constant(1, 1, 1.0)}}), std::log(3.0)},
  };
  Worst w;
  for (const auto& c : cases)
    for (int chi : {2, -1, 3}) {
      ProductInvariantResult r = euler_invariant_product(c.a, chi);
      w.add(std::abs(r.pipeline - (-0.5 * chi * c.log_det)));
      w.add(r.residual);
    }
  return {w.below(1e-4), fmt("A in {2, 1/2, e^(i pi/4), 3 + e^(2 pi i t)}, max residual %.2e (tol 1e-4)", w.value)};
}

Outcome anomalies() {
  Rng rng(kSeed + 10);
  Worst herm, sub, cocycle;
  for (int i = 0; i < 50; ++i) {
    MorseDatum m = random_circle(rng, uniform_int(rng, 1, 3));
    Operator a = random_holonomy(rng);
    herm.add(hermitian_anomaly_check(m, single_generator("g", a), random_structure(rng, a), random_structure(rng, a))
                 .residual);
  }
  for (int i = 0; i < 20; ++i) {
    MorseDatum m = random_circle(rng, uniform_int(rng, 1, 2));
    Operator a = random_holonomy(rng);
    auto r = subdivision_check(m, subdivide_widest(rng, m), single_generator("g", a), random_structure(rng, a));
    sub.add(r.cone_vs_omega.residual);
    sub.add(r.torsion_difference.residual);

    MorseDatum t1 = random_circle(rng, 1);
    MorseDatum t2 = subdivide_widest(rng, t1);
    MorseDatum t3 = subdivide_widest(rng, t2);
    auto rho = single_generator("g", a);
    auto mu = random_structure(rng, a);
    cocycle.add(std::abs(omega(t1, t2, t3, rho, mu) + omega(t2, t3, t3, rho, mu) - omega(t1, t3, t3, rho, mu)));
  }
  return {herm.below(1e-8) && sub.below(1e-8) && cocycle.below(1e-10),
          fmt("hermitian %.2e (tol 1e-8), subdivision %.2e (tol 1e-8), cocycle %.2e (tol 1e-10)", herm.value, sub.value,
              cocycle.value)};
}

Outcome scaling_model_coefficients() {
  // One minimum (h = 0) and one maximum (h = 1): log T(C(f(t))) = −t − ½ log(π/t) + const.
  Worst coef, fit;
  for (cplx hol : {cplx(3.0), cplx(0.25), cplx(-2.0, 1.0)}) {
    ScalingCheck s = check_scaling_coefficients(circle_datum(), scalar_representation("g", hol));
    coef.add(std::abs(s.fit.coefficient(1.0) + 1.0));
    coef.add(std::abs(s.fit.log_coefficient(0.0) - 0.5));
    coef.add(s.linear_residual);
    coef.add(s.log_residual);
    fit.add(s.fit.residual);
  }
  return {coef.below(1e-6) && fit.below(1e-8),
          fmt("coefficients %.2e (tol 1e-6), fit residual %.2e (tol 1e-8)", coef.value, fit.value)};
}

Outcome witten_split_circle() {
  auto start = std::chrono::steady_clock::now();
  WittenSplitReport r = witten_split({20.0, 35.0, 50.0, 65.0, 80.0}, 1024, {0.0});
  double secs = seconds_since(start);
  std::string counts;
  for (auto c : r.small_counts) counts += (counts.empty() ? "" : ",") + std::to_string(c);
  return {r.counts_match && r.resolved && r.slope > 0.0 && secs < 60.0,
          "small counts [" + counts + "] expected " + std::to_string(r.expected_small) +
              fmt(", slope %.3f (> 0); %.2f s (limit 60 s)", r.slope, secs)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"cone of identity and suspension", cone_identity_and_suspension},
      {"cone torsion of isomorphisms", cone_volume_isomorphisms},
      {"coupled complex additivity", cmm_additivity_and_derivative},
      {"composition additivity", composition_pairs},
      {"short exact sequences", milnor_sequences},
      {"duality", duality_corpus},
      {"circle determinant gold values", circle_gold_values},
      {"determinant class examples", determinant_class_examples},
      {"product Euler invariant", product_formula},
      {"metric and subdivision anomalies", anomalies},
      {"scaling coefficients", scaling_model_coefficients},
      {"Witten split", witten_split_circle},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.summary.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
