#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <numbers>

#include "test_util.hpp"
#include "torsionlab/circle.hpp"
#include "torsionlab/errors.hpp"

using namespace tl;

namespace {

constexpr double kPi = std::numbers::pi;

Operator scalar_op(cplx a) { return Operator::scalar(Mat::Constant(1, 1, a)); }

/// 2 + e^{2πit}; log det_FK = log 2.
Operator circle_holonomy() {
  return Operator::trig_poly(1, 1, {{0, Mat::Constant(1, 1, 2.0)}, {1, Mat::Constant(1, 1, 1.0)}});
}

/// 1 on [0.2, 0.35], 0 outside [0.1, 0.45].
double bump_near_min(double t) {
  double u = t - std::floor(t);
  return smoothstep((u - 0.1) / 0.1) * smoothstep((0.45 - u) / 0.1);
}

}  // namespace

TEST_CASE("Hurwitz zeta against independent special functions") {
  for (double s : {2.0, 3.5, 0.5, -0.5, -1.5, 1.1})
    CHECK(hurwitz_zeta(s, 1.0) == doctest::Approx(boost::math::zeta(s)).epsilon(1e-10));
  for (double a : {0.1, 0.37, 1.0, 2.5})
    CHECK(hurwitz_zeta(2.0, a) == doctest::Approx(boost::math::trigamma(a)).epsilon(1e-12));
  for (double a : {0.05, 0.4, 0.93}) {
    CHECK(hurwitz_zeta(0.0, a) == doctest::Approx(0.5 - a).epsilon(1e-12));
    CHECK(hurwitz_zeta(-1.0, a) == doctest::Approx(-(a * a - a + 1.0 / 6.0) / 2.0).epsilon(1e-12));
    double h = 1e-4;
    double deriv = (8.0 * (hurwitz_zeta(h, a) - hurwitz_zeta(-h, a)) - (hurwitz_zeta(2 * h, a) - hurwitz_zeta(-2 * h, a))) /
                   (12.0 * h);
    CHECK(deriv == doctest::Approx(boost::math::lgamma(a) - 0.5 * std::log(2.0 * kPi)).epsilon(1e-8));
  }
  CHECK_THROWS_AS(hurwitz_zeta(1.0, 0.5), Error);
  CHECK_THROWS_AS(hurwitz_zeta(2.0, 0.0), Error);
}

TEST_CASE("zeta-regularized determinant on the circle") {
  CHECK(zeta_det_circle(0.5) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(zeta_det_circle(1.0 / 3.0) == doctest::Approx(3.0).epsilon(1e-9));
  for (int i = 0; i < 20; ++i) {
    double th = 0.02 + 0.96 * i / 19.0;
    double gold = 4.0 * std::sin(kPi * th) * std::sin(kPi * th);
    CHECK(std::abs(zeta_det_circle(th) - gold) < 1e-6);
    CHECK(zeta_det_circle(th) == doctest::Approx(zeta_det_circle(1.0 - th)).epsilon(1e-12));
    CHECK(zeta_det_circle(th + 3.0) == doctest::Approx(zeta_det_circle(th)).epsilon(1e-12));
  }
  CHECK(circle_zeta(0.0, 0.3) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(zeta_det_circle(0.0), Error);
  CHECK_THROWS_AS(zeta_det_circle(2.0), Error);
}

TEST_CASE("relative torsion vanishes for unitary holonomy") {
  for (double th : {1.0 / 3.0, 0.1, 0.5, 0.77})
    CHECK(std::abs(relative_torsion_circle_unitary(th)) < 1e-6);
  // Both sides equal ½ log 3 at θ = ⅓.
  CHECK(0.5 * std::log(zeta_det_circle(1.0 / 3.0)) == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-9));
  CHECK_THROWS_AS(relative_torsion_circle_unitary(1.0), Error);
}

TEST_CASE("Witten-deformed spectrum") {
  SUBCASE("undeformed Fourier spectrum") {
    WittenSpectrum s = witten_spectrum_circle(0.0, 256);
    REQUIRE(s.eigenvalues.size() == 256);
    std::vector<double> oracle = {0.0};
    for (int k = 1; k <= 4; ++k) oracle.insert(oracle.end(), 2, 4.0 * kPi * kPi * k * k);
    for (std::size_t i = 0; i < oracle.size(); ++i)
      CHECK(s.eigenvalues[i] == doctest::Approx(oracle[i]).scale(1.0).epsilon(1e-9));
    CHECK(s.small_count == 1);
    WittenSpectrum tw = witten_spectrum_circle(0.0, 256, {0.25});
    CHECK(tw.eigenvalues[0] == doctest::Approx(std::pow(2.0 * kPi * 0.25, 2)).epsilon(1e-9));
  }
  SUBCASE("split at t = 40") {
    WittenSpectrum s = witten_spectrum_circle(40.0, 1024);
    CHECK(s.eigenvalues.size() == 1024);
    CHECK(s.small_count == 1);
    CHECK(std::abs(s.eigenvalues[0]) < 1e-8);
    CHECK(s.resolved);
    // Harmonic approximation at the minimum: next level ≈ 2t|h″| = 4π²t.
    CHECK(s.first_large == doctest::Approx(4.0 * kPi * kPi * 40.0).epsilon(0.1));
  }
  SUBCASE("split over t in [20, 80] with two twists") {
    WittenSplitReport r = witten_split({20.0, 50.0, 80.0}, 512, {0.0, 0.3});
    CHECK(r.expected_small == 2);
    CHECK(r.counts_match);
    CHECK(r.resolved);
    CHECK(r.slope > 0.0);
    CHECK(r.pass);
  }
  SUBCASE("coarse grid is reported as unresolved") {
    WittenSpectrum s = witten_spectrum_circle(4000.0, 256);
    CHECK_FALSE(s.resolved);
  }
  CHECK_THROWS_AS(witten_spectrum_circle(-1.0), Error);
  CHECK_THROWS_AS(witten_spectrum_circle(1.0, 100), Error);
}

TEST_CASE("Euler invariant of the circle") {
  SUBCASE("unitary holonomy, parallel structure") {
    Operator a = scalar_op(std::polar(1.0, 0.9));
    CircleBundleSpec spec{a, identity_structure(a)};
    auto r = euler_invariant_circle(spec, spec.mu);
    CHECK(std::abs(r.value) < 1e-14);
  }
  SUBCASE("A = 2 with the canonical structure") {
    Operator a = scalar_op(2.0);
    CircleBundleSpec spec{a, canonical_structure(a)};
    auto r = euler_invariant_circle(spec, spec.mu);
    CHECK(r.value == doctest::Approx(-0.5 * std::log(2.0)).epsilon(1e-10));
    CHECK(r.v_term == 0.0);
    CHECK(r.euler_term == 0.0);
    CHECK(r.value == doctest::Approx(r.closed_form).epsilon(1e-10));
  }
  SUBCASE("independent of the admissible structure") {
    Operator a = Operator::scalar(Mat{{cplx(1.5), cplx(0.4, 0.2)}, {cplx(-0.3), cplx(0.8, 0.6)}});
    HermitianStructure base = canonical_structure(a);
    Rng rng(9);
    std::vector<Operator> samples;
    for (int i = 0; i < 3; ++i) {
      Mat g = tltest::random_well_conditioned(rng, 2);
      samples.push_back(Operator::scalar(g.adjoint() * g));
    }
    HermitianStructure mu = sampled_structure(a, {0.1, 0.4, 0.7}, samples);
    CircleBundleSpec spec{a, mu};
    auto r1 = euler_invariant_circle(spec, base);
    auto r2 = euler_invariant_circle(spec, canonical_structure(a, 0.25, 0.75, 0.1));
    auto r3 = euler_invariant_circle(spec, conformal_structure(base, [](double t) { return 0.8 * bump_near_min(t); }));
    CHECK(std::abs(r3.v_term - r1.v_term) > 0.1);
    CHECK(std::abs(r1.value - r2.value) < 1e-8);
    CHECK(std::abs(r1.value - r3.value) < 1e-8);
    CHECK(r1.value == doctest::Approx(r1.closed_form).epsilon(1e-9));
  }
  SUBCASE("unchanged by a unitary character") {
    Operator a = scalar_op(cplx(0.6, 1.1));
    Operator b = scalar_op(cplx(0.6, 1.1) * std::polar(1.0, 2.2));
    auto ra = euler_invariant_circle({a, canonical_structure(a)}, canonical_structure(a));
    auto rb = euler_invariant_circle({b, canonical_structure(b)}, canonical_structure(b));
    CHECK(ra.value == doctest::Approx(rb.value).epsilon(1e-12));
  }
  SUBCASE("circle-fibered holonomy") {
    CircleBundleSpec spec{circle_holonomy(), canonical_structure(circle_holonomy())};
    auto r = euler_invariant_circle(spec, spec.mu);
    CHECK(r.value == doctest::Approx(-0.5 * std::log(2.0)).epsilon(1e-8));
  }
  SUBCASE("non-admissible structure is rejected") {
    Operator a = scalar_op(2.0);
    HermitianStructure bad = conformal_structure(canonical_structure(a), [](double t) { return 0.3 * std::sin(2.0 * kPi * t); });
    CHECK_THROWS_AS(euler_invariant_circle({a, canonical_structure(a)}, bad), Error);
  }
}

TEST_CASE("Euler invariant of N x S1") {
  auto p = euler_invariant_product(scalar_op(2.0), 2);
  CHECK(p.pipeline == doctest::Approx(-std::log(2.0)).epsilon(1e-10));
  CHECK(p.residual < 1e-10);
  for (cplx a : {cplx(0.5), std::polar(1.0, kPi / 4.0), cplx(-3.0, 1.0)})
    for (int chi : {-2, 0, 1, 2}) {
      auto r = euler_invariant_product(scalar_op(a), chi);
      CHECK(r.residual < 1e-10);
      CHECK(r.formula == doctest::Approx(-0.5 * chi * std::log(std::abs(a))).scale(1.0).epsilon(1e-12));
    }
  auto u = euler_invariant_product(scalar_op(std::polar(1.0, kPi / 4.0)), 3);
  CHECK(std::abs(u.pipeline) < 1e-12);
  auto c = euler_invariant_product(circle_holonomy(), 2);
  CHECK(c.residual < 1e-4);
  CHECK(c.pipeline == doctest::Approx(-std::log(2.0)).epsilon(1e-6));
  Rng rng(4);
  auto m = euler_invariant_product(Operator::scalar(tltest::random_well_conditioned(rng, 3)), -4);
  CHECK(m.residual < 1e-10);
}
