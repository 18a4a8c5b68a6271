#include <doctest.h>

#include <cmath>
#include <numbers>

#include "test_util.hpp"
#include "torsionlab/errors.hpp"
#include "torsionlab/morse.hpp"
#include "torsionlab/random.hpp"

using namespace tl;

namespace {

constexpr double kPi = std::numbers::pi;

Operator scalar_op(cplx a) { return Operator::scalar(Mat::Constant(1, 1, a)); }

/// 3 + e^{2πit}; 1 − A has no zero on the circle.
Operator circle_holonomy() {
  return Operator::trig_poly(1, 1, {{0, Mat::Constant(1, 1, 3.0)}, {1, Mat::Constant(1, 1, 1.0)}});
}

double max_diff(const Operator& a, const Operator& b) { return sup_norm(a - b); }

Representation trivial_rep() {
  Representation r;
  r.dim = 1;
  return r;
}

Mat random_positive(Rng& rng, Index k) {
  Mat g = tltest::random_well_conditioned(rng, k, 0.6, 1.6);
  return g.adjoint() * g;
}

HermitianStructure random_structure(Rng& rng, const Operator& holonomy) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> t;
  double x = 0.05 * u(rng);
  for (int i = 0; i < 4; ++i) {
    t.push_back(x);
    x += 0.1 + 0.12 * u(rng);
  }
  std::vector<Operator> mu;
  for (std::size_t i = 0; i < t.size(); ++i) mu.push_back(Operator::scalar(random_positive(rng, holonomy.rows())));
  return sampled_structure(holonomy, t, mu);
}

/// Simpson rule over [0, 1].
template <class F>
double integrate01(F&& f, int n = 4000) {
  double h = 1.0 / n, s = f(0.0) + f(1.0);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("words parse, print and invert") {
  CHECK(parse_word("").empty());
  CHECK(parse_word("e").empty());
  CHECK(parse_word("g^0").empty());
  CHECK(parse_word("g") == Word{{"g", 1}});
  CHECK(parse_word("g^-2 h") == Word{{"g", -2}, {"h", 1}});
  CHECK(parse_word("g g^-1").empty());
  CHECK(parse_word("g*g") == Word{{"g", 2}});
  CHECK(format_word(parse_word("g^-2 h")) == "g^-2 h");
  CHECK(format_word({}) == "e");
  CHECK(inverse_word(parse_word("g^2 h^-1")) == Word{{"h", 1}, {"g", -2}});
  CHECK_THROWS_AS(parse_word("g^x"), Error);
  CHECK_THROWS_AS(parse_word("3g"), Error);
}

TEST_CASE("Morse data are validated") {
  MorseDatum m = circle_datum();
  CHECK_NOTHROW(validate(m));
  CHECK(m.count(0) == 1);
  CHECK(m.count(1) == 1);
  MorseDatum dup = m;
  dup.points[1].id = dup.points[0].id;
  CHECK_THROWS_AS(validate(dup), Error);
  MorseDatum jump = sphere_datum(2);
  jump.incidences.push_back({"south", "north", {}, 1});
  CHECK_THROWS_AS(validate(jump), Error);
  CHECK_THROWS_AS(circle_triangulation({{0.1, 0}, {0.3, 0}, {0.5, 1}, {0.7, 1}}), Error);
  CHECK_THROWS_AS(sphere_datum(1), Error);
  CHECK_THROWS_AS(subdivide_circle(m, 0.74, 0.02), Error);
}

TEST_CASE("circle complex with holonomy 1 + alpha has differential -M_alpha") {
  Operator hol = tltest::alpha_symbol() + Operator::identity(Algebra::CircleFibered, 1);
  HilbertComplex c = build_complex(circle_datum(), single_generator("g", hol));
  REQUIRE(c.algebra() == Algebra::CircleFibered);
  REQUIRE(c.dims() == std::vector<Index>{1, 1});
  CHECK(max_diff(c.d(0), -tltest::alpha_symbol()) < 1e-14);
  auto t = torsion(c);
  CHECK(t.log_torsion == doctest::Approx(0.0).epsilon(1e-8).scale(1.0));
}

TEST_CASE("circle complex with scalar holonomy has torsion log|a - 1|") {
  for (cplx a : {cplx(2.0), cplx(-3.0), cplx(0.5, 0.7), std::polar(1.0, 2.0), cplx(1.0 + 1e-3)}) {
    HilbertComplex c = build_complex(circle_datum(), scalar_representation("g", a));
    Mat d = c.d(0).matrix();
    double oracle = 0.5 * std::log(std::abs((d.adjoint() * d).determinant()));
    CHECK(log_torsion(c) == doctest::Approx(std::log(std::abs(a - 1.0))).epsilon(1e-12));
    CHECK(log_torsion(c) == doctest::Approx(oracle).epsilon(1e-12));
  }
  // Trivial holonomy: δ = 0, not acyclic, torsion 0.
  HilbertComplex triv = build_complex(circle_datum(), scalar_representation("g", 1.0));
  CHECK(sup_norm(triv.d(0)) == 0.0);
  CHECK_FALSE(is_acyclic(triv));
}

TEST_CASE("multi-point circle triangulations give the same torsion for unitary holonomy") {
  auto rho = scalar_representation("g", std::polar(1.0, 2.3));
  double base = log_torsion(build_complex(circle_datum(), rho));
  MorseDatum m = circle_triangulation({{0.05, 1}, {0.2, 0}, {0.45, 1}, {0.6, 0}, {0.8, 1}, {0.9, 0}});
  HilbertComplex c = build_complex(m, rho);
  CHECK(c.d_squared_defect() == 0.0);
  CHECK(log_torsion(c) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("product datum builds the tensor product complex") {
  SUBCASE("sphere times circle") {
    MorseDatum s = sphere_datum(2), c = circle_datum();
    Operator a = Operator::scalar(Mat{{cplx(2.0), cplx(1.0)}, {cplx(0.0), cplx(-1.0)}});
    auto rho_c = single_generator("g", a);
    HilbertComplex expected = tensor_product(build_complex(s, trivial_rep()), build_complex(c, rho_c));
    HilbertComplex got = build_complex(product_datum(s, c), product_representation(trivial_rep(), rho_c));
    REQUIRE(got.dims() == expected.dims());
    for (int q = 0; q < got.top_degree(); ++q) CHECK(max_diff(got.d(q), expected.d(q)) < 1e-14);
    CHECK(log_torsion(got) == doctest::Approx(2.0 * log_torsion(build_complex(c, rho_c))).epsilon(1e-12));
  }
  SUBCASE("torus") {
    MorseDatum c1 = circle_datum(0.25, 0.75, "g"), c2 = circle_datum(0.3, 0.8, "h");
    auto r1 = scalar_representation("g", 3.0);
    auto r2 = single_generator("h", circle_holonomy());
    HilbertComplex expected = tensor_product(build_complex(c1, r1), build_complex(c2, r2));
    HilbertComplex got = build_complex(product_datum(c1, c2), product_representation(r1, r2));
    REQUIRE(got.dims() == expected.dims());
    for (int q = 0; q < got.top_degree(); ++q) CHECK(max_diff(got.d(q), expected.d(q)) < 1e-12);
    // χ(circle) = 0 kills both terms of the product formula.
    CHECK(log_torsion(got) == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
  }
  CHECK_THROWS_AS(product_representation(scalar_representation("g", 2.0), scalar_representation("g", 3.0)), Error);
}

TEST_CASE("dual triangulation") {
  MorseDatum m = circle_datum();
  MorseDatum d = dual_triangulation(m);
  CHECK(d.points[m.find("min")].index == 1);
  CHECK(d.points[m.find("max")].index == 0);
  MorseDatum dd = dual_triangulation(d);
  for (std::size_t i = 0; i < m.points.size(); ++i) {
    CHECK(dd.points[i].index == m.points[i].index);
    CHECK(dd.points[i].value == doctest::Approx(m.points[i].value));
  }
  for (std::size_t i = 0; i < m.incidences.size(); ++i) {
    CHECK(dd.incidences[i].from == m.incidences[i].from);
    CHECK(dd.incidences[i].word == m.incidences[i].word);
  }

  Rng rng(11);
  MorseDatum big = circle_triangulation({{0.1, 0}, {0.3, 1}, {0.5, 0}, {0.9, 1}});
  for (int trial = 0; trial < 10; ++trial) {
    Operator a = Operator::scalar(tltest::random_well_conditioned(rng, 2, 1.3, 3.0));
    auto rho = single_generator("g", a);
    std::vector<Operator> w, w_dual;
    for (std::size_t i = 0; i < big.points.size(); ++i) {
      Mat p = random_positive(rng, 2);
      w.push_back(Operator::scalar(p));
      w_dual.push_back(Operator::scalar(p.inverse()));
    }
    HilbertComplex c = build_complex(big, rho, w);
    HilbertComplex cd = build_complex(dual_triangulation(big), rho.dual(), w_dual);
    HilbertComplex expected = dual(c);
    REQUIRE(cd.dims() == expected.dims());
    CHECK(max_diff(cd.d(0), expected.d(0)) < 1e-10);
    CHECK(log_torsion(cd) == doctest::Approx(log_torsion(c)).epsilon(1e-8));
  }
  // Circle-fibered holonomy.
  auto rho = single_generator("g", circle_holonomy());
  HilbertComplex c = build_complex(m, rho);
  HilbertComplex cd = build_complex(d, rho.dual());
  CHECK(max_diff(cd.d(0), dual(c).d(0)) < 1e-10);
  CHECK(log_torsion(cd) == doctest::Approx(log_torsion(c)).scale(1.0).epsilon(1e-8));
}

TEST_CASE("Hermitian structures") {
  SUBCASE("identity structure is equivariant for unitary holonomy only") {
    CHECK(identity_structure(scalar_op(std::polar(1.0, 0.3))).equivariance_defect() < 1e-14);
    CHECK(identity_structure(scalar_op(2.0)).equivariance_defect() > 0.1);
  }
  SUBCASE("canonical structure") {
    std::vector<Operator> hols = {scalar_op(2.0), scalar_op(cplx(0.3, -0.4)),
                                  Operator::scalar(Mat{{cplx(2.0), cplx(1.0)}, {cplx(0.0), cplx(0.5, 1.0)}}),
                                  circle_holonomy()};
    for (const auto& a : hols) {
      auto mu = canonical_structure(a);
      CHECK(mu.equivariance_defect() < 1e-10);
      double fk_a = a.is_scalar() ? std::log(std::abs(a.matrix().determinant())) : fk_log_det(a);
      // log det agrees with the matrices and ∫θ = fk(A).
      for (double u : {0.05, 0.15, 0.5, 0.83, 0.97}) {
        double direct = mu.base(u).is_scalar() ? std::log(std::abs(mu.base(u).matrix().determinant()))
                                               : fk_log_det(mu.base(u));
        CHECK(mu.log_det_at(u) == doctest::Approx(direct).epsilon(1e-9).scale(1.0));
      }
      CHECK(integrate01([&](double s) { return theta_form(mu, s); }) ==
            doctest::Approx(fk_a).epsilon(1e-8).scale(1.0));
      // Constant on the middle arc.
      CHECK(std::abs(theta_form(mu, 0.25)) < 1e-12);
      CHECK(std::abs(theta_form(mu, 0.75)) < 1e-12);
    }
  }
  SUBCASE("sampled structure wraps through the holonomy") {
    Rng rng(3);
    Operator a = Operator::scalar(tltest::random_well_conditioned(rng, 2));
    auto mu = random_structure(rng, a);
    CHECK(mu.equivariance_defect() < 1e-12);
    Mat bad = Mat::Identity(2, 2);
    bad(1, 1) = -1.0;
    CHECK_THROWS_AS(sampled_structure(a, {0.5}, {Operator::scalar(bad)}), Error);
    CHECK_THROWS_AS(sampled_structure(a, {0.5, 0.2}, {Operator::scalar(bad), Operator::scalar(bad)}), Error);
  }
}

TEST_CASE("V function identities") {
  Rng rng(5);
  Operator a = Operator::scalar(tltest::random_well_conditioned(rng, 2));
  auto m1 = random_structure(rng, a), m2 = random_structure(rng, a), m3 = random_structure(rng, a);
  for (double s : {0.01, 0.3, 0.77, 1.4, -0.6}) {
    CHECK(V_function(m1, m1, s) == 0.0);
    CHECK(V_function(m1, m2, s) == doctest::Approx(-V_function(m2, m1, s)).epsilon(1e-14));
    CHECK(V_function(m1, m3, s) ==
          doctest::Approx(V_function(m1, m2, s) + V_function(m2, m3, s)).epsilon(1e-12).scale(1.0));
    Mat direct = m1.at(s).matrix().inverse() * m2.at(s).matrix();
    CHECK(V_function(m1, m2, s) == doctest::Approx(0.5 * std::log(std::abs(direct.determinant()))).epsilon(1e-10));
  }
  // θ(μ₁) − θ(μ₂) = dV(μ₁, μ₂) on a smooth pair.
  auto c1 = canonical_structure(a);
  auto c2 = conformal_structure(c1, [](double t) { return 0.4 * std::sin(2.0 * kPi * t); });
  for (double s : {0.1, 0.33, 0.62, 0.9}) {
    double h = 1e-5;
    double dv = (V_function(c1, c2, s + h) - V_function(c1, c2, s - h)) / (2.0 * h);
    CHECK(theta_form(c1, s) - theta_form(c2, s) == doctest::Approx(dv).epsilon(1e-7).scale(1.0));
  }
}

TEST_CASE("Hermitian anomaly on the circle") {
  MorseDatum m = circle_datum();
  auto rho = scalar_representation("g", 3.0);
  auto mu = canonical_structure(rho.generators.at("g"));

  SUBCASE("equal structures") {
    auto r = hermitian_anomaly_check(m, rho, mu, mu);
    CHECK(r.residual == 0.0);
  }
  SUBCASE("constant rescaling cancels") {
    auto scaled = conformal_structure(mu, [](double) { return std::log(7.0); });
    auto r = hermitian_anomaly_check(m, rho, mu, scaled);
    CHECK(std::abs(r.rhs) < 1e-14);
    CHECK(std::abs(r.lhs) < 1e-12);
    CHECK(r.pass);
  }
  SUBCASE("conformal factor at the maximum") {
    for (double s : {0.3, -1.2, 2.0}) {
      // φ(0.25) = 0, φ(0.75) = s.
      auto mu2 = conformal_structure(mu, [s](double t) { return s * std::sin(kPi * (t - 0.25)) * std::sin(kPi * (t - 0.25)); });
      auto r = hermitian_anomaly_check(m, rho, mu, mu2);
      CHECK(r.rhs == doctest::Approx(-s / 2.0).epsilon(1e-14));
      CHECK(r.residual < 1e-8);
    }
  }
  SUBCASE("random pairs") {
    Rng rng(17);
    MorseDatum big = circle_triangulation({{0.1, 0}, {0.3, 1}, {0.45, 0}, {0.8, 1}});
    for (int trial = 0; trial < 50; ++trial) {
      Operator a = Operator::scalar(tltest::random_well_conditioned(rng, 2, 1.2, 2.5));
      auto r2 = single_generator("g", a);
      auto mu1 = random_structure(rng, a), mu2 = random_structure(rng, a);
      auto r = hermitian_anomaly_check(trial % 2 ? big : m, r2, mu1, mu2);
      CHECK(r.residual < 1e-8);
    }
  }
  SUBCASE("circle-fibered holonomy") {
    auto rc = single_generator("g", circle_holonomy());
    auto m1 = canonical_structure(circle_holonomy());
    auto m2 = conformal_structure(m1, [](double t) { return 0.7 * std::cos(2.0 * kPi * t); });
    auto r = hermitian_anomaly_check(m, rc, m1, m2);
    CHECK(r.residual < 1e-8);
  }
  SUBCASE("non-acyclic complex is rejected") {
    auto triv = scalar_representation("g", 1.0);
    auto id = identity_structure(scalar_op(1.0));
    CHECK_THROWS_AS(hermitian_anomaly_check(m, triv, id, id), Error);
  }
}

TEST_CASE("subdivision anomaly") {
  MorseDatum coarse = circle_datum();
  SUBCASE("parallel structure") {
    auto rho = scalar_representation("g", std::polar(1.0, 1.1));
    auto mu = identity_structure(rho.generators.at("g"));
    for (double at : {0.4, 0.9}) {
      MorseDatum fine = subdivide_circle(coarse, at, 0.03);
      auto r = subdivision_check(coarse, fine, rho, mu);
      CHECK(std::abs(r.omega_fine_coarse) < 1e-14);
      CHECK(r.log_t_fine == doctest::Approx(r.log_t_coarse).epsilon(1e-12));
      CHECK(r.cone_vs_omega.pass);
    }
  }
  SUBCASE("non-parallel structure, scalar holonomy") {
    auto rho = scalar_representation("g", 2.0);
    auto mu = conformal_structure(canonical_structure(rho.generators.at("g")),
                                  [](double t) { return 0.3 * std::sin(2.0 * kPi * t) + 0.2 * std::cos(4.0 * kPi * t); });
    for (double at : {0.1, 0.4, 0.6, 0.9}) {
      MorseDatum fine = subdivide_circle(coarse, at, 0.03);
      REQUIRE(fine.points.size() == 4);
      auto r = subdivision_check(coarse, fine, rho, mu);
      CHECK(std::abs(r.omega_fine_coarse) > 1e-3);
      CHECK(r.cone_vs_omega.residual < 1e-8);
      CHECK(r.torsion_difference.residual < 1e-8);
    }
  }
  SUBCASE("matrix and circle-fibered holonomy") {
    Rng rng(23);
    Operator a = Operator::scalar(tltest::random_well_conditioned(rng, 2, 1.3, 2.5));
    auto rho = single_generator("g", a);
    auto mu = random_structure(rng, a);
    auto r = subdivision_check(coarse, subdivide_circle(coarse, 0.5, 0.05), rho, mu);
    CHECK(r.cone_vs_omega.residual < 1e-8);
    CHECK(r.torsion_difference.residual < 1e-8);

    auto rc = single_generator("g", circle_holonomy());
    auto mc = conformal_structure(canonical_structure(circle_holonomy()), [](double t) { return 0.5 * std::sin(2.0 * kPi * t); });
    auto rcirc = subdivision_check(coarse, subdivide_circle(coarse, 0.85, 0.05), rc, mc);
    CHECK(rcirc.cone_vs_omega.residual < 1e-8);
    CHECK(rcirc.torsion_difference.residual < 1e-8);
  }
  SUBCASE("cocycle and independence of the common subdivision") {
    auto rho = scalar_representation("g", cplx(1.5, 0.8));
    auto mu = conformal_structure(canonical_structure(rho.generators.at("g")),
                                  [](double t) { return 0.6 * std::sin(2.0 * kPi * t + 0.3); });
    MorseDatum t1 = coarse;
    MorseDatum t2 = subdivide_circle(t1, 0.4, 0.03);
    MorseDatum t3 = subdivide_circle(t2, 0.9, 0.04);
    MorseDatum t4 = subdivide_circle(t3, 0.6, 0.02);
    double w12 = omega(t1, t2, t3, rho, mu), w23 = omega(t2, t3, t3, rho, mu), w13 = omega(t1, t3, t3, rho, mu);
    CHECK(std::abs(w12 + w23 - w13) < 1e-10);
    CHECK(std::abs(omega(t1, t2, t2, rho, mu) - omega(t1, t2, t4, rho, mu)) < 1e-10);
    CHECK(std::abs(omega(t1, t2, t3, rho, mu) - omega(t1, t2, t4, rho, mu)) < 1e-10);
    CHECK(std::abs(omega(t2, t1, t2, rho, mu) + omega(t1, t2, t2, rho, mu)) < 1e-10);
    // Torsion differences follow ω along the chain.
    double lt1 = log_torsion(build_complex(t1, rho, mu)), lt3 = log_torsion(build_complex(t3, rho, mu));
    CHECK(lt3 - lt1 == doctest::Approx(omega(t3, t1, t3, rho, mu)).epsilon(1e-9));
  }
}
