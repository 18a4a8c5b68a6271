#include <doctest.h>

#include <cmath>
#include <numbers>

#include "test_util.hpp"
#include "torsionlab/asymptotics.hpp"
#include "torsionlab/errors.hpp"

using namespace tl;

namespace {

std::vector<double> sample(const std::vector<double>& t, double (*g)(double)) {
  std::vector<double> out;
  for (double x : t) out.push_back(g(x));
  return out;
}

double synthetic(double t) { return 2.0 * t + 3.0 * std::log(t) + 5.0 + 1.0 / t; }

}  // namespace

TEST_CASE("fit_expansion on synthetic functions") {
  auto t = log_grid(40, 10.0, 1000.0);
  SUBCASE("affine plus log plus 1/t") {
    ExpansionBasis b;
    b.remainder = {-1.0};
    auto fit = fit_expansion(t, sample(t, synthetic), b);
    CHECK(fit.free_term == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(fit.coefficient(1.0) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fit.log_coefficient(0.0) == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(std::abs(fit.log_coefficient(1.0)) < 1e-9);
    CHECK(fit.residual < 1e-9);
    CHECK(fit.evaluate(37.0) == doctest::Approx(synthetic(37.0)).epsilon(1e-10));
  }
  SUBCASE("without the remainder term the free term is biased but close") {
    auto fit = fit_expansion(t, sample(t, synthetic));
    CHECK(std::abs(fit.free_term - 5.0) < 0.5);
    CHECK(std::abs(fit.free_term - 5.0) > 1e-6);
  }
  SUBCASE("constant") {
    auto fit = fit_expansion(t, sample(t, [](double) { return -7.25; }));
    CHECK(fit.free_term == doctest::Approx(-7.25).epsilon(1e-12));
    CHECK(std::abs(fit.coefficient(1.0)) < 1e-10);
    CHECK(std::abs(fit.log_coefficient(1.0)) < 1e-10);
    CHECK(std::abs(fit.log_coefficient(0.0)) < 1e-10);
  }
  SUBCASE("free term is linear") {
    ExpansionBasis b;
    b.exponents = {0.5, 0.0};
    b.log_exponents = {0.5, 0.0};
    b.remainder = {-1.0};
    auto g1 = [](double x) { return 3.0 * std::sqrt(x) - std::log(x) + 2.0 + 0.5 / x; };
    auto g2 = [](double x) { return -std::sqrt(x) * std::log(x) + 4.0 - 1.0 / x; };
    std::vector<double> y1, y2, y12;
    for (double x : t) {
      y1.push_back(g1(x));
      y2.push_back(g2(x));
      y12.push_back(g1(x) + g2(x));
    }
    double f1 = fit_expansion(t, y1, b).free_term, f2 = fit_expansion(t, y2, b).free_term;
    CHECK(fit_expansion(t, y12, b).free_term == doctest::Approx(f1 + f2).epsilon(1e-9));
    CHECK(f1 == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(f2 == doctest::Approx(4.0).epsilon(1e-7));
  }
  SUBCASE("input validation") {
    ExpansionBasis bad;
    bad.exponents = {0.0, 1.0};
    CHECK_THROWS_AS(fit_expansion(t, sample(t, synthetic), bad), Error);
    bad.exponents = {1.0};
    CHECK_THROWS_AS(fit_expansion(t, sample(t, synthetic), bad), Error);
    auto narrow = log_grid(40, 10.0, 50.0);
    CHECK_THROWS_AS(fit_expansion(narrow, sample(narrow, synthetic)), Error);
    auto few = log_grid(6, 10.0, 1000.0);
    CHECK_THROWS_AS(fit_expansion(few, sample(few, synthetic)), Error);
    ExpansionBasis wide;
    // t^{1e-9} ≈ 1 + 1e-9 log t: nearly dependent columns.
    wide.exponents = {1e-9, 0.0};
    wide.log_exponents = {0.0};
    try {
      fit_expansion(t, sample(t, synthetic), wide);
      FAIL("expected IllConditioned");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::IllConditioned);
    }
  }
}

TEST_CASE("log grid") {
  auto g = log_grid();
  REQUIRE(g.size() == 40);
  CHECK(g.front() == 5.0);
  CHECK(g.back() == 500.0);
  CHECK(g[20] / g[19] == doctest::Approx(g[1] / g[0]).epsilon(1e-12));
}

TEST_CASE("scaling cone on the circle") {
  auto rho = scalar_representation("g", 2.0);
  MorseDatum m = circle_datum();
  for (double t : {1.0, 5.0, 50.0, 500.0}) {
    auto s = scaling_cone_torsion(t, m, rho);
    // f = S⁻¹: Σ(−1)^j log vol = t h(max) − t h(min) − ½ log(π/t) with h(min) = 0, h(max) = 1.
    double oracle = -t - 0.5 * std::log(std::numbers::pi / t);
    CHECK(s.log_t_volumes == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(s.gap < 1e-9);
  }
  auto r = check_scaling_coefficients(m, rho);
  CHECK(r.expected_linear == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(r.expected_log == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(r.linear_residual < 1e-6);
  CHECK(r.log_residual < 1e-6);
  CHECK(r.fit.residual < 1e-8);
  CHECK(r.max_route_gap < 1e-9);
  CHECK(r.pass);
  CHECK_THROWS_AS(scaling_cone_torsion(0.0, m, rho), Error);
}

TEST_CASE("scaling cone on larger data") {
  SUBCASE("multi-point circle with matrix holonomy") {
    Rng rng(31);
    MorseDatum m = circle_triangulation({{0.1, 0}, {0.3, 1}, {0.5, 0}, {0.8, 1}});
    m.points[0].value = 0.2;
    m.points[1].value = 0.9;
    m.points[2].value = 0.1;
    m.points[3].value = 0.7;
    auto rho = single_generator("g", Operator::scalar(tltest::random_well_conditioned(rng, 2, 1.5, 3.0)));
    auto r = check_scaling_coefficients(m, rho);
    CHECK(r.expected_linear == doctest::Approx(2.0 * (0.2 + 0.1 - 0.9 - 0.7)).epsilon(1e-14));
    CHECK(r.expected_log == doctest::Approx(-2.0 * (0.25 * 2 + 0.25 * 2)).epsilon(1e-14));
    CHECK(r.max_route_gap < 1e-9);
    CHECK(r.pass);
    CHECK(r.fit.residual < 1e-8);
  }
  SUBCASE("degenerate configuration: n = 2, all points of index 1 at level 0") {
    MorseDatum m;
    m.dimension = 2;
    m.points = {{"a", 1, 0.0}, {"b", 1, 0.0}, {"c", 1, 0.0}};
    Representation rho;
    rho.dim = 1;
    auto r = check_scaling_coefficients(m, rho);
    CHECK(r.expected_linear == 0.0);
    CHECK(r.expected_log == 0.0);
    CHECK(std::abs(r.fit.coefficient(1.0)) < 1e-10);
    CHECK(std::abs(r.fit.log_coefficient(0.0)) < 1e-10);
    CHECK(r.pass);
  }
  SUBCASE("torus") {
    MorseDatum m = product_datum(circle_datum(0.25, 0.75, "g"), circle_datum(0.25, 0.75, "h"));
    auto rho = product_representation(scalar_representation("g", 2.0), scalar_representation("h", cplx(0.0, 3.0)));
    // h reaches 2 at the top cell; e^{2t} stays representable for t ≤ 300.
    CHECK_THROWS_AS(scaling_cone_torsion(500.0, m, rho), Error);
    auto r = check_scaling_coefficients(m, rho, log_grid(40, 5.0, 300.0));
    CHECK(r.expected_linear == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    CHECK(r.pass);
    CHECK(r.max_route_gap < 1e-9);
  }
}

TEST_CASE("free term does not depend on the t-grid") {
  auto rho = scalar_representation("g", 2.0);
  MorseDatum m = circle_datum();
  auto a = check_scaling_coefficients(m, rho, log_grid(40, 5.0, 500.0));
  auto b = check_scaling_coefficients(m, rho, log_grid(25, 8.0, 200.0));
  CHECK(std::abs(a.fit.free_term - b.fit.free_term) < 1e-6);
  CHECK(a.fit.free_term == doctest::Approx(-0.5 * std::log(std::numbers::pi)).epsilon(1e-8));
}
