#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>

#include "test_util.hpp"
#include "torsionlab/errors.hpp"
#include "torsionlab/spectral.hpp"

using namespace tl;
using std::numbers::pi;

namespace {

Operator diag(std::initializer_list<double> d) {
  Mat m = Mat::Zero(static_cast<Index>(d.size()), static_cast<Index>(d.size()));
  Index i = 0;
  for (double x : d) m(i, i) = x, ++i;
  return Operator::scalar(m);
}

// ∫₀¹ log|2 sin πt| dt by subtracting the endpoint logarithms and integrating the smooth rest
// with composite Simpson.
double jensen_oracle() {
  auto g = [](double t) {
    if (t <= 0.0 || t >= 1.0) return std::log(2.0) - std::log(pi);
    return std::log(2.0 * std::sin(pi * t)) - std::log(pi * t) - std::log(pi * (1.0 - t));
  };
  const int n = 4000;
  double h = 1.0 / n, s = g(0) + g(1);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * g(i * h);
  return s * h / 3.0 + 2.0 * (std::log(pi) - 1.0);
}

Operator exp_symbol() {
  return Operator::sample(1, 1, 4096, [](double x) { return Mat::Constant(1, 1, std::exp(-1.0 / (x * x))); });
}

}  // namespace

TEST_CASE("vn_trace examples") {
  CHECK(std::abs(vn_trace(Operator::identity(Algebra::CircleFibered, 1)) - 1.0) < 1e-15);
  CHECK(std::abs(vn_trace(diag({2, 3})) - 5.0) < 1e-15);
  Operator e = Operator::trig_poly(1, 1, {{1, Mat::Constant(1, 1, 1.0)}});
  CHECK(std::abs(vn_trace(e)) < 1e-15);
  // dense sampling oracle
  CHECK(std::abs(vn_trace(e.resampled(64))) < 1e-12);
  CHECK_THROWS_AS(vn_trace(Operator::scalar(Mat::Zero(2, 3))), Error);
}

TEST_CASE("adjoint and composition plumbing") {
  std::mt19937_64 rng(1);
  Operator a = Operator::scalar(tltest::random_matrix(rng, 3, 2));
  CHECK((adjoint(adjoint(a)).matrix() - a.matrix()).norm() < 1e-15);
  CHECK(((a * Operator::identity(Algebra::Scalar, 2)).matrix() - a.matrix()).norm() < 1e-15);
  Mat c = tltest::random_matrix(rng, 2, 2);
  Operator t = Operator::trig_poly(2, 2, {{1, c}});
  Operator ta = t.adjoint();
  REQUIRE(ta.terms().size() == 1);
  CHECK(ta.terms().begin()->first == -1);
  CHECK((ta.terms().begin()->second - c.adjoint()).norm() < 1e-15);
  Operator sa = t.resampled(16).adjoint();
  for (std::size_t j = 0; j < 16; ++j) CHECK((sa.fiber_at(j, 16) - ta.fiber_at(j, 16)).norm() < 1e-13);
  CHECK_THROWS_AS(compose(a, Operator::identity(Algebra::CircleFibered, 2)), Error);
  CHECK_THROWS_AS(compose(a, a), Error);
}

TEST_CASE("spectral density examples") {
  auto d = spectral_density(Operator::identity(Algebra::Scalar, 3), {0.5, 1.0});
  CHECK(d.values[0] == doctest::Approx(0.0));
  CHECK(d.values[1] == doctest::Approx(3.0));

  // exact measure of {x : exp(-1/x²) ≤ λ} is (-log λ)^{-1/2}
  auto e = exp_symbol();
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(std::exp(std::log(1e-6) + (std::log(std::exp(-1.0)) - std::log(1e-6)) * i / 40.0));
  auto de = spectral_density(e, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double exact = 1.0 / std::sqrt(-std::log(grid[i]));
    CHECK(std::abs(de.values[i] - exact) / exact < 0.02);
  }

  auto da = spectral_density(tltest::alpha_symbol(), {0.0, 0.1, 0.5, 1.0, 1.5, 1.99, 2.0});
  for (std::size_t i = 0; i < da.grid.size(); ++i) {
    double exact = 2.0 / pi * std::asin(std::min(1.0, da.grid[i] / 2.0));
    CHECK(std::abs(da.values[i] - exact) < 2.0 / 4096 + 1e-12);
  }
  CHECK(da.kernel_dim == 0.0);
  CHECK_THROWS_AS(spectral_density(e, {}), Error);
}

TEST_CASE("fk_log_det examples") {
  CHECK(fk_log_det(diag({2, 3})) == doctest::Approx(std::log(6.0)).epsilon(1e-14));
  CHECK(std::abs(jensen_oracle()) < 1e-10);
  auto r = fk_log_det_report(tltest::alpha_symbol());
  CHECK(std::abs(r.log_det - jensen_oracle()) < 1e-4);
  CHECK(r.verdict.is_determinant_class);
  Operator c = Operator::constant(Algebra::CircleFibered, Mat::Constant(1, 1, cplx(0.3, -0.4)));
  CHECK(fk_log_det(c) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK_THROWS_AS(fk_log_det(exp_symbol()), DivergentDeterminant);
}

TEST_CASE("fk_log_det ignores the kernel") {
  // rank-one 2x2: det' is the single nonzero singular value
  Mat m(2, 2);
  m << 1, 1, 1, 1;
  CHECK(fk_log_det(Operator::scalar(m)) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("heat trace examples") {
  for (double t : {0.1, 1.0, 3.0}) CHECK(heat_trace(diag({2}), t) == doctest::Approx(std::exp(-2.0 * t)));
  CHECK(heat_trace(Operator::identity(Algebra::Scalar, 4), 1.0) == doctest::Approx(4.0 * std::exp(-1.0)));
  CHECK(heat_trace(Operator::scalar(Mat::Zero(3, 3)), 1.0) == 0.0);
  CHECK_THROWS_AS(heat_trace(diag({2}), 0.0), Error);
}

TEST_CASE("zeta_I against the incomplete gamma function") {
  CHECK(std::abs(zeta_I(diag({2}), 1.0) - (1.0 - std::exp(-2.0)) / 2.0) < 1e-12);
  CHECK(std::abs(zeta_I(Operator::identity(Algebra::Scalar, 1), 1.0) - (1.0 - std::exp(-1.0))) < 1e-12);
  for (double s : {0.5, 1.7, 3.2})
    for (double sigma : {0.3, 2.0, 7.0}) {
      double oracle = std::pow(sigma, -s) * boost::math::tgamma_lower(s, sigma) / boost::math::tgamma(s);
      CHECK(std::abs(zeta_I(diag({sigma}), s) - oracle) < 1e-10);
    }
  CHECK(std::abs(zeta_I(Operator::scalar(Mat::Zero(2, 2)), cplx(0.7, 2.0))) == 0.0);
  CHECK_THROWS_AS(zeta_I(diag({2}), -0.5), Error);
  // complex Γ against the reflection-free real value
  CHECK(std::abs(gamma_fn(4.5) - boost::math::tgamma(4.5)) < 1e-10);
}

TEST_CASE("determinant class verdicts") {
  auto a = determinant_class_check(tltest::alpha_symbol());
  CHECK(a.state == DetClass::Yes);
  CHECK(std::abs(a.limit) < 1e-3);
  auto e = determinant_class_check(exp_symbol());
  CHECK(e.state == DetClass::No);
  CHECK(e.divergence_rate_estimate == doctest::Approx(0.5).epsilon(0.2));
  auto id = determinant_class_check(Operator::identity(Algebra::Scalar, 2));
  CHECK(id.state == DetClass::Yes);
  CHECK(id.limit == 0.0);
  for (std::size_t k = 1; k < e.log_det_lower_bound_sequence.size(); ++k)
    CHECK(e.log_det_lower_bound_sequence[k] <= e.log_det_lower_bound_sequence[k - 1]);
}

TEST_CASE("spectral shift") {
  Operator big = diag({1.5, 2.0});
  CHECK((spectral_shift(big, 0.5, 1.0).matrix() - big.matrix()).norm() < 1e-15);
  CHECK(std::abs(spectral_shift(diag({0.1}), 0.5, 1.0).matrix()(0, 0) - 0.5) < 1e-15);
  // explicit blend at an interior point
  double l = 0.7, x = (l - 0.5) / 0.5;
  double p = std::exp(-1 / x), q = std::exp(-1 / (1 - x));
  CHECK(std::abs(spectral_shift(diag({l}), 0.5, 1.0).matrix()(0, 0) - (0.5 + (l - 0.5) * p / (p + q))) < 1e-15);

  Operator s = Operator::sample(1, 1, 4096, [](double t) { return Mat::Constant(1, 1, 2.0 * std::abs(std::sin(pi * t))); });
  double a = 0.3, b = 0.6;
  Operator out = spectral_shift(s, a, b);
  std::vector<double> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back(2.1 * i / 200.0);
  auto fin = spectral_density(s, grid), fout = spectral_density(out, grid);
  auto fa = spectral_density(s, {a});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < a) CHECK(fout.values[i] == 0.0);
    if (grid[i] >= a) CHECK(fout.values[i] >= fa.values[0] - 1e-12);
    if (grid[i] >= b) CHECK(std::abs(fout.values[i] - fin.values[i]) < 1e-12);
  }
  Mat nh(2, 2);
  nh << 0, 1, 0, 0;
  CHECK_THROWS_AS(spectral_shift(Operator::scalar(nh), a, b), Error);
}

TEST_CASE("trace algebra properties") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Mat a = tltest::random_matrix(rng, 3, 4), b = tltest::random_matrix(rng, 4, 3);
    Operator A = Operator::scalar(a), B = Operator::scalar(b);
    CHECK(std::abs(vn_trace(A * B) - vn_trace(B * A)) < 1e-9);
    // ‖vu‖_tr ≤ ‖v‖ ‖u‖_tr
    Operator V = Operator::scalar(tltest::random_matrix(rng, 3, 3));
    CHECK(trace_norm(V * A) <= op_norm(V.matrix()) * trace_norm(A) + 1e-9);
    Operator P = Operator::scalar(tltest::random_well_conditioned(rng, 3));
    Operator Q = Operator::scalar(tltest::random_well_conditioned(rng, 3));
    CHECK(std::abs(fk_log_det(P * Q) - fk_log_det(P) - fk_log_det(Q)) < 1e-7);
  }
  // circle-fibered trace commutativity and FK multiplicativity
  Operator p = Operator::trig_poly(2, 2, {{0, Mat::Identity(2, 2) * 3.0}, {1, tltest::random_matrix(rng, 2, 2) * 0.5}});
  Operator q = Operator::trig_poly(2, 2, {{0, Mat::Identity(2, 2) * 2.0}, {-2, tltest::random_matrix(rng, 2, 2) * 0.4}});
  CHECK(std::abs(vn_trace(p * q) - vn_trace(q * p)) < 1e-9);
  CHECK(std::abs(fk_log_det(p * q) - fk_log_det(p) - fk_log_det(q)) < 1e-7);
  // heat decay for spectrum ≥ ε
  Operator h = diag({0.4, 0.9, 2.0});
  double eps = 0.4, C = heat_trace(h, 1e-9);
  for (double t : {0.5, 2.0, 10.0, 40.0}) CHECK(heat_trace(h, t) <= C * std::exp(-t * eps / 2.0));
  // density monotone, F(∞) = min(rows, cols)
  Operator rect = Operator::scalar(tltest::random_matrix(rng, 2, 5));
  auto d = spectral_density(rect, {0.0, 0.5, 1.0, 2.0, 5.0, 1e6});
  for (std::size_t i = 1; i < d.values.size(); ++i) CHECK(d.values[i] >= d.values[i - 1]);
  CHECK(d.values.back() == 2.0);
}
