#include <cmath>
#include <random>

#include "doctest.h"
#include "flowseek/errors.hpp"
#include "flowseek/field.hpp"
#include "flowseek/sensing.hpp"

using namespace flowseek;

TEST_CASE("radial field values") {
  const RadialFieldParams p{6.5};
  CHECK(radial_field_eval(p, {0.0, 0.0}, 0.0) == 2.0);
  // 2 e^(−π/6.5) cos π
  CHECK(radial_field_eval(p, {kPi, 0.0}, 0.0) == doctest::Approx(-1.2334624736357258).epsilon(1e-14));
  CHECK(radial_field_eval(p, {3.0, 4.0}, kTwoPi) ==
        doctest::Approx(radial_field_eval(p, {3.0, 4.0}, 0.0)).epsilon(1e-14));
}

TEST_CASE("radial field is 2π-periodic in time") {
  const RadialFieldParams p{6.5};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(-30.0, 30.0), time(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 x{pos(rng), pos(rng)};
    const double t = time(rng);
    CHECK(std::abs(radial_field_eval(p, x, t) - radial_field_eval(p, x, t + kTwoPi)) < 1e-12);
  }
}

TEST_CASE("radial spectral truth") {
  const RadialFieldParams p{6.5};
  const auto s = radial_spectral_truth(p, {3.0, 0.0});
  CHECK(s.m == doctest::Approx(0.6303131865967198).epsilon(1e-14));
  CHECK(s.phi == doctest::Approx(3.2831853071795865).epsilon(1e-14));
  CHECK(s.grad_phi.x == doctest::Approx(-1.0));
  CHECK(s.grad_phi.y == doctest::Approx(0.0));

  const auto up = radial_spectral_truth(p, {0.0, 5.0});
  CHECK(up.grad_phi.x == doctest::Approx(0.0));
  CHECK(up.grad_phi.y == doctest::Approx(-1.0));

  CHECK(radial_spectral_truth(p, {1e-12, 0.0}).m == doctest::Approx(1.0));
  CHECK_THROWS_AS(radial_spectral_truth(p, {0.0, 0.0}), SingularityError);
}

TEST_CASE("radial field rejects non-positive ell") {
  CHECK_THROWS_AS(RadialField(RadialFieldParams{0.0}), ConfigError);
  CHECK_THROWS_AS(RadialField(RadialFieldParams{-1.0}), ConfigError);
}

TEST_CASE("alignment error of the radial field is zero everywhere") {
  const RadialFieldParams p{6.5};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> radius(0.1, 50.0), angle(-kPi, kPi);
  for (int i = 0; i < 1000; ++i) {
    const double r = radius(rng), a = angle(rng);
    const Vec2 x{r * std::cos(a), r * std::sin(a)};
    CHECK(std::abs(alignment_error(x, radial_spectral_truth(p, x).grad_phi)) < 1e-12);
  }
}

TEST_CASE("alignment error sign convention") {
  CHECK(alignment_error({3.0, 0.0}, {0.0, 1.0}) == doctest::Approx(-kPi / 2));
  CHECK(alignment_error({3.0, 0.0}, {1.0, 0.0}) == doctest::Approx(kPi));
  // Decomposition ĝ = cos δ c₁ + sin δ c₂ with c₂ = c₁ rotated by +π/2.
  const Vec2 x{2.0, -1.0}, g{0.3, 0.8}, source{0.5, 0.5};
  const double delta = alignment_error(x, g, source);
  const Vec2 c1 = (source - x) / norm(source - x);
  const Vec2 c2 = rotate(c1, kPi / 2);
  const Vec2 rebuilt = std::cos(delta) * c1 + std::sin(delta) * c2;
  CHECK(rebuilt.x == doctest::Approx(g.x / norm(g)));
  CHECK(rebuilt.y == doctest::Approx(g.y / norm(g)));
  CHECK_THROWS_AS(alignment_error({1.0, 1.0}, {0.0, 0.0}), SingularityError);
  CHECK_THROWS_AS(alignment_error({1.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}), SingularityError);
}

TEST_CASE("synthetic traveling-wave field") {
  SUBCASE("single mode") {
    const auto f = synth_traveling_field({{1.0, 0.0, 1.0, {1.0, 0.0}}}, {0.0, 0.0});
    CHECK(f->eval({0.0, 0.0}, 0.0) == 1.0);
    CHECK(f->period() == doctest::Approx(kTwoPi));
    const auto s = f->analytic_spectra({0.0, 0.0});
    CHECK(s.grad_phi.x == doctest::Approx(-1.0));
    CHECK(s.grad_phi.y == doctest::Approx(0.0));
  }
  SUBCASE("phase at the base point is atan2(beta, alpha)") {
    const double alpha = 0.6, beta = -1.3;
    const Vec2 base{2.0, -3.0};
    const auto f = synth_traveling_field({{alpha, beta, 2.0, {0.4, 0.9}}}, base);
    const auto s = f->analytic_spectra(base);
    CHECK(angle_diff(s.phi, wrap_to_2pi(std::atan2(beta, alpha))) == doctest::Approx(0.0));
    CHECK(s.m == doctest::Approx(0.5 * std::hypot(alpha, beta)));
  }
  SUBCASE("period follows the lowest frequency") {
    const auto f = synth_traveling_field({{1.0, 0.0, 2.0, {}}, {0.5, 0.0, 4.0, {}}}, {});
    CHECK(f->period() == doctest::Approx(kPi));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(synth_traveling_field({}, {}), ConfigError);
    CHECK_THROWS_AS(synth_traveling_field({{1.0, 0.0, 1.0, {}}, {1.0, 0.0, 1.5, {}}}, {}),
                    ConfigError);
    CHECK_THROWS_AS(synth_traveling_field({{1.0, 0.0, 0.0, {}}}, {}), ConfigError);
  }
}

TEST_CASE("angle wrapping helpers") {
  CHECK(wrap_to_2pi(-3.0) == doctest::Approx(kTwoPi - 3.0));
  CHECK(wrap_to_2pi(kTwoPi) == 0.0);
  CHECK(wrap_to_2pi(-1e-18) < kTwoPi);
  CHECK(wrap_to_pi(kPi) == doctest::Approx(kPi));
  CHECK(wrap_to_pi(-kPi) == doctest::Approx(kPi));
  CHECK(angle_diff(0.1, kTwoPi - 0.1) == doctest::Approx(0.2));
}
