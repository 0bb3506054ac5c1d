#include <cmath>
#include <random>

#include "doctest.h"
#include "flowseek/errors.hpp"
#include "flowseek/field.hpp"
#include "flowseek/sensing.hpp"
#include "oracles.hpp"

using namespace flowseek;

namespace {

class ZeroField final : public Field {
 public:
  double eval(Vec2, double) const override { return 0.0; }
  double period() const override { return kTwoPi; }
};

// Angle between two nonzero vectors.
double angle_between(Vec2 a, Vec2 b) { return std::abs(std::atan2(cross(a, b), dot(a, b))); }

}  // namespace

TEST_CASE("sample_window") {
  const RadialField field({6.5});
  const auto series = sample_window(field, {3.0, 0.0}, 0.0, 64);
  REQUIRE(series.size() == 64);
  CHECK(series[0] == doctest::Approx(-1.2480106504781381).epsilon(1e-14));
  const auto shifted = sample_window(field, {3.0, 0.0}, kTwoPi, 64);
  for (std::size_t k = 0; k < series.size(); ++k) CHECK(shifted[k] == doctest::Approx(series[k]));

  for (double v : sample_window(ZeroField{}, {1.0, 2.0}, 0.3, 16)) CHECK(v == 0.0);
}

TEST_CASE("dft_first_mode on the radial field matches its closed-form spectrum") {
  const RadialField field({6.5});
  const auto series = sample_window(field, {3.0, 0.0}, 0.0, 64);
  const auto c = dft_first_mode(series, kTwoPi);
  // exp(−3/6.5 − 3i)
  CHECK(std::abs(c) == doctest::Approx(0.6303131865967198).epsilon(1e-13));
  CHECK(angle_diff(std::arg(c), -3.0) == doctest::Approx(0.0).epsilon(1e-13));

  // Quadrature of the continuous time average agrees with the DFT bin.
  const auto q = oracle::first_mode_quadrature(
      [&](double t) { return field.eval({3.0, 0.0}, t); }, kTwoPi);
  CHECK(std::abs(q - c) < 1e-10);
}

TEST_CASE("dft_first_mode edge cases") {
  std::vector<double> zeros(16, 0.0);
  CHECK(std::abs(dft_first_mode(zeros, 1.0)) == 0.0);

  std::vector<double> second(32);
  for (int k = 0; k < 32; ++k) second[k] = std::cos(2.0 * kTwoPi * k / 32);
  CHECK(std::abs(dft_first_mode(second, kTwoPi)) < 1e-12);

  std::vector<double> short_series(7, 1.0);
  CHECK_THROWS_AS(dft_first_mode(short_series, 1.0), DomainError);
}

TEST_CASE("dft_first_mode recovers traveling-wave coefficients exactly") {
  // α cos(−ω₁t) + β sin(−ω₁t) → (α + iβ)/2 at the base point.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coef(-2.0, 2.0), period(0.5, 20.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double alpha = coef(rng), beta = coef(rng), T = period(rng);
    const int n = 8 + trial % 57;
    std::vector<double> series(n);
    for (int k = 0; k < n; ++k) {
      const double t = k * T / n;
      const double w = kTwoPi / T;
      series[k] = alpha * std::cos(-w * t) + beta * std::sin(-w * t);
    }
    const auto c = dft_first_mode(series, T);
    CHECK(std::abs(c - std::complex<double>(alpha, beta) / 2.0) < 1e-12);
  }
}

TEST_CASE("phase does not depend on when the window starts") {
  const RadialField field({6.5});
  const Vec2 x{2.0, 1.0};
  const auto a = dft_first_mode(sample_window(field, x, 0.0, 32), kTwoPi, 0.0);
  const auto b = dft_first_mode(sample_window(field, x, 1.234, 32), kTwoPi, 1.234);
  CHECK(std::abs(a - b) < 1e-13);
}

TEST_CASE("magnitude_phase") {
  auto mp = magnitude_phase({1.0, 0.0});
  CHECK(mp.m == 1.0);
  CHECK(mp.phi == 0.0);
  mp = magnitude_phase({0.0, -1.0});
  CHECK(mp.m == doctest::Approx(1.0));
  CHECK(mp.phi == doctest::Approx(3.0 * kPi / 2.0));
  mp = magnitude_phase(std::exp(std::complex<double>(-3.0 / 6.5, -3.0)));
  CHECK(mp.m == doctest::Approx(0.6303131865967198));
  CHECK(mp.phi == doctest::Approx(3.2831853071795865));
  mp = magnitude_phase({0.0, 0.0});
  CHECK(mp.degenerate);
  CHECK(mp.phi == 0.0);
}

TEST_CASE("phase_gradient") {
  const RadialField field({6.5});
  SensingConfig cfg;
  cfg.n_samples = 64;
  cfg.stencil_h = 0.01;

  auto g = phase_gradient(field, {3.0, 0.0}, 0.0, cfg);
  CHECK(std::abs(g.x + 1.0) < 1e-4);
  CHECK(std::abs(g.y) < 1e-4);
  g = phase_gradient(field, {0.0, 5.0}, 0.0, cfg);
  CHECK(std::abs(g.x) < 1e-4);
  CHECK(std::abs(g.y + 1.0) < 1e-4);

  SUBCASE("single-mode field: gradient is -k") {
    const auto wave = synth_traveling_field({{1.0, 0.5, 1.0, {0.7, -0.7}}}, {1.0, 1.0});
    const auto gw = phase_gradient(*wave, {1.0, 1.0}, 0.0, cfg);
    CHECK(gw.x == doctest::Approx(-0.7).epsilon(1e-8));
    CHECK(gw.y == doctest::Approx(0.7).epsilon(1e-8));
  }
  SUBCASE("two modes: only the fundamental is seen") {
    const auto wave = synth_traveling_field(
        {{1.0, 0.0, 1.0, {1.0, 0.0}}, {3.0, -1.0, 2.0, {0.0, 2.0}}}, {0.0, 0.0});
    const auto gw = phase_gradient(*wave, {0.2, 0.1}, 0.0, cfg);
    CHECK(gw.x == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(std::abs(gw.y) < 1e-8);
    const auto c = dft_first_mode(sample_window(*wave, {0.0, 0.0}, 0.0, 64), wave->period());
    CHECK(std::abs(c - std::complex<double>(0.5, 0.0)) < 1e-12);
  }
  SUBCASE("degenerate magnitude") {
    CHECK_THROWS_AS(phase_gradient(ZeroField{}, {1.0, 1.0}, 0.0, cfg), DegenerateMagnitudeError);
  }
}

TEST_CASE("phase_gradient is second-order in the stencil width") {
  const RadialField field({6.5});
  const Vec2 x{2.0, 1.5};
  const Vec2 exact = -x / norm(x);
  SensingConfig cfg;
  cfg.n_samples = 16;
  double prev = 0.0;
  for (double h : {0.08, 0.04, 0.02}) {
    cfg.stencil_h = h;
    const double err = norm(phase_gradient(field, x, 0.0, cfg) - exact);
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.02));
    prev = err;
  }
}

TEST_CASE("windowed sensing matches the radial ground truth") {
  const RadialField field({6.5});
  SensingConfig cfg;
  cfg.n_samples = 64;
  cfg.stencil_h = 0.01;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> radius(0.5, 30.0), angle(-kPi, kPi);
  for (int i = 0; i < 100; ++i) {
    const double r = radius(rng), a = angle(rng);
    const Vec2 x{r * std::cos(a), r * std::sin(a)};
    const auto truth = radial_spectral_truth(field.params(), x);
    const auto s = sense(field, x, 0.0, 0.0, cfg);
    CHECK(std::abs(s.m - truth.m) < 1e-10);
    CHECK(std::abs(angle_diff(s.phi, truth.phi)) < 1e-10);
    CHECK(angle_between(s.grad_phi, truth.grad_phi) < 1e-3);
  }
}

TEST_CASE("sensory_output") {
  CHECK(sensory_output({-1.0, 0.0}, kPi) == doctest::Approx(0.0));
  CHECK(sensory_output({-1.0, 0.0}, kPi / 2) == doctest::Approx(1.0));
  CHECK(sensory_output({0.0, -1.0}, 0.0) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(sensory_output({0.0, 0.0}, 0.0), SingularityError);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0), scale(1e-3, 1e3);
  for (int i = 0; i < 200; ++i) {
    const Vec2 g{u(rng), u(rng)};
    const double theta = u(rng);
    const double s = sensory_output(g, theta);
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
    CHECK(sensory_output(scale(rng) * g, theta) == doctest::Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("sense honors the analytic source and config validation") {
  const RadialField field({6.5});
  SensingConfig cfg;
  cfg.source = SpectralSource::Analytic;
  const auto s = sense(field, {3.0, 0.0}, kPi / 2, 0.0, cfg);
  CHECK(s.grad_phi.x == -1.0);
  CHECK(s.s == doctest::Approx(1.0));

  SensingConfig bad;
  bad.n_samples = 4;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.stencil_h = 0.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
