#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>
#include <string>

#include "doctest.h"
#include "flowseek/agent.hpp"
#include "flowseek/errors.hpp"
#include "flowseek/sensing.hpp"
#include "flowseek/wake.hpp"

using namespace flowseek;

namespace {

GridFieldBundle random_bundle(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint32_t> size(2, 6), frames(8, 12);
  std::uniform_real_distribution<double> u(-1e3, 1e3), pos(1e-3, 10.0);
  GridFieldBundle b;
  b.nx = size(rng);
  b.ny = size(rng);
  b.nt = frames(rng);
  b.x0 = u(rng);
  b.y0 = u(rng);
  b.dx = pos(rng);
  b.dy = pos(rng);
  b.dt = pos(rng);
  if (rng() % 2) b.meta_re = u(rng);
  if (rng() % 2) b.meta_st = pos(rng);
  if (rng() % 2) b.meta_a = pos(rng);
  b.values.resize(static_cast<std::size_t>(b.nx) * b.ny * b.nt);
  for (auto& v : b.values) v = u(rng);
  return b;
}

std::string decode_error(const std::vector<std::byte>& bytes) {
  try {
    decode_bundle(bytes);
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

void put_u32(std::vector<std::byte>& bytes, std::size_t offset, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes[offset + i] = static_cast<std::byte>((v >> (8 * i)) & 0xffu);
}

void put_f64(std::vector<std::byte>& bytes, std::size_t offset, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) bytes[offset + i] = static_cast<std::byte>((bits >> (8 * i)) & 0xffu);
}

// a + b x + c y + d x y, times cos(t): bilinear in space at every instant.
class BilinearField final : public Field {
 public:
  double eval(Vec2 x, double t) const override {
    return (0.3 + 1.7 * x.x - 0.4 * x.y + 0.25 * x.x * x.y) * std::cos(t - 0.2);
  }
  double period() const override { return kTwoPi; }
};

SynthWakeParams default_wake() { return SynthWakeParams{}; }

}  // namespace

TEST_CASE("WAVF1 layout") {
  GridFieldBundle b;
  b.nx = 2;
  b.ny = 2;
  b.nt = 8;
  b.values.assign(32, 0.0);
  const auto bytes = encode_bundle(b);
  REQUIRE(bytes.size() == kWavfHeaderSize + 32 * 8);
  CHECK(bytes[0] == std::byte{0x57});
  CHECK(bytes[1] == std::byte{0x41});
  CHECK(bytes[2] == std::byte{0x56});
  CHECK(bytes[3] == std::byte{0x46});
  CHECK(bytes[4] == std::byte{0x01});
  CHECK(bytes[5] == std::byte{2});
  CHECK(bytes[13] == std::byte{8});
  // dx = 1.0 little-endian at offset 33.
  CHECK(bytes[33 + 6] == std::byte{0xf0});
  CHECK(bytes[33 + 7] == std::byte{0x3f});
  CHECK(encode_bundle(decode_bundle(bytes)) == bytes);
}

TEST_CASE("WAVF1 round trip is byte identical") {
  std::mt19937_64 rng(2024);
  const auto dir = std::filesystem::temp_directory_path() / "flowseek_test_wake";
  std::filesystem::create_directories(dir);
  for (int i = 0; i < 20; ++i) {
    const GridFieldBundle b = random_bundle(rng);
    const auto bytes = encode_bundle(b);
    const auto path = dir / ("b" + std::to_string(i) + ".wavf");
    save_bundle(b, path);
    std::ifstream in(path, std::ios::binary);
    const std::vector<char> raw{std::istreambuf_iterator<char>(in), {}};
    REQUIRE(raw.size() == bytes.size());
    CHECK(std::memcmp(raw.data(), bytes.data(), raw.size()) == 0);
    const GridFieldBundle loaded = load_bundle(path);
    CHECK(encode_bundle(loaded) == bytes);
    CHECK(loaded.values == b.values);
    CHECK(std::isnan(loaded.meta_re) == std::isnan(b.meta_re));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("WAVF1 malformed input") {
  std::mt19937_64 rng(7);
  const auto good = encode_bundle(random_bundle(rng));

  auto bad = good;
  bad[3] = std::byte{'G'};
  CHECK(decode_error(bad).find("bad magic") != std::string::npos);

  bad = good;
  bad[4] = std::byte{0x02};
  CHECK(decode_error(bad).find("unsupported version") != std::string::npos);

  bad = good;
  put_u32(bad, 13, 4);
  CHECK(decode_error(bad).find("nt must be >= 8") != std::string::npos);

  bad = good;
  bad.pop_back();
  CHECK(decode_error(bad).find("truncated payload") != std::string::npos);

  bad.assign(good.begin(), good.begin() + 40);
  CHECK(decode_error(bad).find("truncated payload") != std::string::npos);

  bad = good;
  put_f64(bad, 33, std::numeric_limits<double>::infinity());
  CHECK(decode_error(bad).find("non-finite header field") != std::string::npos);

  bad = good;
  bad.push_back(std::byte{0});
  CHECK(decode_error(bad).find("trailing bytes") != std::string::npos);

  CHECK_THROWS_AS(load_bundle("/nonexistent/flowseek.wavf"), Error);
}

TEST_CASE("synth_wake values") {
  const auto p = default_wake();
  const auto b = synth_wake(p);
  CHECK(b.nt == 32);
  CHECK(b.period() == doctest::Approx(kTwoPi).epsilon(1e-15));
  const auto g = spectral_grids(b);
  // (x = 5, y = 0) is node i = 40, j = 40.
  CHECK(g.node(40, 40) == Vec2{5.0, 0.0});
  CHECK(g.m[g.index(40, 40)] == doctest::Approx(0.6065306597126334).epsilon(1e-12));
  CHECK(g.m[g.index(40, 4)] == 0.0);
  CHECK(synth_wake_truth(p, {-1.0, 0.0}).m == 0.0);

  auto mismatch = p;
  mismatch.omega = 1.1;
  CHECK_THROWS_AS(synth_wake(mismatch), ConfigError);
  auto coarse = p;
  coarse.k_x = 4.0 * std::numbers::pi;
  CHECK_THROWS_AS(synth_wake(coarse), ConfigError);
  auto few = p;
  few.nt = 4;
  few.dt = kTwoPi / 4.0;
  CHECK_THROWS_AS(synth_wake(few), ConfigError);
}

TEST_CASE("spectral_grids reproduces the generator") {
  const auto p = default_wake();
  const auto b = synth_wake(p);
  const auto g = spectral_grids(b, Vec2{0.0, 0.0});
  int checked = 0;
  for (std::uint32_t j = 0; j < g.ny; ++j) {
    for (std::uint32_t i = 0; i < g.nx; ++i) {
      const Vec2 x = g.node(j, i);
      if (x.x < 0.0) continue;
      const auto truth = synth_wake_truth(p, x);
      const auto k = g.index(j, i);
      CHECK(std::abs(g.m[k] - truth.m) < 1e-6);
      CHECK(std::abs(angle_diff(g.phi[k], truth.phi)) < 1e-6);
      if (g.m[k] > 100 * 1e-9) {
        const Vec2 d = g.grad_phi[k];
        CHECK(std::abs(angle_diff(std::atan2(d.y, d.x), std::numbers::pi)) < 1e-6);
      }
      ++checked;
    }
  }
  CHECK(checked == 81 * 141);
  CHECK(g.suspect_wraps == 0);
}

TEST_CASE("alignment error grid on the synthetic wake") {
  const auto g = spectral_grids(synth_wake(default_wake()), Vec2{0.0, 0.0});
  const std::uint32_t centre = 40;
  for (std::uint32_t i = 40; i < g.nx; ++i) {
    CHECK(std::abs(g.delta[g.index(centre, i)]) < 1e-12);
  }
  for (std::uint32_t j = 0; j < centre; ++j) {
    for (std::uint32_t i = 21; i < g.nx; ++i) {
      const double below = g.delta[g.index(j, i)];
      const double above = g.delta[g.index(g.ny - 1 - j, i)];
      CHECK(below == doctest::Approx(-above).epsilon(1e-9));
      CHECK(below > 0.0);
    }
  }
  // Upstream is masked.
  CHECK(std::isnan(g.delta[g.index(centre, 3)]));
  CHECK(std::isnan(g.grad_phi[g.index(centre, 3)].x));
}

TEST_CASE("spectral_grids of an all-zero bundle is fully masked") {
  GridFieldBundle b;
  b.nx = 4;
  b.ny = 3;
  b.nt = 8;
  b.values.assign(96, 0.0);
  const auto g = spectral_grids(b, Vec2{0.0, 0.0});
  for (std::size_t k = 0; k < g.m.size(); ++k) {
    CHECK(g.m[k] == 0.0);
    CHECK(std::isnan(g.delta[k]));
  }
}

TEST_CASE("spectral_grids uses the sensing DFT exactly") {
  std::mt19937_64 rng(31);
  const GridFieldBundle b = random_bundle(rng);
  const auto g = spectral_grids(b);
  std::vector<double> series(b.nt);
  for (std::uint32_t j = 0; j < b.ny; ++j) {
    for (std::uint32_t i = 0; i < b.nx; ++i) {
      for (std::uint32_t f = 0; f < b.nt; ++f) series[f] = b.at(f, j, i);
      const auto mp = magnitude_phase(dft_first_mode(series, b.period()));
      CHECK(g.m[g.index(j, i)] == mp.m);
      CHECK(g.phi[g.index(j, i)] == mp.phi);
    }
  }
}

TEST_CASE("BundleField interpolation") {
  GridSpec grid{-1.0, -2.0, 9, 7, 0.5, 0.75};
  const BilinearField source;
  const auto field = field_from_bundle(sample_field(source, grid, 16));
  const auto& b = field->bundle();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(-1.0, 3.0), uy(-2.0, 2.5);

  SUBCASE("nodes and frames return stored values") {
    for (std::uint32_t f = 0; f < b.nt; ++f) {
      for (std::uint32_t j = 0; j < b.ny; ++j) {
        for (std::uint32_t i = 0; i < b.nx; ++i) {
          CHECK(field->eval(b.node(j, i), f * b.dt) == b.at(f, j, i));
        }
      }
    }
    CHECK(field->eval(b.node(2, 3), 3 * b.dt + b.period()) == b.at(3, 2, 3));
    CHECK(field->eval(b.node(2, 3), 3 * b.dt - 2 * b.period()) == doctest::Approx(b.at(3, 2, 3)));
  }
  SUBCASE("cell centre is the corner average") {
    const Vec2 c = b.node(1, 1) + Vec2{0.5 * b.dx, 0.5 * b.dy};
    const double avg = 0.25 * (b.at(5, 1, 1) + b.at(5, 1, 2) + b.at(5, 2, 1) + b.at(5, 2, 2));
    CHECK(field->eval(c, 5 * b.dt) == doctest::Approx(avg).epsilon(1e-14));
  }
  SUBCASE("bilinear fields are reproduced at frame times") {
    for (int k = 0; k < 200; ++k) {
      const Vec2 x{ux(rng), uy(rng)};
      const double t = static_cast<double>(k % b.nt) * b.dt;
      CHECK(field->eval(x, t) == doctest::Approx(source.eval(x, t)).epsilon(1e-12));
    }
  }
  SUBCASE("between frames the interpolation is linear in time") {
    const Vec2 x{0.3, 0.1};
    const double t = 2.25 * b.dt;
    const double expect = 0.75 * field->eval(x, 2 * b.dt) + 0.25 * field->eval(x, 3 * b.dt);
    CHECK(field->eval(x, t) == doctest::Approx(expect).epsilon(1e-14));
    const double wrap = 0.5 * field->eval(x, 15 * b.dt) + 0.5 * field->eval(x, 0.0);
    CHECK(field->eval(x, 15.5 * b.dt) == doctest::Approx(wrap).epsilon(1e-14));
  }
  SUBCASE("outside the grid") {
    CHECK_FALSE(field->contains({-1.5, 0.0}));
    CHECK(field->contains({3.0, 2.5}));
    CHECK(field->eval({10.0, 0.0}, 0.0) == 0.0);
  }
}

TEST_CASE("agent on the synthetic wake") {
  const auto field = field_from_bundle(synth_wake(default_wake()));
  SensingConfig cfg;
  cfg.n_samples = 32;
  SimulationOptions opts;
  opts.dt = 1e-2;
  opts.t_end = 100.0;
  opts.r_stop = 0.5;
  opts.record_every = 10;
  const auto traj =
      simulate({20.0, 0.0, std::numbers::pi, 0.0}, *field, {GainKind::Proportional, 1.0}, cfg, opts);
  CHECK(traj.reason == Termination::ReachedSource);
  double prev = 1e9;
  for (const auto& s : traj.samples) {
    const double r = norm(s.state.position());
    CHECK(r < prev);
    prev = r;
    CHECK(std::abs(s.state.y) < 1e-9);
  }
  CHECK(prev < 0.5);
}

TEST_CASE("agent on the synthetic wake: off-nominal terminations") {
  const auto field = field_from_bundle(synth_wake(default_wake()));
  SensingConfig cfg;
  cfg.n_samples = 32;
  SimulationOptions opts;
  opts.dt = 1e-2;
  opts.t_end = 100.0;
  {
    const auto out =
        simulate({34.0, 0.0, 0.0, 0.0}, *field, {GainKind::Static, 1e-3}, cfg, opts);
    CHECK(out.reason == Termination::LeftDomain);
  }
  {
    const auto upstream =
        simulate({-3.0, 0.0, 0.0, 0.0}, *field, {GainKind::Static, 1.0}, cfg, opts);
    CHECK(upstream.reason == Termination::SensingFailure);
    CHECK_FALSE(upstream.detail.empty());
  }
}
