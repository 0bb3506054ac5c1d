#include "flowseek/wake.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>
#include <utility>

#include "flowseek/errors.hpp"
#include "flowseek/sensing.hpp"

namespace flowseek {

namespace {

constexpr std::array<std::byte, 4> kMagic{std::byte{0x57}, std::byte{0x41}, std::byte{0x56},
                                          std::byte{0x46}};
constexpr std::byte kVersion{0x01};

class Writer {
 public:
  explicit Writer(std::size_t size) : bytes_(size) {}

  void byte(std::byte b) { bytes_[pos_++] = b; }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_[pos_++] = static_cast<std::byte>((v >> (8 * i)) & 0xFFu);
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) bytes_[pos_++] = static_cast<std::byte>((bits >> (8 * i)) & 0xFFu);
  }
  std::vector<std::byte> take() { return std::move(bytes_); }

 private:
  std::vector<std::byte> bytes_;
  std::size_t pos_ = 0;
};

class Reader {
 public:
  explicit Reader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string("WAVF1: truncated payload while reading ") + what);
    }
  }
  std::byte byte() { return bytes_[pos_++]; }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::to_integer<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  double f64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::to_integer<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return std::bit_cast<double>(v);
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

std::size_t checked_count(std::uint32_t nx, std::uint32_t ny, std::uint32_t nt) {
  return static_cast<std::size_t>(nx) * ny * nt;
}

}  // namespace

void GridFieldBundle::validate() const {
  if (nx < 2 || ny < 2) throw FormatError("bundle: nx and ny must be >= 2");
  if (nt < 8) throw FormatError("bundle: nt must be >= 8");
  for (double v : {x0, y0, dx, dy, dt}) {
    if (!std::isfinite(v)) throw FormatError("bundle: non-finite header field");
  }
  if (!(dx > 0.0) || !(dy > 0.0) || !(dt > 0.0)) {
    throw FormatError("bundle: dx, dy, dt must be positive");
  }
  if (values.size() != checked_count(nx, ny, nt)) {
    throw FormatError("bundle: value count does not match nx*ny*nt");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw FormatError("bundle: non-finite sample value");
  }
}

std::vector<std::byte> encode_bundle(const GridFieldBundle& bundle) {
  bundle.validate();
  Writer out(kWavfHeaderSize + bundle.values.size() * 8);
  for (std::byte b : kMagic) out.byte(b);
  out.byte(kVersion);
  out.u32(bundle.nx);
  out.u32(bundle.ny);
  out.u32(bundle.nt);
  for (double v : {bundle.x0, bundle.y0, bundle.dx, bundle.dy, bundle.dt, bundle.meta_re,
                   bundle.meta_st, bundle.meta_a}) {
    out.f64(v);
  }
  for (double v : bundle.values) out.f64(v);
  return out.take();
}

GridFieldBundle decode_bundle(std::span<const std::byte> bytes) {
  Reader in(bytes);
  in.need(4, "magic");
  for (std::byte expected : kMagic) {
    if (in.byte() != expected) throw FormatError("WAVF1: bad magic");
  }
  in.need(1, "version");
  if (in.byte() != kVersion) throw FormatError("WAVF1: unsupported version");
  in.need(kWavfHeaderSize - 5, "header");

  GridFieldBundle b;
  b.nx = in.u32();
  b.ny = in.u32();
  b.nt = in.u32();
  b.x0 = in.f64();
  b.y0 = in.f64();
  b.dx = in.f64();
  b.dy = in.f64();
  b.dt = in.f64();
  b.meta_re = in.f64();
  b.meta_st = in.f64();
  b.meta_a = in.f64();
  for (double v : {b.x0, b.y0, b.dx, b.dy, b.dt}) {
    if (!std::isfinite(v)) throw FormatError("WAVF1: non-finite header field");
  }
  if (b.nx < 2 || b.ny < 2) throw FormatError("WAVF1: nx and ny must be >= 2");
  if (b.nt < 8) throw FormatError("WAVF1: nt must be >= 8");

  const std::size_t count = checked_count(b.nx, b.ny, b.nt);
  if (count > in.remaining() / 8) throw FormatError("WAVF1: truncated payload");
  if (in.remaining() != count * 8) throw FormatError("WAVF1: trailing bytes after payload");
  b.values.resize(count);
  for (auto& v : b.values) v = in.f64();
  b.validate();
  return b;
}

void save_bundle(const GridFieldBundle& bundle, const std::filesystem::path& path) {
  const auto bytes = encode_bundle(bundle);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

GridFieldBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_bundle(std::as_bytes(std::span<const char>(raw)));
}

GridFieldBundle synth_wake(const SynthWakeParams& p) {
  if (!(p.amplitude > 0.0) || !(p.k_x > 0.0) || !(p.omega > 0.0) || !(p.sigma > 0.0) ||
      !(p.decay_length > 0.0)) {
    throw ConfigError("synth_wake: amplitude, k_x, omega, sigma, decay_length must be positive");
  }
  if (p.grid.nx < 2 || p.grid.ny < 2) throw ConfigError("synth_wake: nx and ny must be >= 2");
  if (p.nt < 8) throw ConfigError("synth_wake: nt must be >= 8");
  if (!(p.grid.dx > 0.0) || !(p.grid.dy > 0.0) || !(p.dt > 0.0)) {
    throw ConfigError("synth_wake: dx, dy, dt must be positive");
  }
  if (std::abs(p.omega * p.nt * p.dt - kTwoPi) > 1e-9 * kTwoPi) {
    throw ConfigError("synth_wake: grid/period mismatch, omega*nt*dt must equal 2*pi");
  }
  if (!(p.k_x * p.grid.dx < kPi)) {
    throw ConfigError("synth_wake: k_x*dx must be below pi to resolve the phase");
  }

  GridFieldBundle b;
  b.nx = p.grid.nx;
  b.ny = p.grid.ny;
  b.nt = p.nt;
  b.x0 = p.grid.x0;
  b.y0 = p.grid.y0;
  b.dx = p.grid.dx;
  b.dy = p.grid.dy;
  b.dt = p.dt;
  b.values.assign(checked_count(b.nx, b.ny, b.nt), 0.0);
  for (std::uint32_t f = 0; f < b.nt; ++f) {
    const double t = f * b.dt;
    for (std::uint32_t j = 0; j < b.ny; ++j) {
      for (std::uint32_t i = 0; i < b.nx; ++i) {
        const Vec2 x = b.node(j, i);
        if (x.x < 0.0) continue;
        b.values[b.index(f, j, i)] = p.amplitude *
                                     std::exp(-x.y * x.y / (2.0 * p.sigma * p.sigma)) *
                                     std::exp(-x.x / p.decay_length) *
                                     std::cos(p.k_x * x.x - p.omega * t);
      }
    }
  }
  return b;
}

SpectralTruth synth_wake_truth(const SynthWakeParams& p, Vec2 x) {
  if (x.x < 0.0) return {0.0, 0.0, {0.0, 0.0}};
  const double m = 0.5 * p.amplitude * std::exp(-x.y * x.y / (2.0 * p.sigma * p.sigma)) *
                   std::exp(-x.x / p.decay_length);
  return {m, wrap_to_2pi(-p.k_x * x.x), {-p.k_x, 0.0}};
}

SpectralGrids spectral_grids(const GridFieldBundle& bundle, std::optional<Vec2> source,
                             double m_floor) {
  bundle.validate();
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  SpectralGrids g;
  g.nx = bundle.nx;
  g.ny = bundle.ny;
  g.x0 = bundle.x0;
  g.y0 = bundle.y0;
  g.dx = bundle.dx;
  g.dy = bundle.dy;
  const std::size_t n = static_cast<std::size_t>(g.nx) * g.ny;
  g.m.resize(n);
  g.phi.resize(n);
  g.grad_phi.assign(n, {kNaN, kNaN});
  g.delta.assign(n, kNaN);

  const FirstModeDft dft(static_cast<int>(bundle.nt));
  std::vector<double> series(bundle.nt);
  for (std::uint32_t j = 0; j < g.ny; ++j) {
    for (std::uint32_t i = 0; i < g.nx; ++i) {
      for (std::uint32_t f = 0; f < bundle.nt; ++f) series[f] = bundle.at(f, j, i);
      const auto mp = magnitude_phase(dft(series, bundle.period()));
      g.m[g.index(j, i)] = mp.m;
      g.phi[g.index(j, i)] = mp.phi;
    }
  }

  auto valid = [&](long j, long i) {
    return j >= 0 && i >= 0 && j < static_cast<long>(g.ny) && i < static_cast<long>(g.nx) &&
           g.m[g.index(j, i)] >= m_floor;
  };
  // Wrapped difference along one axis; degenerate neighbors are treated like
  // the grid edge.
  auto derivative = [&](long j, long i, long dj, long di, double h) {
    const double here = g.phi[g.index(j, i)];
    const bool fwd = valid(j + dj, i + di);
    const bool bwd = valid(j - dj, i - di);
    double diff = kNaN;
    double span = h;
    if (fwd && bwd) {
      diff = angle_diff(g.phi[g.index(j + dj, i + di)], g.phi[g.index(j - dj, i - di)]);
      span = 2.0 * h;
    } else if (fwd) {
      diff = angle_diff(g.phi[g.index(j + dj, i + di)], here);
    } else if (bwd) {
      diff = angle_diff(here, g.phi[g.index(j - dj, i - di)]);
    } else {
      return kNaN;
    }
    if (std::abs(diff) > 0.9 * kPi) ++g.suspect_wraps;
    return diff / span;
  };

  for (long j = 0; j < static_cast<long>(g.ny); ++j) {
    for (long i = 0; i < static_cast<long>(g.nx); ++i) {
      if (!valid(j, i)) continue;
      const Vec2 grad{derivative(j, i, 0, 1, g.dx), derivative(j, i, 1, 0, g.dy)};
      const std::size_t k = g.index(j, i);
      g.grad_phi[k] = grad;
      if (!source || !std::isfinite(grad.x) || !std::isfinite(grad.y)) continue;
      const Vec2 node = g.node(j, i);
      if (norm(grad) == 0.0 || node == *source) continue;
      g.delta[k] = alignment_error(node, grad, *source);
    }
  }
  return g;
}

GridFieldBundle sample_field(const Field& field, const GridSpec& grid, std::uint32_t nt) {
  GridFieldBundle b;
  b.nx = grid.nx;
  b.ny = grid.ny;
  b.nt = nt;
  b.x0 = grid.x0;
  b.y0 = grid.y0;
  b.dx = grid.dx;
  b.dy = grid.dy;
  b.dt = field.period() / nt;
  b.values.resize(checked_count(b.nx, b.ny, b.nt));
  for (std::uint32_t f = 0; f < nt; ++f) {
    const double t = f * field.period() / nt;
    for (std::uint32_t j = 0; j < b.ny; ++j) {
      for (std::uint32_t i = 0; i < b.nx; ++i) {
        b.values[b.index(f, j, i)] = field.eval(b.node(j, i), t);
      }
    }
  }
  b.validate();
  return b;
}

namespace {

constexpr double kSnap = 1e-9;

// Splits a fractional index into (cell, weight) with cell in [0, n−2].
std::pair<std::size_t, double> locate(double frac, std::uint32_t n) {
  const double nearest = std::round(frac);
  if (std::abs(frac - nearest) < kSnap) frac = nearest;
  auto cell = static_cast<long>(std::floor(frac));
  cell = std::clamp(cell, 0L, static_cast<long>(n) - 2);
  return {static_cast<std::size_t>(cell), frac - static_cast<double>(cell)};
}

}  // namespace

BundleField::BundleField(GridFieldBundle bundle) : bundle_(std::move(bundle)) {
  bundle_.validate();
}

bool BundleField::contains(Vec2 x) const {
  const double fi = (x.x - bundle_.x0) / bundle_.dx;
  const double fj = (x.y - bundle_.y0) / bundle_.dy;
  return fi >= -kSnap && fj >= -kSnap && fi <= (bundle_.nx - 1) + kSnap &&
         fj <= (bundle_.ny - 1) + kSnap;
}

double BundleField::frame_value(std::size_t frame, Vec2 x) const {
  const auto [i, wx] = locate((x.x - bundle_.x0) / bundle_.dx, bundle_.nx);
  const auto [j, wy] = locate((x.y - bundle_.y0) / bundle_.dy, bundle_.ny);
  auto v = [&](std::size_t jj, std::size_t ii) { return bundle_.at(frame, jj, ii); };
  const double bottom = wx == 0.0 ? v(j, i) : (1.0 - wx) * v(j, i) + wx * v(j, i + 1);
  const double top = wx == 0.0 ? v(j + 1, i) : (1.0 - wx) * v(j + 1, i) + wx * v(j + 1, i + 1);
  if (wy == 0.0) return bottom;
  if (wy == 1.0) return top;
  return (1.0 - wy) * bottom + wy * top;
}

double BundleField::eval(Vec2 x, double t) const {
  if (!contains(x)) return 0.0;
  double tau = std::fmod(t / bundle_.dt, static_cast<double>(bundle_.nt));
  if (tau < 0.0) tau += bundle_.nt;
  const double nearest = std::round(tau);
  if (std::abs(tau - nearest) < kSnap) tau = nearest;
  auto f0 = static_cast<std::size_t>(std::floor(tau));
  const double w = tau - static_cast<double>(f0);
  f0 %= bundle_.nt;
  if (w == 0.0) return frame_value(f0, x);
  const std::size_t f1 = (f0 + 1) % bundle_.nt;
  return (1.0 - w) * frame_value(f0, x) + w * frame_value(f1, x);
}

std::shared_ptr<const BundleField> field_from_bundle(GridFieldBundle bundle) {
  return std::make_shared<const BundleField>(std::move(bundle));
}

}  // namespace flowseek
