#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "flowseek/field.hpp"
#include "flowseek/vec2.hpp"

namespace flowseek {

// Time-periodic scalar field on a regular space-time grid. nt frames span
// exactly one period T = nt·dt; each frame is ny rows of nx values, x fastest.
struct GridFieldBundle {
  std::uint32_t nx = 0;
  std::uint32_t ny = 0;
  std::uint32_t nt = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double dx = 1.0;
  double dy = 1.0;
  double dt = 1.0;
  double meta_re = std::numeric_limits<double>::quiet_NaN();
  double meta_st = std::numeric_limits<double>::quiet_NaN();
  double meta_a = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> values;

  double period() const { return nt * dt; }
  std::size_t index(std::size_t frame, std::size_t j, std::size_t i) const {
    return (frame * ny + j) * nx + i;
  }
  double at(std::size_t frame, std::size_t j, std::size_t i) const {
    return values[index(frame, j, i)];
  }
  Vec2 node(std::size_t j, std::size_t i) const { return {x0 + i * dx, y0 + j * dy}; }

  // Throws FormatError on nx, ny < 2, nt < 8, non-positive spacings,
  // non-finite header fields or values, or a size mismatch.
  void validate() const;
};

// WAVF1: 'W' 'A' 'V' 'F', version 0x01, then little-endian u32 nx, ny, nt;
// f64 x0, y0, dx, dy, dt; f64 Re, St, A (NaN when unset); nt·ny·nx f64.
inline constexpr std::size_t kWavfHeaderSize = 5 + 3 * 4 + 8 * 8;

std::vector<std::byte> encode_bundle(const GridFieldBundle& bundle);
GridFieldBundle decode_bundle(std::span<const std::byte> bytes);

void save_bundle(const GridFieldBundle& bundle, const std::filesystem::path& path);
GridFieldBundle load_bundle(const std::filesystem::path& path);

struct GridSpec {
  double x0 = -5.0;
  double y0 = -10.0;
  std::uint32_t nx = 161;
  std::uint32_t ny = 81;
  double dx = 0.25;
  double dy = 0.25;
};

struct SynthWakeParams {
  double amplitude = 2.0;   // A_w
  double k_x = 1.0;         // streamwise wavenumber
  double omega = 1.0;       // must equal 2π/(nt·dt)
  double sigma = 2.0;       // lateral Gaussian width
  double decay_length = 10.0;  // streamwise decay L
  GridSpec grid;
  std::uint32_t nt = 32;
  double dt = kTwoPi / 32.0;
};

// w(x, y, t) = A exp(−y²/2σ²) exp(−x/L) cos(k_x x − ω t) for x >= 0, zero
// upstream; the source sits at the origin. Throws ConfigError when ω·nt·dt is
// not 2π or k_x·dx >= π.
GridFieldBundle synth_wake(const SynthWakeParams& params);

// Closed-form first-mode spectra of the generator: m = (A/2)e^(−y²/2σ²)e^(−x/L),
// φ = −k_x x mod 2π, ∇φ = (−k_x, 0); all zero upstream.
SpectralTruth synth_wake_truth(const SynthWakeParams& params, Vec2 x);

struct SpectralGrids {
  std::uint32_t nx = 0;
  std::uint32_t ny = 0;
  double x0 = 0.0, y0 = 0.0, dx = 1.0, dy = 1.0;
  std::vector<double> m;
  std::vector<double> phi;
  std::vector<Vec2> grad_phi;
  std::vector<double> delta;  // NaN when masked or no source given
  // Neighbor phase differences whose wrapped magnitude exceeded 0.9π, i.e.
  // places where the grid under-resolves the phase.
  std::size_t suspect_wraps = 0;

  std::size_t index(std::size_t j, std::size_t i) const { return j * nx + i; }
  Vec2 node(std::size_t j, std::size_t i) const { return {x0 + i * dx, y0 + j * dy}; }
};

// Per-gridpoint first-mode DFT (same routine as the onboard sensor), wrapped
// central differences for ∇φ (one-sided at the edges), and δ when the source
// is known, masked where m < m_floor.
SpectralGrids spectral_grids(const GridFieldBundle& bundle, std::optional<Vec2> source = {},
                             double m_floor = 1e-9);

// Samples any field onto a bundle (nt frames over one period).
GridFieldBundle sample_field(const Field& field, const GridSpec& grid, std::uint32_t nt);

// Bilinear in space, periodic linear in time; zero outside the grid.
class BundleField final : public Field {
 public:
  explicit BundleField(GridFieldBundle bundle);

  double eval(Vec2 x, double t) const override;
  double period() const override { return bundle_.period(); }
  bool contains(Vec2 x) const override;

  const GridFieldBundle& bundle() const { return bundle_; }

 private:
  double frame_value(std::size_t frame, Vec2 x) const;

  GridFieldBundle bundle_;
};

std::shared_ptr<const BundleField> field_from_bundle(GridFieldBundle bundle);

}  // namespace flowseek
