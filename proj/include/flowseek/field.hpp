#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "flowseek/vec2.hpp"

namespace flowseek {

// First-mode spectral quantities of a signal field at a point.
struct SpectralTruth {
  double m = 0.0;    // magnitude, >= 0
  double phi = 0.0;  // phase in [0, 2π)
  Vec2 grad_phi;     // phase gradient
};

// A time-periodic scalar signal field f(x, t) = f(x, t − T).
//
// Implementations are immutable after construction and safe to evaluate
// concurrently.
class Field {
 public:
  virtual ~Field() = default;

  virtual double eval(Vec2 x, double t) const = 0;
  virtual double period() const = 0;

  // False where the field has no data (gridded fields). eval() returns 0
  // there.
  virtual bool contains(Vec2 /*x*/) const { return true; }

  virtual bool has_analytic_spectra() const { return false; }
  // First-mode spectra in closed form. Only valid when
  // has_analytic_spectra() is true.
  virtual SpectralTruth analytic_spectra(Vec2 x) const;

  // Decay length ℓ when this is the radially-symmetric field centered at the
  // origin; used to monitor the integral of motion along trajectories.
  virtual std::optional<double> radial_decay_length() const { return std::nullopt; }
};

struct RadialFieldParams {
  double ell = 6.5;
};

// f(r, t) = 2 exp(−r/ℓ) cos(r − t), nondimensional, period 2π.
double radial_field_eval(const RadialFieldParams& params, Vec2 x, double t);

// m = exp(−r/ℓ), φ = −r mod 2π, ∇φ = −x/‖x‖. Throws SingularityError at the
// origin.
SpectralTruth radial_spectral_truth(const RadialFieldParams& params, Vec2 x);

class RadialField final : public Field {
 public:
  explicit RadialField(RadialFieldParams params);

  double eval(Vec2 x, double t) const override { return radial_field_eval(params_, x, t); }
  double period() const override { return kTwoPi; }
  bool has_analytic_spectra() const override { return true; }
  SpectralTruth analytic_spectra(Vec2 x) const override {
    return radial_spectral_truth(params_, x);
  }
  std::optional<double> radial_decay_length() const override { return params_.ell; }

  const RadialFieldParams& params() const { return params_; }

 private:
  RadialFieldParams params_;
};

// One term of the local traveling-wave expansion
//   α cos(k·(x − x_s) − ω t) + β sin(k·(x − x_s) − ω t).
struct TravelingWaveMode {
  double alpha = 1.0;
  double beta = 0.0;
  double omega = 1.0;
  Vec2 k_vec;
};

// Sum of traveling waves with constant coefficients around base_point. The
// period is set by the smallest frequency, which every other frequency must
// be an integer multiple of.
class TravelingWaveField final : public Field {
 public:
  TravelingWaveField(std::vector<TravelingWaveMode> modes, Vec2 base_point);

  double eval(Vec2 x, double t) const override;
  double period() const override { return period_; }
  bool has_analytic_spectra() const override { return true; }
  SpectralTruth analytic_spectra(Vec2 x) const override;

  const std::vector<TravelingWaveMode>& modes() const { return modes_; }
  double fundamental() const { return fundamental_; }

 private:
  std::vector<TravelingWaveMode> modes_;
  Vec2 base_;
  double fundamental_ = 1.0;
  double period_ = kTwoPi;
};

std::shared_ptr<const TravelingWaveField> synth_traveling_field(
    std::vector<TravelingWaveMode> modes, Vec2 base_point);

// Signed angle δ ∈ (−π, π] from c₁ = (source − x)/‖source − x‖ to the
// normalized phase gradient ĝ, so that ĝ = cos δ c₁ + sin δ c₂ where c₂ is
// c₁ rotated by +π/2. Throws SingularityError for a zero gradient or
// x == source.
double alignment_error(Vec2 x, Vec2 grad_phi, Vec2 source = {});

}  // namespace flowseek
