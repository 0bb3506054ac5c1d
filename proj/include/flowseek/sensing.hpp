#pragma once

#include <complex>
#include <span>
#include <vector>

#include "flowseek/field.hpp"
#include "flowseek/vec2.hpp"

namespace flowseek {

enum class SpectralSource {
  Windowed,  // sample one period at each probe and take the first DFT bin
  Analytic,  // use Field::analytic_spectra (falls back to Windowed if absent)
};

struct SensingConfig {
  int n_samples = 64;
  double stencil_h = 0.01;
  // Below this magnitude the phase is noise and sensing refuses to answer.
  double m_floor = 1e-9;
  SpectralSource source = SpectralSource::Windowed;

  // Throws ConfigError on n_samples < 8, stencil_h <= 0 or > 0.1, m_floor <= 0.
  void validate() const;
};

// What the onboard sensor reports at one instant.
struct SpectralSample {
  double m = 0.0;
  double phi = 0.0;
  Vec2 grad_phi;
  double s = 0.0;          // lateral projection of ĝ on b₂(θ), in [−1, 1]
  bool saturated = false;  // set by the agent when the inverse gain clamps
};

// f(x, t0 + kT/N), k = 0..N−1.
std::vector<double> sample_window(const Field& field, Vec2 x, double t0, int n_samples);

// Single-bin DFT at ω₁ = 2π/T with cached twiddles. The kernel is referenced
// to absolute time, t_k = t0 + kT/N, so the phase of a periodic signal does not
// depend on when its window started.
class FirstModeDft {
 public:
  explicit FirstModeDft(int n_samples);

  int size() const { return static_cast<int>(twiddle_.size()); }
  std::complex<double> operator()(std::span<const double> series, double period,
                                  double t0 = 0.0) const;

 private:
  std::vector<std::complex<double>> twiddle_;  // exp(−2πik/N)
};

// (1/N) Σ series[k] exp(−i ω₁ t_k). Throws DomainError when N < 8.
std::complex<double> dft_first_mode(std::span<const double> series, double period,
                                    double t0 = 0.0);

struct MagnitudePhase {
  double m = 0.0;
  double phi = 0.0;  // [0, 2π); 0 when degenerate
  bool degenerate = false;
};

MagnitudePhase magnitude_phase(std::complex<double> c);

// Central differences of the wrapped phase over the 4-point cross stencil of
// half-width cfg.stencil_h. Throws DegenerateMagnitudeError when m < m_floor
// at any of the 5 probes and OutOfDomainError when a probe leaves the field.
Vec2 phase_gradient(const Field& field, Vec2 x, double t0, const SensingConfig& cfg);

// s = ĝ · b₂(θ) with b₂ = (−sin θ, cos θ). Throws SingularityError for a zero
// gradient.
double sensory_output(Vec2 grad_phi, double theta);

// Full measurement at the sensor position: magnitude and phase at x, the phase
// gradient and s. Honors cfg.source.
SpectralSample sense(const Field& field, Vec2 x, double theta, double t,
                     const SensingConfig& cfg);

}  // namespace flowseek
