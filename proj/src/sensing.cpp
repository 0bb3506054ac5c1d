#include "flowseek/sensing.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "flowseek/errors.hpp"

namespace flowseek {

namespace {

constexpr int kMinSamples = 8;

void require_in_domain(const Field& field, Vec2 x) {
  if (!field.contains(x)) {
    throw OutOfDomainError("probe at (" + std::to_string(x.x) + ", " + std::to_string(x.y) +
                           ") is outside the field");
  }
}

}  // namespace

void SensingConfig::validate() const {
  if (n_samples < kMinSamples) throw ConfigError("sensing: n_samples must be >= 8");
  if (!(stencil_h > 0.0) || stencil_h > 0.1) {
    throw ConfigError("sensing: stencil_h must be in (0, 0.1]");
  }
  if (!(m_floor > 0.0)) throw ConfigError("sensing: m_floor must be positive");
}

std::vector<double> sample_window(const Field& field, Vec2 x, double t0, int n_samples) {
  const double period = field.period();
  std::vector<double> series(static_cast<std::size_t>(n_samples));
  for (int k = 0; k < n_samples; ++k) {
    series[k] = field.eval(x, t0 + k * period / n_samples);
  }
  return series;
}

FirstModeDft::FirstModeDft(int n_samples) {
  if (n_samples < kMinSamples) throw DomainError("DFT window needs at least 8 samples");
  twiddle_.resize(static_cast<std::size_t>(n_samples));
  for (int k = 0; k < n_samples; ++k) {
    twiddle_[k] = std::polar(1.0, -kTwoPi * k / n_samples);
  }
}

std::complex<double> FirstModeDft::operator()(std::span<const double> series, double period,
                                              double t0) const {
  if (series.size() != twiddle_.size()) throw DomainError("DFT window length mismatch");
  std::complex<double> acc{};
  for (std::size_t k = 0; k < series.size(); ++k) acc += series[k] * twiddle_[k];
  acc /= static_cast<double>(series.size());
  if (t0 != 0.0) acc *= std::polar(1.0, -kTwoPi * t0 / period);
  return acc;
}

std::complex<double> dft_first_mode(std::span<const double> series, double period, double t0) {
  if (series.size() < kMinSamples) throw DomainError("DFT window needs at least 8 samples");
  return FirstModeDft(static_cast<int>(series.size()))(series, period, t0);
}

MagnitudePhase magnitude_phase(std::complex<double> c) {
  const double m = std::abs(c);
  if (m == 0.0) return {0.0, 0.0, true};
  return {m, wrap_to_2pi(std::arg(c)), false};
}

namespace {

struct Probe {
  double m;
  double phi;
};

Probe probe(const Field& field, const FirstModeDft& dft, Vec2 x, double t0, double m_floor) {
  require_in_domain(field, x);
  const auto series = sample_window(field, x, t0, dft.size());
  const auto mp = magnitude_phase(dft(series, field.period(), t0));
  if (mp.m < m_floor) {
    throw DegenerateMagnitudeError("spectral magnitude " + std::to_string(mp.m) +
                                   " below floor at (" + std::to_string(x.x) + ", " +
                                   std::to_string(x.y) + ")");
  }
  return {mp.m, mp.phi};
}

// Center probe plus the wrapped central-difference gradient.
std::pair<Probe, Vec2> windowed_measurement(const Field& field, Vec2 x, double t0,
                                            const SensingConfig& cfg) {
  const FirstModeDft dft(cfg.n_samples);
  const double h = cfg.stencil_h;
  const Probe center = probe(field, dft, x, t0, cfg.m_floor);
  const Probe east = probe(field, dft, x + Vec2{h, 0.0}, t0, cfg.m_floor);
  const Probe west = probe(field, dft, x - Vec2{h, 0.0}, t0, cfg.m_floor);
  const Probe north = probe(field, dft, x + Vec2{0.0, h}, t0, cfg.m_floor);
  const Probe south = probe(field, dft, x - Vec2{0.0, h}, t0, cfg.m_floor);
  const Vec2 grad{angle_diff(east.phi, west.phi) / (2.0 * h),
                  angle_diff(north.phi, south.phi) / (2.0 * h)};
  return {center, grad};
}

}  // namespace

Vec2 phase_gradient(const Field& field, Vec2 x, double t0, const SensingConfig& cfg) {
  return windowed_measurement(field, x, t0, cfg).second;
}

double sensory_output(Vec2 grad_phi, double theta) {
  const double g = norm(grad_phi);
  if (g == 0.0) throw SingularityError("sensory output: zero phase gradient");
  const double s = (-grad_phi.x * std::sin(theta) + grad_phi.y * std::cos(theta)) / g;
  return std::clamp(s, -1.0, 1.0);
}

SpectralSample sense(const Field& field, Vec2 x, double theta, double t,
                     const SensingConfig& cfg) {
  SpectralSample out;
  if (cfg.source == SpectralSource::Analytic && field.has_analytic_spectra()) {
    require_in_domain(field, x);
    const SpectralTruth truth = field.analytic_spectra(x);
    if (truth.m < cfg.m_floor) {
      throw DegenerateMagnitudeError("spectral magnitude below floor");
    }
    out.m = truth.m;
    out.phi = truth.phi;
    out.grad_phi = truth.grad_phi;
  } else {
    const auto [center, grad] = windowed_measurement(field, x, t, cfg);
    out.m = center.m;
    out.phi = center.phi;
    out.grad_phi = grad;
  }
  out.s = sensory_output(out.grad_phi, theta);
  return out;
}

}  // namespace flowseek
