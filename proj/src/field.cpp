#include "flowseek/field.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "flowseek/errors.hpp"

namespace flowseek {

SpectralTruth Field::analytic_spectra(Vec2 /*x*/) const {
  throw Error("field has no closed-form spectra");
}

double radial_field_eval(const RadialFieldParams& params, Vec2 x, double t) {
  const double r = norm(x);
  return 2.0 * std::exp(-r / params.ell) * std::cos(r - t);
}

SpectralTruth radial_spectral_truth(const RadialFieldParams& params, Vec2 x) {
  const double r = norm(x);
  if (r == 0.0) throw SingularityError("radial field: phase gradient undefined at the origin");
  return {std::exp(-r / params.ell), wrap_to_2pi(-r), -x / r};
}

RadialField::RadialField(RadialFieldParams params) : params_(params) {
  if (!(params_.ell > 0.0) || !std::isfinite(params_.ell)) {
    throw ConfigError("radial field: ell must be positive");
  }
}

TravelingWaveField::TravelingWaveField(std::vector<TravelingWaveMode> modes, Vec2 base_point)
    : modes_(std::move(modes)), base_(base_point) {
  if (modes_.empty()) throw ConfigError("traveling-wave field needs at least one mode");
  for (const auto& mode : modes_) {
    if (!(mode.omega > 0.0)) throw ConfigError("traveling-wave mode frequency must be positive");
  }
  fundamental_ = std::min_element(modes_.begin(), modes_.end(), [](const auto& a, const auto& b) {
                   return a.omega < b.omega;
                 })->omega;
  for (const auto& mode : modes_) {
    const double ratio = mode.omega / fundamental_;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
      throw ConfigError("traveling-wave frequencies must be integer multiples of the lowest one");
    }
  }
  period_ = kTwoPi / fundamental_;
}

double TravelingWaveField::eval(Vec2 x, double t) const {
  const Vec2 d = x - base_;
  double f = 0.0;
  for (const auto& mode : modes_) {
    const double arg = dot(mode.k_vec, d) - mode.omega * t;
    f += mode.alpha * std::cos(arg) + mode.beta * std::sin(arg);
  }
  return f;
}

SpectralTruth TravelingWaveField::analytic_spectra(Vec2 x) const {
  // Only modes at the fundamental contribute to the first DFT bin:
  //   c(x) = Σ (α + iβ)/2 · exp(−i k·(x − x_s)),  ∇φ = Im(∇c / c).
  const Vec2 d = x - base_;
  std::complex<double> c{};
  std::complex<double> dcx{};
  std::complex<double> dcy{};
  for (const auto& mode : modes_) {
    if (std::abs(mode.omega - fundamental_) > 1e-9 * fundamental_) continue;
    const std::complex<double> term =
        0.5 * std::complex<double>(mode.alpha, mode.beta) *
        std::polar(1.0, -dot(mode.k_vec, d));
    c += term;
    dcx += std::complex<double>(0.0, -mode.k_vec.x) * term;
    dcy += std::complex<double>(0.0, -mode.k_vec.y) * term;
  }
  const double m = std::abs(c);
  if (m == 0.0) return {0.0, 0.0, {}};
  return {m, wrap_to_2pi(std::arg(c)), {(dcx / c).imag(), (dcy / c).imag()}};
}

std::shared_ptr<const TravelingWaveField> synth_traveling_field(
    std::vector<TravelingWaveMode> modes, Vec2 base_point) {
  return std::make_shared<const TravelingWaveField>(std::move(modes), base_point);
}

double alignment_error(Vec2 x, Vec2 grad_phi, Vec2 source) {
  const Vec2 to_source = source - x;
  const double dist = norm(to_source);
  const double g = norm(grad_phi);
  if (dist == 0.0) throw SingularityError("alignment error: point coincides with the source");
  if (g == 0.0) throw SingularityError("alignment error: zero phase gradient");
  const Vec2 c1 = to_source / dist;
  const Vec2 unit = grad_phi / g;
  return wrap_to_pi(std::atan2(cross(c1, unit), dot(c1, unit)));
}

}  // namespace flowseek
