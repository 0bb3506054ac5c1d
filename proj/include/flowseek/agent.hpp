#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flowseek/analysis.hpp"
#include "flowseek/field.hpp"
#include "flowseek/sensing.hpp"
#include "flowseek/vec2.hpp"

namespace flowseek {

struct GainLaw {
  GainKind kind = GainKind::Static;
  double g0 = 0.5;
  double m_floor = 1e-6;  // inverse-gain clamp

  // Gain length scale ρ = V/G₀.
  double rho(double speed) const { return speed / g0; }
  void validate() const;  // throws ConfigError
};

struct GainValue {
  double G = 0.0;
  bool saturated = false;
};

GainValue gain_value(const GainLaw& law, double m);

inline double heading_rate(double gain, double s) { return gain * s; }

// Heading θ is kept unwrapped so Ω integrates smoothly; wrap on output.
struct AgentState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double t = 0.0;

  Vec2 position() const { return {x, y}; }
};

struct PolarState {
  double r = 1.0;
  double eta = 0.0;
  double psi = 0.0;
};

// r, η = atan2(y, x), ψ = π − (θ − η) wrapped to (−π, π]. Throws
// SingularityError at the origin.
PolarState to_polar(const AgentState& state);

// Inverse of to_polar for a sensor at (r, η) with bearing ψ.
AgentState from_polar(const PolarState& polar, double t = 0.0);

// One RK4 step of ẋ = V cos θ, ẏ = V sin θ, θ̇ = G·s with the sensor re-read at
// every stage. Sensing errors propagate.
AgentState step(const AgentState& state, const Field& field, const GainLaw& law,
                const SensingConfig& cfg, double speed, double dt);

enum class Termination { TimeLimit, ReachedSource, Escaped, LeftDomain, SensingFailure };

std::string_view to_string(Termination t);

struct SimulationOptions {
  double speed = 1.0;
  double dt = 1e-3;
  double t_end = 100.0;
  double r_stop = 0.05;
  // Defaults to 10·max(r₀, ρ, ℓ) (ℓ only for the radial field).
  std::optional<double> r_escape;
  Vec2 source;  // target used for r and the stop/escape tests
  int record_every = 1;

  void validate() const;  // throws ConfigError
};

struct TrajectorySample {
  double t = 0.0;
  AgentState state;
  SpectralSample sensed;
  double gain = 0.0;
  double omega = 0.0;
  double q = 0.0;  // NaN unless the field is radial
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double dt = 0.0;
  std::string integrator = "rk4";
  Termination reason = Termination::TimeLimit;
  std::string detail;
  double r_escape = 0.0;
  bool quasi_steady_violated = false;
  bool saturated = false;
};

// Integrates until t_end, r < r_stop, r > r_escape, the sensor leaves the
// field, or sensing fails; the last two are reported through `reason` and
// `detail` instead of thrown.
Trajectory simulate(const AgentState& init, const Field& field, const GainLaw& law,
                    const SensingConfig& cfg, const SimulationOptions& opts);

// Integral of motion for a cartesian state in the radial field.
double conserved_quantity_at(const AgentState& state, GainKind kind, double rho, double ell);

using PolarScalarField = std::function<double(double r, double eta)>;

struct PolarSample {
  double t = 0.0;
  PolarState state;
};

struct PolarTrajectory {
  std::vector<PolarSample> samples;
  bool hit_origin = false;
};

struct PolarOptions {
  double speed = 1.0;
  double dt = 1e-3;
  double t_end = 100.0;
  double r_min = 1e-6;  // singularity guard
  int record_every = 1;
};

// RK4 of  ṙ = −V cos ψ,  r η̇ = V sin ψ,
//         r ψ̇ = V sin ψ − r G (cos δ sin ψ + sin δ cos ψ),
// with δ and m supplied as functions of (r, η).
PolarTrajectory simulate_polar(const PolarState& init, const PolarScalarField& delta_field,
                               const GainLaw& law, const PolarScalarField& m_field,
                               const PolarOptions& opts);

}  // namespace flowseek
