#include "flowseek/agent.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "flowseek/errors.hpp"

namespace flowseek {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Rhs {
  std::array<double, 3> d{};  // ẋ, ẏ, θ̇
  SpectralSample sensed;
  double gain = 0.0;
};

Rhs evaluate(const AgentState& s, const Field& field, const GainLaw& law,
             const SensingConfig& cfg, double speed) {
  Rhs out;
  out.sensed = sense(field, s.position(), s.theta, s.t, cfg);
  const GainValue g = gain_value(law, out.sensed.m);
  out.sensed.saturated = g.saturated;
  out.gain = g.G;
  out.d = {speed * std::cos(s.theta), speed * std::sin(s.theta), heading_rate(g.G, out.sensed.s)};
  return out;
}

AgentState advance(const AgentState& s, const Rhs& k1, const Field& field, const GainLaw& law,
                   const SensingConfig& cfg, double speed, double dt) {
  auto shifted = [&](const std::array<double, 3>& k, double h) {
    return AgentState{s.x + h * k[0], s.y + h * k[1], s.theta + h * k[2], s.t + h};
  };
  const Rhs k2 = evaluate(shifted(k1.d, 0.5 * dt), field, law, cfg, speed);
  const Rhs k3 = evaluate(shifted(k2.d, 0.5 * dt), field, law, cfg, speed);
  const Rhs k4 = evaluate(shifted(k3.d, dt), field, law, cfg, speed);
  AgentState next = s;
  next.x += dt / 6.0 * (k1.d[0] + 2.0 * k2.d[0] + 2.0 * k3.d[0] + k4.d[0]);
  next.y += dt / 6.0 * (k1.d[1] + 2.0 * k2.d[1] + 2.0 * k3.d[1] + k4.d[1]);
  next.theta += dt / 6.0 * (k1.d[2] + 2.0 * k2.d[2] + 2.0 * k3.d[2] + k4.d[2]);
  next.t += dt;
  return next;
}

}  // namespace

void GainLaw::validate() const {
  if (!(g0 > 0.0) || !std::isfinite(g0)) throw ConfigError("gain: g0 must be positive");
  if (!(m_floor > 0.0)) throw ConfigError("gain: m_floor must be positive");
}

GainValue gain_value(const GainLaw& law, double m) {
  switch (law.kind) {
    case GainKind::Static:
      return {law.g0, false};
    case GainKind::Proportional:
      return {law.g0 * m, false};
    case GainKind::Inverse:
      if (m < law.m_floor) return {law.g0 / law.m_floor, true};
      return {law.g0 / m, false};
  }
  return {law.g0, false};
}

PolarState to_polar(const AgentState& state) {
  const double r = std::hypot(state.x, state.y);
  if (r == 0.0) throw SingularityError("to_polar: state at the origin");
  const double eta = std::atan2(state.y, state.x);
  return {r, eta, wrap_to_pi(kPi - (state.theta - eta))};
}

AgentState from_polar(const PolarState& polar, double t) {
  return {polar.r * std::cos(polar.eta), polar.r * std::sin(polar.eta),
          kPi - polar.psi + polar.eta, t};
}

AgentState step(const AgentState& state, const Field& field, const GainLaw& law,
                const SensingConfig& cfg, double speed, double dt) {
  if (!(dt > 0.0)) throw ConfigError("step: dt must be positive");
  const Rhs k1 = evaluate(state, field, law, cfg, speed);
  return advance(state, k1, field, law, cfg, speed, dt);
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::TimeLimit:
      return "t_end";
    case Termination::ReachedSource:
      return "reached_source";
    case Termination::Escaped:
      return "escaped";
    case Termination::LeftDomain:
      return "left_domain";
    case Termination::SensingFailure:
      return "sensing_failure";
  }
  return "unknown";
}

void SimulationOptions::validate() const {
  if (!(speed > 0.0)) throw ConfigError("simulation: speed must be positive");
  if (!(dt > 0.0)) throw ConfigError("simulation: dt must be positive");
  if (!(t_end > 0.0)) throw ConfigError("simulation: t_end must be positive");
  if (!(r_stop >= 0.0)) throw ConfigError("simulation: r_stop must be non-negative");
  if (r_escape && !(*r_escape > r_stop)) {
    throw ConfigError("simulation: r_escape must exceed r_stop");
  }
  if (record_every < 1) throw ConfigError("simulation: record_every must be >= 1");
}

double conserved_quantity_at(const AgentState& state, GainKind kind, double rho, double ell) {
  const PolarState p = to_polar(state);
  return conserved_quantity(kind, p.r, p.psi, rho, ell);
}

Trajectory simulate(const AgentState& init, const Field& field, const GainLaw& law,
                    const SensingConfig& cfg, const SimulationOptions& opts) {
  law.validate();
  cfg.validate();
  opts.validate();

  const double speed = opts.speed;
  const double rho = law.rho(speed);
  const auto ell = field.radial_decay_length();
  const bool track_q = ell.has_value() && opts.source == Vec2{};
  const double r0 = norm(init.position() - opts.source);

  Trajectory traj;
  traj.dt = opts.dt;
  traj.r_escape = opts.r_escape.value_or(10.0 * std::max({r0, rho, ell.value_or(0.0)}));

  const auto n_steps = static_cast<long>(std::llround(opts.t_end / opts.dt));
  AgentState state = init;
  const double t_start = init.t;

  auto record = [&](const Rhs* rhs) {
    TrajectorySample sample;
    sample.t = state.t;
    sample.state = state;
    if (rhs != nullptr) {
      sample.sensed = rhs->sensed;
      sample.gain = rhs->gain;
      sample.omega = rhs->d[2];
    } else {
      sample.sensed = {kNaN, kNaN, {kNaN, kNaN}, kNaN, false};
      sample.gain = kNaN;
      sample.omega = kNaN;
    }
    sample.q = kNaN;
    if (track_q && norm(state.position()) > 0.0) {
      sample.q = conserved_quantity_at(state, law.kind, rho, *ell);
    }
    traj.samples.push_back(sample);
  };

  for (long i = 0;; ++i) {
    state.t = t_start + i * opts.dt;
    Rhs k1;
    try {
      k1 = evaluate(state, field, law, cfg, speed);
    } catch (const OutOfDomainError& e) {
      record(nullptr);
      traj.reason = Termination::LeftDomain;
      traj.detail = e.what();
      return traj;
    } catch (const Error& e) {
      record(nullptr);
      traj.reason = Termination::SensingFailure;
      traj.detail = e.what();
      return traj;
    }
    traj.saturated = traj.saturated || k1.sensed.saturated;
    const double grad_norm = norm(k1.sensed.grad_phi);
    if (grad_norm > 0.0 && speed * field.period() > 0.1 * kTwoPi / grad_norm) {
      traj.quasi_steady_violated = true;
    }

    const double r = norm(state.position() - opts.source);
    const bool last = i >= n_steps || r < opts.r_stop || r > traj.r_escape;
    if (last || i % opts.record_every == 0) record(&k1);
    if (r < opts.r_stop) {
      traj.reason = Termination::ReachedSource;
      return traj;
    }
    if (r > traj.r_escape) {
      traj.reason = Termination::Escaped;
      return traj;
    }
    if (i >= n_steps) {
      traj.reason = Termination::TimeLimit;
      return traj;
    }

    try {
      state = advance(state, k1, field, law, cfg, speed, opts.dt);
    } catch (const OutOfDomainError& e) {
      traj.reason = Termination::LeftDomain;
      traj.detail = e.what();
      return traj;
    } catch (const Error& e) {
      traj.reason = Termination::SensingFailure;
      traj.detail = e.what();
      return traj;
    }
  }
}

PolarTrajectory simulate_polar(const PolarState& init, const PolarScalarField& delta_field,
                               const GainLaw& law, const PolarScalarField& m_field,
                               const PolarOptions& opts) {
  law.validate();
  if (!(opts.dt > 0.0) || !(opts.t_end > 0.0) || opts.record_every < 1) {
    throw ConfigError("simulate_polar: dt, t_end must be positive and record_every >= 1");
  }
  if (!(init.r > opts.r_min)) throw SingularityError("simulate_polar: initial r at the origin");

  const double v = opts.speed;
  using Vec3 = std::array<double, 3>;
  bool hit = false;
  auto rhs = [&](const Vec3& s) -> Vec3 {
    const double r = s[0], eta = s[1], psi = s[2];
    if (!(r > opts.r_min)) {
      hit = true;
      return {0.0, 0.0, 0.0};
    }
    const double delta = delta_field(r, eta);
    const double gain = gain_value(law, m_field(r, eta)).G;
    const double sp = std::sin(psi), cp = std::cos(psi);
    return {-v * cp, v * sp / r,
            v * sp / r - gain * (std::cos(delta) * sp + std::sin(delta) * cp)};
  };

  PolarTrajectory out;
  Vec3 s{init.r, init.eta, init.psi};
  const auto n_steps = static_cast<long>(std::llround(opts.t_end / opts.dt));
  const double h = opts.dt;
  for (long i = 0;; ++i) {
    if (i % opts.record_every == 0 || i == n_steps) {
      out.samples.push_back({i * h, {s[0], s[1], s[2]}});
    }
    if (i >= n_steps) break;
    const Vec3 k1 = rhs(s);
    auto add = [](const Vec3& a, const Vec3& k, double c) {
      return Vec3{a[0] + c * k[0], a[1] + c * k[1], a[2] + c * k[2]};
    };
    const Vec3 k2 = rhs(add(s, k1, 0.5 * h));
    const Vec3 k3 = rhs(add(s, k2, 0.5 * h));
    const Vec3 k4 = rhs(add(s, k3, h));
    if (hit) {
      out.hit_origin = true;
      break;
    }
    for (int c = 0; c < 3; ++c) s[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    if (!(s[0] > opts.r_min)) {
      out.samples.push_back({(i + 1) * h, {s[0], s[1], s[2]}});
      out.hit_origin = true;
      break;
    }
  }
  return out;
}

}  // namespace flowseek
