#include "flowseek/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "flowseek/errors.hpp"
#include "flowseek/lambert_w.hpp"

namespace flowseek {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTurningPointTolerance = 1e-12;
constexpr double kIndeterminateBand = 1e-9;

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string(what) + " must be positive and finite");
  }
}

// log h(r); finite where h underflows.
double log_envelope(GainKind kind, double r, double rho, double ell) {
  const double base = std::log(r / rho);
  switch (kind) {
    case GainKind::Static:
      return base - r / rho;
    case GainKind::Proportional:
      return base + (ell / rho) * std::exp(-r / ell);
    case GainKind::Inverse:
      return base - (ell / rho) * std::exp(r / ell);
  }
  return base;
}

bool near_bifurcation(double rho, double ell) {
  return std::abs(ell - rho * std::numbers::e) < kBifurcationWindow;
}

// Root of g on [lo, hi] where g(lo) and g(hi) differ in sign.
template <typename F>
double bisect(F&& g, double lo, double hi) {
  double glo = g(lo);
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double gmid = g(mid);
    if (gmid == 0.0) return mid;
    if ((gmid < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Solves h(r) = |q| between lo and hi, where h is monotone. `hi` may be ∞, in
// which case the bracket is grown geometrically.
double envelope_root(GainKind kind, double q_abs, double rho, double ell, double lo,
                     double hi) {
  const double target = std::log(q_abs);
  auto g = [&](double r) { return log_envelope(kind, r, rho, ell) - target; };
  if (lo <= 0.0) {
    // log h → −∞ as r → 0 for every gain law.
    lo = std::isinf(hi) ? 1e-3 : hi * 1e-3;
    while (g(lo) >= 0.0) {
      lo *= 1e-3;
      if (lo < 1e-300) throw DomainError("radial bound search did not bracket a root");
    }
  }
  if (std::isinf(hi)) {
    hi = std::max(2.0 * lo, 1.0);
    const double glo = g(lo);
    while ((g(hi) < 0.0) == (glo < 0.0)) {
      hi *= 2.0;
      if (hi > 1e12) throw DomainError("radial bound search did not bracket a root");
    }
  }
  return bisect(g, lo, hi);
}

// Lambert-W parameter that defines a non-static fixed point.
double defining_w(GainKind kind, const FixedPoint& fp, double rho, double ell) {
  if (kind == GainKind::Inverse) return lambert_w(LambertBranch::W0, rho / ell);
  if (near_bifurcation(rho, ell)) return -1.0;
  const auto branch = fp.r_star < ell ? LambertBranch::W0 : LambertBranch::Wm1;
  return lambert_w(branch, -rho / ell);
}

}  // namespace

std::string_view to_string(GainKind kind) {
  switch (kind) {
    case GainKind::Static:
      return "static";
    case GainKind::Proportional:
      return "proportional";
    case GainKind::Inverse:
      return "inverse";
  }
  return "unknown";
}

GainKind parse_gain_kind(std::string_view name) {
  if (name == "static") return GainKind::Static;
  if (name == "proportional") return GainKind::Proportional;
  if (name == "inverse") return GainKind::Inverse;
  throw ConfigError("unknown gain kind '" + std::string(name) + "'");
}

std::string_view to_string(FixedPointKind kind) {
  switch (kind) {
    case FixedPointKind::Center:
      return "center";
    case FixedPointKind::Saddle:
      return "saddle";
    case FixedPointKind::Degenerate:
      return "degenerate";
  }
  return "unknown";
}

std::string_view to_string(RadialBounds::Kind kind) {
  switch (kind) {
    case RadialBounds::Kind::Bounded:
      return "bounded";
    case RadialBounds::Kind::Unbounded:
      return "unbounded";
    case RadialBounds::Kind::Conditional:
      return "conditional";
  }
  return "unknown";
}

std::string_view to_string(Convergence c) {
  switch (c) {
    case Convergence::Unconditional:
      return "unconditional";
    case Convergence::ConditionalBounded:
      return "conditional_bounded";
    case Convergence::ConditionalUnbounded:
      return "conditional_unbounded";
    case Convergence::Divergent:
      return "divergent";
    case Convergence::Indeterminate:
      return "indeterminate";
  }
  return "unknown";
}

double radial_gain(GainKind kind, double r, double rho, double ell, double speed) {
  const double g0 = speed / rho;
  switch (kind) {
    case GainKind::Static:
      return g0;
    case GainKind::Proportional:
      return g0 * std::exp(-r / ell);
    case GainKind::Inverse:
      return g0 * std::exp(r / ell);
  }
  return g0;
}

std::array<double, 2> reduced_vector_field(GainKind kind, double r, double psi, double rho,
                                           double ell, double speed) {
  return {-speed * std::cos(psi),
          (speed / r - radial_gain(kind, r, rho, ell, speed)) * std::sin(psi)};
}

double orbit_envelope(GainKind kind, double r, double rho, double ell) {
  return std::exp(log_envelope(kind, r, rho, ell));
}

double conserved_quantity(GainKind kind, double r, double psi, double rho, double ell) {
  if (!(r > 0.0)) throw DomainError("conserved quantity: r must be positive");
  return orbit_envelope(kind, r, rho, ell) * std::sin(psi);
}

double radial_velocity(GainKind kind, double r, double q, double rho, double ell,
                       double speed) {
  if (!(r > 0.0)) throw DomainError("radial velocity: r must be positive");
  if (q == 0.0) return speed;
  const double ratio = q / orbit_envelope(kind, r, rho, ell);
  const double radicand = 1.0 - ratio * ratio;
  if (std::abs(radicand) <= kTurningPointTolerance) return 0.0;
  if (radicand < 0.0) {
    throw DomainError("radial velocity: r = " + std::to_string(r) +
                      " lies outside the annulus allowed by Q");
  }
  return speed * std::sqrt(radicand);
}

std::vector<FixedPoint> fixed_points(GainKind kind, double rho, double ell, double speed) {
  require_positive(rho, "rho");
  require_positive(ell, "ell");
  require_positive(speed, "speed");

  struct Radius {
    double r;
    FixedPointKind hint;
  };
  std::vector<Radius> radii;
  switch (kind) {
    case GainKind::Static:
      radii.push_back({rho, FixedPointKind::Center});
      break;
    case GainKind::Proportional:
      if (near_bifurcation(rho, ell)) {
        radii.push_back({ell, FixedPointKind::Degenerate});
      } else if (-rho / ell >= -1.0 / std::numbers::e) {
        radii.push_back({-ell * lambert_w(LambertBranch::W0, -rho / ell), FixedPointKind::Center});
        radii.push_back({-ell * lambert_w(LambertBranch::Wm1, -rho / ell), FixedPointKind::Saddle});
      }
      break;
    case GainKind::Inverse:
      radii.push_back({ell * lambert_w(LambertBranch::W0, rho / ell), FixedPointKind::Center});
      break;
  }

  std::vector<FixedPoint> out;
  for (const auto& [r, hint] : radii) {
    for (double psi : {-kHalfPi, kHalfPi}) {
      FixedPoint fp{r, psi, hint, {}};
      fp.eigenvalues = jacobian_eigenvalues(kind, fp, rho, ell, speed);
      if (hint != FixedPointKind::Degenerate) {
        const auto& lam = fp.eigenvalues[1];
        fp.kind = std::abs(lam.real()) > std::abs(lam.imag()) ? FixedPointKind::Saddle
                                                                : FixedPointKind::Center;
      }
      out.push_back(fp);
    }
  }
  return out;
}

std::array<std::complex<double>, 2> jacobian_eigenvalues(GainKind kind, const FixedPoint& fp,
                                                         double rho, double ell,
                                                         double speed) {
  auto field = [&](double r, double psi) {
    return reduced_vector_field(kind, r, psi, rho, ell, speed);
  };
  // Central differences with one Richardson extrapolation step: O(h⁴).
  auto derivative = [&](int var) {
    const double h = 1e-3 * (var == 0 ? std::max(fp.r_star, 1e-3) : 1.0);
    auto central = [&](double step) {
      const double dr = var == 0 ? step : 0.0;
      const double dpsi = var == 1 ? step : 0.0;
      const auto plus = field(fp.r_star + dr, fp.psi_star + dpsi);
      const auto minus = field(fp.r_star - dr, fp.psi_star - dpsi);
      return std::array<double, 2>{(plus[0] - minus[0]) / (2.0 * step),
                                   (plus[1] - minus[1]) / (2.0 * step)};
    };
    const auto coarse = central(h);
    const auto fine = central(0.5 * h);
    return std::array<double, 2>{(4.0 * fine[0] - coarse[0]) / 3.0,
                                 (4.0 * fine[1] - coarse[1]) / 3.0};
  };
  const auto d_dr = derivative(0);
  const auto d_dpsi = derivative(1);
  const double a = d_dr[0], b = d_dpsi[0];
  const double c = d_dr[1], d = d_dpsi[1];

  const double half_trace = 0.5 * (a + d);
  const double det = a * d - b * c;
  const double disc = half_trace * half_trace - det;
  std::array<std::complex<double>, 2> eig;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    eig = {std::complex<double>(half_trace - s, 0.0), std::complex<double>(half_trace + s, 0.0)};
  } else {
    const double s = std::sqrt(-disc);
    eig = {std::complex<double>(half_trace, -s), std::complex<double>(half_trace, s)};
  }
  return eig;
}

double closed_form_eigenvalue_magnitude(GainKind kind, const FixedPoint& fp, double rho,
                                        double ell, double speed) {
  if (kind == GainKind::Static) return speed / rho;
  const double w = defining_w(kind, fp, rho, ell);
  return (speed / ell) * std::sqrt(std::abs((1.0 / w) * (1.0 / w + 1.0)));
}

bool closed_form_is_saddle(GainKind kind, const FixedPoint& fp, double rho, double ell) {
  if (kind == GainKind::Static) return false;
  const double w = defining_w(kind, fp, rho, ell);
  return (1.0 / w) * (1.0 / w + 1.0) < 0.0;
}

RadialBounds radial_bounds(GainKind kind, double q, double rho, double ell) {
  require_positive(rho, "rho");
  if (kind != GainKind::Static) require_positive(ell, "ell");
  const double qa = std::abs(q);
  if (qa == 0.0) return {RadialBounds::Kind::Unbounded, 0.0, kInf, 0.0};

  switch (kind) {
    case GainKind::Static: {
      if (qa > 1.0 / std::numbers::e) {
        throw DomainError("static gain: |Q| exceeds its maximum 1/e");
      }
      return {RadialBounds::Kind::Bounded, -rho * lambert_w(LambertBranch::W0, -qa),
              -rho * lambert_w(LambertBranch::Wm1, -qa), 0.0};
    }
    case GainKind::Inverse: {
      const double r_star = ell * lambert_w(LambertBranch::W0, rho / ell);
      const double q_max = orbit_envelope(kind, r_star, rho, ell);
      if (qa > q_max * (1.0 + 1e-12)) {
        throw DomainError("inverse gain: |Q| exceeds its maximum " + std::to_string(q_max));
      }
      if (qa >= q_max) return {RadialBounds::Kind::Bounded, r_star, r_star, 0.0};
      return {RadialBounds::Kind::Bounded, envelope_root(kind, qa, rho, ell, 0.0, r_star),
              envelope_root(kind, qa, rho, ell, r_star, kInf), 0.0};
    }
    case GainKind::Proportional: {
      if (near_bifurcation(rho, ell) || -rho / ell < -1.0 / std::numbers::e) {
        // h(r) is monotone: one closest approach, then off to infinity.
        return {RadialBounds::Kind::Unbounded, envelope_root(kind, qa, rho, ell, 0.0, kInf),
                kInf, 0.0};
      }
      const double r_center = -ell * lambert_w(LambertBranch::W0, -rho / ell);
      const double r_saddle = -ell * lambert_w(LambertBranch::Wm1, -rho / ell);
      const double q_cr = orbit_envelope(kind, r_saddle, rho, ell);
      const double q_top = orbit_envelope(kind, r_center, rho, ell);
      if (qa <= q_cr) {
        return {RadialBounds::Kind::Unbounded,
                envelope_root(kind, qa, rho, ell, 0.0, r_center), kInf, 0.0};
      }
      if (qa > q_top) {
        return {RadialBounds::Kind::Unbounded,
                envelope_root(kind, qa, rho, ell, r_saddle, kInf), kInf, 0.0};
      }
      return {RadialBounds::Kind::Conditional, envelope_root(kind, qa, rho, ell, 0.0, r_center),
              envelope_root(kind, qa, rho, ell, r_center, r_saddle),
              envelope_root(kind, qa, rho, ell, r_saddle, kInf)};
    }
  }
  return {};
}

double critical_q(double rho, double ell) {
  require_positive(rho, "rho");
  require_positive(ell, "ell");
  double w = -1.0;
  if (!near_bifurcation(rho, ell)) {
    if (-rho / ell < -1.0 / std::numbers::e) {
      throw DomainError("critical Q: no saddle for ell < rho*e");
    }
    w = lambert_w(LambertBranch::Wm1, -rho / ell);
  }
  return (ell / rho) * std::abs(w) * std::exp(-1.0 / w);
}

BifurcationScan bifurcation_scan(double rho, double ell_min, double ell_max, double step,
                                 double tolerance) {
  require_positive(rho, "rho");
  require_positive(ell_min, "ell_min");
  require_positive(step, "step");
  if (!(ell_max > ell_min)) throw DomainError("bifurcation scan: empty range");

  auto count = [&](double ell) {
    return static_cast<int>(fixed_points(GainKind::Proportional, rho, ell, 1.0).size());
  };
  BifurcationScan scan;
  const auto n = static_cast<long>(std::floor((ell_max - ell_min) / step + 1e-9));
  for (long i = 0; i <= n; ++i) {
    const double ell = ell_min + i * step;
    scan.samples.emplace_back(ell, count(ell));
  }
  if (scan.samples.back().first < ell_max) scan.samples.emplace_back(ell_max, count(ell_max));

  for (std::size_t i = 1; i < scan.samples.size(); ++i) {
    const auto [lo_ell, lo_count] = scan.samples[i - 1];
    const auto [hi_ell, hi_count] = scan.samples[i];
    if ((lo_count > 0) == (hi_count > 0)) continue;
    double lo = lo_ell, hi = hi_ell;
    const bool lo_has = lo_count > 0;
    while (hi - lo > tolerance) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if ((count(mid) > 0) == lo_has) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    scan.ell_critical = 0.5 * (lo + hi);
    return scan;
  }
  throw NoTransitionError("bifurcation scan: fixed-point count constant on [" +
                          std::to_string(ell_min) + ", " + std::to_string(ell_max) + "]");
}

std::string_view regime_label(GainKind kind, double rho, double ell) {
  if (kind != GainKind::Proportional) return "unconditional";
  if (near_bifurcation(rho, ell) || ell < rho * std::numbers::e) return "divergent";
  return "conditional";
}

Convergence classify_convergence(GainKind kind, double rho, double ell, PolarInit init) {
  if (!(init.r > 0.0)) throw DomainError("classify_convergence: r must be positive");
  if (kind != GainKind::Proportional) return Convergence::Unconditional;
  if (near_bifurcation(rho, ell) || ell < rho * std::numbers::e) return Convergence::Divergent;

  const double q_cr = critical_q(rho, ell);
  const double q = std::abs(conserved_quantity(kind, init.r, init.psi, rho, ell));
  if (std::abs(q - q_cr) <= kIndeterminateBand) return Convergence::Indeterminate;
  const double r_saddle = -ell * lambert_w(LambertBranch::Wm1, -rho / ell);
  if (q > q_cr && init.r < r_saddle) return Convergence::ConditionalBounded;
  return Convergence::ConditionalUnbounded;
}

PortraitReport portrait(GainKind kind, double rho, double ell, const PortraitGrid& grid,
                        double speed) {
  if (!(grid.u_max > grid.u_min) || !(grid.v_max > grid.v_min) || grid.nu < 2 || grid.nv < 2) {
    throw ConfigError("portrait grid needs positive extents and at least 2x2 nodes");
  }
  PortraitReport report;
  report.kind = kind;
  report.rho = rho;
  report.ell = ell;
  report.speed = speed;
  report.grid = grid;
  report.fixed_points = fixed_points(kind, rho, ell, speed);
  report.classification = std::string(regime_label(kind, rho, ell));

  const double du = (grid.u_max - grid.u_min) / (grid.nu - 1);
  const double dv = (grid.v_max - grid.v_min) / (grid.nv - 1);
  report.q_grid.reserve(static_cast<std::size_t>(grid.nu) * grid.nv);
  for (int j = 0; j < grid.nv; ++j) {
    const double v = grid.v_min + j * dv;
    for (int i = 0; i < grid.nu; ++i) {
      const double u = grid.u_min + i * du;
      const double r = std::hypot(u, v);
      report.q_grid.push_back(r == 0.0 ? 0.0
                                       : conserved_quantity(kind, r, std::atan2(v, u), rho, ell));
    }
  }

  if (kind == GainKind::Proportional && !near_bifurcation(rho, ell) &&
      ell > rho * std::numbers::e) {
    report.has_critical_q = true;
    report.critical_q = critical_q(rho, ell);
    const double r_center = -ell * lambert_w(LambertBranch::W0, -rho / ell);
    const double r_saddle = -ell * lambert_w(LambertBranch::Wm1, -rho / ell);
    const double r_left = envelope_root(kind, report.critical_q, rho, ell, 0.0, r_center);
    // Upper loop: ψ = asin(Q_cr/h) outbound, π − asin(Q_cr/h) back; the lower
    // loop is its mirror image (Q = −Q_cr).
    constexpr int kPoints = 200;
    std::vector<std::array<double, 2>> upper;
    for (int pass = 0; pass < 2; ++pass) {
      for (int k = 0; k <= kPoints; ++k) {
        const double s = 0.5 * (1.0 - std::cos(std::numbers::pi * k / kPoints));
        const double r = pass == 0 ? r_left + s * (r_saddle - r_left)
                                   : r_saddle - s * (r_saddle - r_left);
        const double ratio =
            std::min(1.0, report.critical_q / orbit_envelope(kind, r, rho, ell));
        const double base = std::asin(ratio);
        const double psi = pass == 0 ? base : std::numbers::pi - base;
        upper.push_back({r * std::cos(psi), r * std::sin(psi)});
      }
    }
    report.separatrix = upper;
    for (const auto& p : upper) report.separatrix.push_back({p[0], -p[1]});
  }
  return report;
}

}  // namespace flowseek
