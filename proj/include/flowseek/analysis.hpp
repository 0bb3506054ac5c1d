#pragma once

#include <array>
#include <complex>
#include <string_view>
#include <vector>

namespace flowseek {

enum class GainKind { Static, Proportional, Inverse };

std::string_view to_string(GainKind kind);
GainKind parse_gain_kind(std::string_view name);  // throws ConfigError

// Closed-loop dynamics of the sensor in the radially-symmetric field,
// reduced to the (r, ψ) plane:
//   ṙ = −V cos ψ,   ψ̇ = (V/r − G(r)) sin ψ,
// with G = V/ρ · {1, e^(−r/ℓ), e^(r/ℓ)} for static, proportional and inverse
// gain. Every routine below is a pure function of these parameters.

// Gain G(r) in the radial field, base gain G₀ = V/ρ.
double radial_gain(GainKind kind, double r, double rho, double ell, double speed);

// Right-hand side of the reduced (r, ψ) system.
std::array<double, 2> reduced_vector_field(GainKind kind, double r, double psi, double rho,
                                           double ell, double speed);

// h(r) = (r/ρ)·exp(−∫G/V dr), so that Q = h(r)·sin ψ.
double orbit_envelope(GainKind kind, double r, double rho, double ell);

// Integral of motion Q(r, ψ). Throws DomainError for r <= 0.
double conserved_quantity(GainKind kind, double r, double psi, double rho, double ell);

// |ṙ| = V sqrt(1 − Q²/h(r)²). A radicand in [−1e−12, 0) is a turning point and
// returns 0; anything below that throws DomainError (r outside the annulus).
double radial_velocity(GainKind kind, double r, double q, double rho, double ell,
                       double speed);

enum class FixedPointKind { Center, Saddle, Degenerate };

std::string_view to_string(FixedPointKind kind);

struct FixedPoint {
  double r_star = 0.0;
  double psi_star = 0.0;  // ±π/2
  FixedPointKind kind = FixedPointKind::Center;
  std::array<std::complex<double>, 2> eigenvalues{};  // numerical Jacobian
};

// Relative width of the saddle-node window |ℓ − ρe| inside which the
// proportional-gain fixed points are reported as one degenerate pair.
inline constexpr double kBifurcationWindow = 1e-9;

// Fixed points ordered by r then ψ (−π/2 before +π/2), eigenvalues attached.
std::vector<FixedPoint> fixed_points(GainKind kind, double rho, double ell, double speed);

// Eigenvalues of the numerically differentiated 2×2 Jacobian at the fixed
// point (central differences with one Richardson step), sorted by imaginary
// part then real part.
std::array<std::complex<double>, 2> jacobian_eigenvalues(GainKind kind, const FixedPoint& fp,
                                                         double rho, double ell, double speed);

// |λ| from the Lambert-W closed forms: V/ρ for static gain,
// (V/ℓ)·sqrt|(1/W)(1/W + 1)| for the others with W the branch value defining
// the fixed point.
double closed_form_eigenvalue_magnitude(GainKind kind, const FixedPoint& fp, double rho,
                                        double ell, double speed);

// True when the closed form predicts a real (saddle) pair.
bool closed_form_is_saddle(GainKind kind, const FixedPoint& fp, double rho, double ell);

struct RadialBounds {
  enum class Kind { Bounded, Unbounded, Conditional };
  Kind kind = Kind::Bounded;
  // Bounded: the annulus. Conditional: the inner lobe enclosed by the
  // homoclinic loop. Unbounded: r_min is the closest approach, r_max = ∞.
  double r_min = 0.0;
  double r_max = 0.0;
  // Conditional only: start of the outer (unbounded) branch.
  double r_outer = 0.0;
};

std::string_view to_string(RadialBounds::Kind kind);

// Radial excursion permitted by a given Q. Throws DomainError when |Q| exceeds
// the maximum of h(r) for static and inverse gain.
RadialBounds radial_bounds(GainKind kind, double q, double rho, double ell);

// |Q_cr| = (ℓ/ρ)·|W₋₁(−ρ/ℓ)|·exp(−1/W₋₁(−ρ/ℓ)), the value of |Q| on the
// proportional-gain separatrix. Throws DomainError when ℓ < ρe (no saddle).
double critical_q(double rho, double ell);

struct BifurcationScan {
  std::vector<std::pair<double, int>> samples;  // (ℓ, number of fixed points)
  double ell_critical = 0.0;
};

// Scans ℓ over [ell_min, ell_max] for the proportional-gain fixed-point count
// change and refines the crossing by bisection to `tolerance`. Throws
// NoTransitionError if the count never changes.
BifurcationScan bifurcation_scan(double rho, double ell_min, double ell_max, double step,
                                 double tolerance = 1e-10);

enum class Convergence {
  Unconditional,
  ConditionalBounded,
  ConditionalUnbounded,
  Divergent,
  Indeterminate,  // |Q| within 1e−9 of |Q_cr|
};

std::string_view to_string(Convergence c);

// Regime-level label: Unconditional, Conditional or Divergent.
std::string_view regime_label(GainKind kind, double rho, double ell);

struct PolarInit {
  double r = 1.0;
  double psi = 0.0;
};

Convergence classify_convergence(GainKind kind, double rho, double ell, PolarInit init);

struct PortraitGrid {
  double u_min = -15.0, u_max = 15.0;  // r cos ψ
  double v_min = -15.0, v_max = 15.0;  // r sin ψ
  int nu = 121, nv = 121;
};

struct PortraitReport {
  GainKind kind = GainKind::Static;
  double rho = 0.0;
  double ell = 0.0;
  double speed = 1.0;
  std::vector<FixedPoint> fixed_points;
  bool has_critical_q = false;
  double critical_q = 0.0;
  std::string classification;
  std::string relative_equilibria = "sin(psi) = 0: psi = 0 (head-on, rdot = -V) and psi = pi";
  PortraitGrid grid;
  std::vector<double> q_grid;  // nv rows of nu values, u fastest
  // Points (r cos ψ, r sin ψ) on the |Q| = |Q_cr| homoclinic loop; empty
  // unless has_critical_q.
  std::vector<std::array<double, 2>> separatrix;
};

// Throws ConfigError for non-positive extents or grid sizes < 2.
PortraitReport portrait(GainKind kind, double rho, double ell, const PortraitGrid& grid,
                        double speed = 1.0);

}  // namespace flowseek
