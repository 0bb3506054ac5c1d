#include "flowseek/lambert_w.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "flowseek/errors.hpp"

namespace flowseek {

namespace {

constexpr double kE = std::numbers::e;
constexpr double kBranchPoint = -1.0 / std::numbers::e;  // −1/e rounded to double
constexpr int kMaxIterations = 50;
constexpr double kResidualTolerance = 1e-12;

// Series in p = sqrt(2(ez + 1)) about the branch point; the sign of p selects
// the branch.
double branch_point_series(double z, double sign) {
  const double p = sign * std::sqrt(std::max(0.0, 2.0 * (kE * z + 1.0)));
  return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0)));
}

double asymptotic_guess(double l1) {
  const double l2 = std::log(std::abs(l1));
  return l1 - l2 + l2 / l1;
}

double initial_guess(LambertBranch branch, double z) {
  if (branch == LambertBranch::W0) {
    if (z < -0.25) return branch_point_series(z, 1.0);
    if (z < 0.25) return z * (1.0 + z * (-1.0 + z * (1.5 - z * 8.0 / 3.0)));
    if (z < kE) return std::log1p(z) * 0.75;
    return asymptotic_guess(std::log(z));
  }
  if (z < -0.25) return branch_point_series(z, -1.0);
  return asymptotic_guess(std::log(-z));
}

double halley(double z, double w) {
  for (int it = 0; it < kMaxIterations; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - z;
    const double wp1 = w + 1.0;
    const double fp = ew * wp1;
    if (fp == 0.0) break;  // exactly at the branch point
    const double denom = fp - (w + 2.0) * f / (2.0 * wp1);
    const double next = w - f / denom;
    if (!std::isfinite(next)) break;
    const double delta = next - w;
    w = next;
    if (std::abs(delta) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(w)) break;
  }
  return w;
}

// For very large z, e^w overflows; Newton on w + ln w = ln z instead.
double log_newton(double z, double w) {
  const double lz = std::log(z);
  for (int it = 0; it < kMaxIterations; ++it) {
    const double g = w + std::log(w) - lz;
    const double next = w - g / (1.0 + 1.0 / w);
    const double delta = next - w;
    w = next;
    if (std::abs(delta) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(w)) break;
  }
  return w;
}

}  // namespace

double lambert_w(LambertBranch branch, double z) {
  if (std::isnan(z)) throw DomainError("lambert_w: NaN argument");
  if (z < kBranchPoint) throw DomainError("lambert_w: argument below -1/e");
  if (z == kBranchPoint) return -1.0;
  if (branch == LambertBranch::Wm1) {
    if (z >= 0.0) throw DomainError("lambert_w: W-1 requires z < 0");
  } else if (z == 0.0) {
    return 0.0;
  }
  if (branch == LambertBranch::W0 && z > 1e100) {
    if (std::isinf(z)) return z;
    return log_newton(z, initial_guess(branch, z));
  }

  double w = halley(z, initial_guess(branch, z));
  // Keep the result on its branch; rounding can only nudge it across w = −1
  // right at the branch point.
  if (branch == LambertBranch::W0 && w < -1.0) w = -1.0;
  if (branch == LambertBranch::Wm1 && w > -1.0) w = -1.0;

  const double residual = std::abs(w * std::exp(w) - z);
  if (residual > kResidualTolerance * std::max(1.0, std::abs(z))) {
    throw DomainError("lambert_w: iteration failed to converge");
  }
  return w;
}

}  // namespace flowseek
