#pragma once

namespace flowseek {

enum class LambertBranch { W0, Wm1 };

// Real Lambert W: the solution w of w·e^w = z on the requested branch.
// W0 is defined on [−1/e, ∞) with w >= −1; Wm1 on [−1/e, 0) with w <= −1.
// Throws DomainError outside the branch domain.
double lambert_w(LambertBranch branch, double z);

}  // namespace flowseek
