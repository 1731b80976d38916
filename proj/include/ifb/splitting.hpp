#pragma once

#include "ifb/operators.hpp"

namespace ifb {

/// Extrapolation-factor schedules. All emitted values lie in [0, 1);
/// constant, ramp and theorem2-max schedules are nondecreasing, the FISTA
/// law is nondecreasing and tends to 1.
struct AlphaSchedule {
  enum class Kind { Constant, Ramp, Fista, FistaSafeguarded, Theorem2Max };

  Kind kind = Kind::Constant;
  double alpha = 0.0;   // constant value / ramp cap
  double c = 1e4;       // safeguard constant
  double eps = 1e-6;    // margin for the theorem2-max bound
  double gamma = 1.0;   // normalized step for the theorem2-max bound

  static AlphaSchedule constant(double a);
  static AlphaSchedule ramp(double cap);
  static AlphaSchedule fista();
  static AlphaSchedule fista_safeguarded(double c);
  static AlphaSchedule theorem2_max(double gamma, double eps = 1e-6);

  /// alpha_k for iteration k >= 1; dx_norm_m_sq is ||x^k - x^{k-1}||_M^2
  /// (only the safeguarded law looks at it; zero disables the safeguard).
  double next(int k, double dx_norm_m_sq) const;
};

/// Maximal extrapolation factor alpha(gamma) = 1 + (sqrt(9 - 4g - 2*eps*g) - 3)/g
/// for the normalized step gamma in (0,2); tends to 1/3 as gamma -> 0.
double alpha_max_scalar(double gamma, double eps);

/// Iterate pair of the inertial forward-backward scheme plus the running
/// inertial error sum  sum_k alpha_k ||x^k - x^{k-1}||_M^2.
struct FBState {
  Vec x_prev, x_curr;
  int k = 0;
  double err_sum = 0.0;

  static FBState init(Vec x0);  // x^{-1} = x^0
};

/// One step of  y = x + alpha (x - x_prev);  x+ = (M + lambda A)^{-1}(M - lambda B)(y).
FBState inertial_fb_step(const FBState& state, const Resolvent& A, const ForwardOp& B,
                         const Metric& m, double lambda, double alpha);

struct CheckResult {
  bool ok;
  double margin;
};

/// Step-size condition: S = M - (lambda/2) L positive definite.
CheckResult check_theorem1(const Metric& m, const LinearMap& l, double lambda);

/// Inertial condition (1-3a)M - (1-a)^2 (lambda/2) L >= eps M, tested as the
/// PD margin of (1-3a-eps)M - (1-a)^2 (lambda/2) L.
bool check_theorem2(const Metric& m, const LinearMap& l, double lambda,
                    double alpha, double eps);

/// M_bar = M - lambda B for linear self-adjoint PSD B; throws if not PD.
/// Running the inertial proximal point iteration for A+B in this metric
/// reproduces the inertial forward-backward iterates in metric M.
Metric implicit_variant_metric(const Metric& m, const LinearMap& b_linear, double lambda);

}  // namespace ifb
