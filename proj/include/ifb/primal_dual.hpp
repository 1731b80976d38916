#pragma once

#include "ifb/splitting.hpp"

#include <optional>

namespace ifb {

/// The saddle-point record  min_x max_y  G(x) + Q(x) + <Kx,y> - F*(y) - P*(y).
/// L_Q and L_P are the Lipschitz constants of the smooth parts (zero when the
/// part is absent); D and E are optional diagonal co-coercivity majorants for
/// the preconditioned theory.
struct SaddleProblem {
  Index dim_x = 0, dim_y = 0;
  Resolvent prox_G = Resolvent::zero(0);
  Resolvent prox_Fstar = Resolvent::zero(0);
  std::optional<ForwardOp> grad_Q;
  std::optional<ForwardOp> grad_Pstar;
  LinearMap K = LinearMap::identity(0);
  double L_Q = 0.0, L_P = 0.0;
  double K_norm = 0.0;
  std::optional<Vec> D, E;

  void validate() const;  // dimension and presence invariants
};

/// Step sizes, schedule and relaxation for the inertial primal-dual iteration.
/// Scalar mode uses tau/sigma; preconditioned mode uses the diagonal T/Sigma.
struct PDConfig {
  double tau = 0.0, sigma = 0.0;
  std::optional<Vec> T, Sigma;
  AlphaSchedule alpha_schedule = AlphaSchedule::constant(0.0);
  double rho = 1.0;  // relaxation; != 1 forces alpha = 0
  double r = 1.0, gamma = 1.0, delta = 1.0, s = 1.0;
  double eps = 1e-6;

  bool preconditioned() const { return T.has_value(); }
  Vec tau_vec(Index dim_x) const;
  Vec sigma_vec(Index dim_y) const;
};

struct PDState {
  Vec x_prev, x_curr, y_prev, y_curr;
  int k = 0;
  double err_sum = 0.0;

  static PDState init(Vec x0, Vec y0);
};

/// The primal-dual metric M = [[T^{-1}, -K*], [-K, Sigma^{-1}]]; throws if it
/// is not safely positive definite (block norm >= 1 - 1e-9).
Metric pd_metric(const PDConfig& cfg, const LinearMap& K);

/// ||(dx,dy)||_M^2 in the primal-dual metric, including the -2<K dx, dy>
/// cross term; clamped at zero against roundoff near the PD boundary.
double pd_norm_sq(const PDConfig& cfg, const LinearMap& K, const Vec& dx, const Vec& dy);

/// One step of the inertial primal-dual forward-backward iteration:
/// extrapolate (xi, zeta), primal prox, reflection, dual prox. With rho != 1
/// the joint update is averaged as (1-rho) z + rho z+ and alpha is forced
/// to 0 (inertia and overrelaxation are not combined).
PDState ipdfb_step(const PDState& state, const SaddleProblem& prob,
                   const PDConfig& cfg, double alpha);

struct ScalarSteps {
  double tau, sigma;
};

/// tau = 1/(||K|| r + L_Q/gamma), sigma = 1/(||K||/r + L_P/delta).
ScalarSteps scalar_steps_from_lemma(double K_norm, double L_Q, double L_P,
                                    double gamma, double delta, double r);

/// alpha(gamma, delta) = alpha_max_scalar(max(gamma, delta), eps).
double alpha_bound_pd(double gamma, double delta, double eps);

/// Three-part scalar step-size condition for a given extrapolation factor.
bool check_theorem3(const SaddleProblem& prob, const PDConfig& cfg, double alpha);

struct DiagSteps {
  Vec T, Sigma;
};

/// Diagonal step sizes tau_j = 1/(d_j/gamma + r sum_i |K_ij|^{2-s}),
/// sigma_i = 1/(e_i/delta + (1/r) sum_j |K_ij|^s), with 0^0 = 0. Throws if a
/// row/column denominator vanishes (the variable is absent from the problem).
DiagSteps diag_precond(const LinearMap& K, const Vec& D, const Vec& E,
                       double gamma, double delta, double r, double s);

/// Preconditioned three-part condition: two entrywise diagonal dominance
/// inequalities plus the weighted K-norm bound 1/(1 - 3 alpha - eps).
bool check_theorem4(const SaddleProblem& prob, const Vec& T, const Vec& Sigma,
                    double alpha, double eps);

}  // namespace ifb
