#include "ifb/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ifb {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

AlphaSchedule AlphaSchedule::constant(double a) {
  require(a >= 0 && a < 1, "AlphaSchedule::constant: alpha must be in [0,1)");
  AlphaSchedule s;
  s.kind = Kind::Constant;
  s.alpha = a;
  return s;
}

AlphaSchedule AlphaSchedule::ramp(double cap) {
  require(cap >= 0 && cap < 1, "AlphaSchedule::ramp: cap must be in [0,1)");
  AlphaSchedule s;
  s.kind = Kind::Ramp;
  s.alpha = cap;
  return s;
}

AlphaSchedule AlphaSchedule::fista() {
  AlphaSchedule s;
  s.kind = Kind::Fista;
  return s;
}

AlphaSchedule AlphaSchedule::fista_safeguarded(double c) {
  require(c > 0, "AlphaSchedule::fista_safeguarded: c must be positive");
  AlphaSchedule s;
  s.kind = Kind::FistaSafeguarded;
  s.c = c;
  return s;
}

AlphaSchedule AlphaSchedule::theorem2_max(double gamma, double eps) {
  AlphaSchedule s;
  s.kind = Kind::Theorem2Max;
  s.alpha = alpha_max_scalar(gamma, eps);
  s.gamma = gamma;
  s.eps = eps;
  return s;
}

double AlphaSchedule::next(int k, double dx_norm_m_sq) const {
  require(k >= 1, "AlphaSchedule::next: k must be >= 1");
  require(dx_norm_m_sq >= 0, "AlphaSchedule::next: negative increment norm");
  switch (kind) {
    case Kind::Constant:
      return alpha;
    case Kind::Ramp:
      // nondecreasing toward the cap
      return alpha * (1.0 - 1.0 / (k + 1.0));
    case Kind::Fista:
      return (k - 1.0) / (k + 2.0);
    case Kind::FistaSafeguarded: {
      double fista = (k - 1.0) / (k + 2.0);
      if (dx_norm_m_sq == 0.0) return fista;
      return std::min(fista, c / (static_cast<double>(k) * k * dx_norm_m_sq));
    }
    case Kind::Theorem2Max:
      return alpha;
  }
  throw std::logic_error("unreachable");
}

double alpha_max_scalar(double gamma, double eps) {
  require(gamma > 0 && gamma < 2, "alpha_max_scalar: gamma must be in (0,2)");
  require(eps > 0 && eps < (9.0 - 4.0 * gamma) / (2.0 * gamma),
          "alpha_max_scalar: eps outside admissible range");
  return 1.0 + (std::sqrt(9.0 - 4.0 * gamma - 2.0 * eps * gamma) - 3.0) / gamma;
}

FBState FBState::init(Vec x0) {
  FBState s;
  s.x_prev = x0;
  s.x_curr = std::move(x0);
  return s;
}

FBState inertial_fb_step(const FBState& state, const Resolvent& A, const ForwardOp& B,
                         const Metric& m, double lambda, double alpha) {
  require(lambda > 0, "inertial_fb_step: lambda must be positive");
  require(alpha >= 0 && alpha < 1, "inertial_fb_step: alpha must be in [0,1)");
  Vec dx = state.x_curr - state.x_prev;
  Vec y = state.x_curr + alpha * dx;
  Vec v = m.apply(y) - lambda * B.eval(y);
  FBState next;
  next.x_curr = A.apply_in_metric(v, m, lambda);
  next.x_prev = state.x_curr;
  next.k = state.k + 1;
  next.err_sum = state.err_sum + alpha * m_norm_sq(m, dx);
  return next;
}

namespace {

// margin of c1*M + c2*L through the structure-preserving combination
double combo_margin(const LinearMap& m, const LinearMap& l, double c1, double c2) {
  return pd_margin(add_scaled(add_scaled(LinearMap::scaled(m.rows(), 0.0), c1, m), c2, l));
}

}  // namespace

CheckResult check_theorem1(const Metric& m, const LinearMap& l, double lambda) {
  require(lambda > 0, "check_theorem1: lambda must be positive");
  require(m.dim() == l.rows(), "check_theorem1: dimension mismatch");
  double margin = combo_margin(m.map(), l, 1.0, -lambda / 2.0);
  return {margin > 0, margin};
}

bool check_theorem2(const Metric& m, const LinearMap& l, double lambda,
                    double alpha, double eps) {
  require(alpha >= 0 && alpha < 1, "check_theorem2: alpha must be in [0,1)");
  require(eps > 0, "check_theorem2: eps must be positive");
  double c1 = 1.0 - 3.0 * alpha - eps;
  double c2 = -(1.0 - alpha) * (1.0 - alpha) * lambda / 2.0;
  return combo_margin(m.map(), l, c1, c2) >= -1e-12;
}

Metric implicit_variant_metric(const Metric& m, const LinearMap& b_linear, double lambda) {
  require(lambda > 0, "implicit_variant_metric: lambda must be positive");
  LinearMap mbar = add_scaled(m.map(), -lambda, b_linear);
  double margin = pd_margin(mbar);
  require(margin > 0, "implicit_variant_metric: M - lambda B is not positive definite");
  return Metric(std::move(mbar), margin);
}

}  // namespace ifb
