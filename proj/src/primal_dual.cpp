#include "ifb/primal_dual.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ifb {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

void SaddleProblem::validate() const {
  require(dim_x > 0 && dim_y > 0, "SaddleProblem: dimensions must be positive");
  require(K.cols() == dim_x && K.rows() == dim_y, "SaddleProblem: K dimensions mismatch");
  require(prox_G.dim() == dim_x && prox_Fstar.dim() == dim_y,
          "SaddleProblem: prox dimensions mismatch");
  require((L_Q == 0.0) == !grad_Q.has_value(), "SaddleProblem: L_Q = 0 iff grad_Q absent");
  require((L_P == 0.0) == !grad_Pstar.has_value(), "SaddleProblem: L_P = 0 iff grad_Pstar absent");
  if (D) require(D->size() == dim_x, "SaddleProblem: D dimension mismatch");
  if (E) require(E->size() == dim_y, "SaddleProblem: E dimension mismatch");
}

Vec PDConfig::tau_vec(Index dim_x) const {
  if (T) {
    require(T->size() == dim_x, "PDConfig: T dimension mismatch");
    return *T;
  }
  require(tau > 0, "PDConfig: tau must be positive");
  return Vec::Constant(dim_x, tau);
}

Vec PDConfig::sigma_vec(Index dim_y) const {
  if (Sigma) {
    require(Sigma->size() == dim_y, "PDConfig: Sigma dimension mismatch");
    return *Sigma;
  }
  require(sigma > 0, "PDConfig: sigma must be positive");
  return Vec::Constant(dim_y, sigma);
}

PDState PDState::init(Vec x0, Vec y0) {
  PDState s;
  s.x_prev = x0;
  s.x_curr = std::move(x0);
  s.y_prev = y0;
  s.y_curr = std::move(y0);
  return s;
}

Metric pd_metric(const PDConfig& cfg, const LinearMap& K) {
  Vec tinv = cfg.tau_vec(K.cols()).cwiseInverse();
  Vec sinv = cfg.sigma_vec(K.rows()).cwiseInverse();
  LinearMap a1 = LinearMap::diagonal(tinv);
  LinearMap a2 = LinearMap::diagonal(sinv);
  BlockPdResult r = block_pd_check(a1, a2, K);
  if (!r.pd) {
    std::ostringstream os;
    os << "pd_metric: step-size condition violated: ||Sigma^(1/2) K T^(1/2)|| = " << r.norm
       << " (need < 1)";
    throw std::invalid_argument(os.str());
  }
  double margin = (1.0 - r.norm) * std::min(tinv.minCoeff(), sinv.minCoeff());
  LinearMap neg_k = add_scaled(LinearMap::zero(K.rows(), K.cols()), -1.0, K);
  LinearMap neg_kt = LinearMap::matrix_free(
      K.cols(), K.rows(), [K](const Vec& y) { return Vec(-K.adjoint_apply(y)); },
      [K](const Vec& x) { return Vec(-K.apply(x)); });
  return Metric(LinearMap::block2x2(a1, neg_kt, neg_k, a2), margin);
}

double pd_norm_sq(const PDConfig& cfg, const LinearMap& K, const Vec& dx, const Vec& dy) {
  Vec tinv = cfg.tau_vec(K.cols()).cwiseInverse();
  Vec sinv = cfg.sigma_vec(K.rows()).cwiseInverse();
  double v = dx.dot(tinv.cwiseProduct(dx)) - 2.0 * K.apply(dx).dot(dy) +
             dy.dot(sinv.cwiseProduct(dy));
  return std::max(v, 0.0);
}

PDState ipdfb_step(const PDState& state, const SaddleProblem& prob,
                   const PDConfig& cfg, double alpha) {
  require(alpha >= 0 && alpha < 1, "ipdfb_step: alpha must be in [0,1)");
  double a = (cfg.rho != 1.0) ? 0.0 : alpha;
  Vec tau = cfg.tau_vec(prob.dim_x);
  Vec sigma = cfg.sigma_vec(prob.dim_y);

  Vec dx = state.x_curr - state.x_prev;
  Vec dy = state.y_curr - state.y_prev;
  Vec xi = state.x_curr + a * dx;
  Vec zeta = state.y_curr + a * dy;

  Vec forward_x = prob.K.adjoint_apply(zeta);
  if (prob.grad_Q) forward_x += prob.grad_Q->eval(xi);
  Vec x_next = prob.prox_G.apply(Vec(xi - tau.cwiseProduct(forward_x)), tau);

  Vec xi_bar = 2.0 * x_next - xi;

  Vec forward_y = -prob.K.apply(xi_bar);
  if (prob.grad_Pstar) forward_y += prob.grad_Pstar->eval(zeta);
  Vec y_next = prob.prox_Fstar.apply(Vec(zeta - sigma.cwiseProduct(forward_y)), sigma);

  if (cfg.rho != 1.0) {
    require(cfg.rho > 0 && cfg.rho <= 2.0, "ipdfb_step: rho must be in (0,2]");
    x_next = (1.0 - cfg.rho) * state.x_curr + cfg.rho * x_next;
    y_next = (1.0 - cfg.rho) * state.y_curr + cfg.rho * y_next;
  }

  PDState next;
  next.x_prev = state.x_curr;
  next.y_prev = state.y_curr;
  next.x_curr = std::move(x_next);
  next.y_curr = std::move(y_next);
  next.k = state.k + 1;
  next.err_sum = state.err_sum + a * pd_norm_sq(cfg, prob.K, dx, dy);
  return next;
}

ScalarSteps scalar_steps_from_lemma(double K_norm, double L_Q, double L_P,
                                    double gamma, double delta, double r) {
  require(gamma > 0 && gamma < 2 && delta > 0 && delta < 2,
          "scalar_steps_from_lemma: gamma, delta must be in (0,2)");
  require(r > 0, "scalar_steps_from_lemma: r must be positive");
  double den_tau = K_norm * r + L_Q / gamma;
  double den_sigma = K_norm / r + L_P / delta;
  require(den_tau > 0 && den_sigma > 0, "scalar_steps_from_lemma: zero step denominator");
  return {1.0 / den_tau, 1.0 / den_sigma};
}

double alpha_bound_pd(double gamma, double delta, double eps) {
  return alpha_max_scalar(std::max(gamma, delta), eps);
}

bool check_theorem3(const SaddleProblem& prob, const PDConfig& cfg, double alpha) {
  require(!cfg.preconditioned(), "check_theorem3: scalar mode only");
  double c1 = 1.0 - 3.0 * alpha - cfg.eps;
  double w = (1.0 - alpha) * (1.0 - alpha) / 2.0;
  const double slack = 1e-12;
  double lhs1 = c1 / cfg.tau - w * prob.L_Q;
  double lhs2 = c1 / cfg.sigma - w * prob.L_P;
  if (lhs1 < -slack || lhs2 < -slack) return false;
  return lhs1 * lhs2 >= c1 * c1 * prob.K_norm * prob.K_norm - slack;
}

DiagSteps diag_precond(const LinearMap& K, const Vec& D, const Vec& E,
                       double gamma, double delta, double r, double s) {
  require(s >= 0 && s <= 2, "diag_precond: s must be in [0,2]");
  require(gamma > 0 && gamma < 2 && delta > 0 && delta < 2,
          "diag_precond: gamma, delta must be in (0,2)");
  require(r > 0, "diag_precond: r must be positive");
  require(D.size() == K.cols() && E.size() == K.rows(), "diag_precond: dimension mismatch");
  Vec col = K.abs_pow_col_sums(2.0 - s);
  Vec row = K.abs_pow_row_sums(s);
  DiagSteps out;
  out.T.resize(K.cols());
  out.Sigma.resize(K.rows());
  for (Index j = 0; j < K.cols(); ++j) {
    double den = D[j] / gamma + r * col[j];
    require(den > 0, "diag_precond: column " + std::to_string(j) +
                         " has zero denominator (variable absent from the problem)");
    out.T[j] = 1.0 / den;
  }
  for (Index i = 0; i < K.rows(); ++i) {
    double den = E[i] / delta + row[i] / r;
    require(den > 0, "diag_precond: row " + std::to_string(i) +
                         " has zero denominator (variable absent from the problem)");
    out.Sigma[i] = 1.0 / den;
  }
  return out;
}

bool check_theorem4(const SaddleProblem& prob, const Vec& T, const Vec& Sigma,
                    double alpha, double eps) {
  require(T.size() == prob.dim_x && Sigma.size() == prob.dim_y,
          "check_theorem4: dimension mismatch");
  double c1 = 1.0 - 3.0 * alpha - eps;
  if (c1 <= 0) return false;
  double w = (1.0 - alpha) * (1.0 - alpha) / 2.0;
  Vec d = prob.D.value_or(Vec(Vec::Zero(prob.dim_x)));
  Vec e = prob.E.value_or(Vec(Vec::Zero(prob.dim_y)));
  Vec a1 = c1 * T.cwiseInverse() - w * d;
  Vec a2 = c1 * Sigma.cwiseInverse() - w * e;
  if (a1.minCoeff() <= 0 || a2.minCoeff() <= 0) return false;
  BlockPdResult r = block_pd_check(LinearMap::diagonal(a1), LinearMap::diagonal(a2), prob.K);
  return r.norm <= 1.0 / c1 + 1e-9;
}

}  // namespace ifb
