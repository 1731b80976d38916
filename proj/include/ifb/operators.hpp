#pragma once

#include "ifb/linops.hpp"

#include <functional>

namespace ifb {

/// Resolvent (Id + step A)^{-1} of a maximal monotone operator A, with an
/// optional metric form (M + lambda A)^{-1}.
///
/// Separable resolvents (proxes of separable convex functions) accept
/// entrywise steps, which is what the diagonally preconditioned iteration
/// needs; linear resolvents solve the symmetric system directly.
class Resolvent {
 public:
  using SeparableFn = std::function<Vec(const Vec& input, const Vec& step)>;

  Index dim() const { return dim_; }

  /// (Id + step A)^{-1}(v), uniform step.
  Vec apply(const Vec& v, double step) const;
  /// (Id + diag(step) A)^{-1}(v), entrywise step.
  Vec apply(const Vec& v, const Vec& step) const;
  /// (M + lambda A)^{-1}(v). Separable resolvents require a diagonal or
  /// scaled metric; linear resolvents solve densely (dim <= 512).
  Vec apply_in_metric(const Vec& v, const Metric& m, double lambda) const;

  /// A = 0: the resolvent is the identity (M^{-1} in metric form).
  static Resolvent zero(Index dim);
  /// Prox of a separable convex function; fn receives the entrywise step.
  static Resolvent separable(Index dim, SeparableFn fn);
  /// A linear self-adjoint positive semi-definite map.
  static Resolvent linear(LinearMap a);
  /// Block-separable pair acting on stacked vectors [top; bottom].
  static Resolvent stack(Resolvent top, Resolvent bottom);

 private:
  enum class Kind { Zero, Separable, Linear };
  Kind kind_ = Kind::Zero;
  Index dim_ = 0;
  SeparableFn fn_;
  std::shared_ptr<const LinearMap> a_;
};

/// Single-valued monotone map B with a co-coercivity metric L:
/// <B(x)-B(y), x-y> >= ||B(x)-B(y)||^2_{L^{-1}}.
struct ForwardOp {
  Index dim = 0;
  std::function<Vec(const Vec&)> eval;
  LinearMap cocoercivity = LinearMap::identity(0);

  static ForwardOp zero(Index dim);
  /// B(x) = Qx - b with Q self-adjoint PSD; co-coercive w.r.t. L = Q.
  static ForwardOp affine(LinearMap q, Vec b);
  static ForwardOp custom(Index dim, std::function<Vec(const Vec&)> eval,
                          LinearMap cocoercivity);
};

/// The problem record for the inclusion 0 in (A+B)(x).
struct MonotonePair {
  Resolvent A;
  ForwardOp B;
};

/// Pointwise projection onto {p : ||p||_{2,inf} <= 1}. Pair j of a length-2n
/// vector is (p[j], p[j+n]).
Vec project_dual_ball(const Vec& p);

/// Prox of G(u) = (lambda/2) ||u - f||^2: (u + tau*lambda*f) / (1 + tau*lambda).
Vec prox_l2_data(const Vec& u, const Vec& f, double lambda, double tau);
Vec prox_l2_data(const Vec& u, const Vec& f, double lambda, const Vec& tau);

/// Prox in q of 1/(2 lambda) ||q||^2 - <f, q>: lambda (qt + sigma f) / (lambda + sigma).
Vec prox_splitdual_q(const Vec& qt, const Vec& f, double lambda, double sigma);
Vec prox_splitdual_q(const Vec& qt, const Vec& f, double lambda, const Vec& sigma);

/// Gradient of Q(p) = 1/2 ||lambda f - grad^T p||^2, i.e. grad(grad^T p - lambda f).
Vec grad_q_dual_rof(const Vec& p, const Vec& f, double lambda, const LinearMap& grad_op);

/// Gradient of Q(u) = (lambda/2) ||Hu - f||^2, i.e. lambda H^T (Hu - f).
Vec grad_q_deconv(const Vec& u, const Vec& f, double lambda, const LinearMap& h_op);

}  // namespace ifb
