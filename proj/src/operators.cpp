#include "ifb/operators.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace ifb {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

// ---------------------------------------------------------------------------
// Resolvent

Vec Resolvent::apply(const Vec& v, double step) const {
  return apply(v, Vec(Vec::Constant(dim_, step)));
}

Vec Resolvent::apply(const Vec& v, const Vec& step) const {
  require(v.size() == dim_ && step.size() == dim_, "Resolvent::apply: dimension mismatch");
  switch (kind_) {
    case Kind::Zero:
      return v;
    case Kind::Separable:
      return fn_(v, step);
    case Kind::Linear: {
      // (Id + diag(s) A)^{-1} v solved as the symmetric system
      // (diag(1/s) + A) x = diag(1/s) v.
      require((step.array() > 0).all(), "Resolvent::apply: step must be positive");
      require(dim_ <= 512, "Resolvent::apply: linear resolvent too large");
      Vec sinv = step.cwiseInverse();
      Mat sys = a_->to_dense();
      sys.diagonal() += sinv;
      return Eigen::LDLT<Mat>(sys).solve(Vec(sinv.cwiseProduct(v)));
    }
  }
  throw std::logic_error("unreachable");
}

Vec Resolvent::apply_in_metric(const Vec& v, const Metric& m, double lambda) const {
  require(v.size() == dim_ && m.dim() == dim_, "Resolvent::apply_in_metric: dimension mismatch");
  require(lambda > 0, "Resolvent::apply_in_metric: lambda must be positive");
  switch (kind_) {
    case Kind::Zero:
      return m.solve(v);
    case Kind::Separable: {
      Vec md;
      if (m.map().kind() == LinearMap::Kind::Scaled)
        md = Vec::Constant(dim_, m.map().scale());
      else if (m.map().kind() == LinearMap::Kind::Diagonal)
        md = m.map().diag();
      else
        throw std::invalid_argument(
            "Resolvent::apply_in_metric: separable resolvent needs a diagonal metric");
      return fn_(v.cwiseQuotient(md), lambda * md.cwiseInverse());
    }
    case Kind::Linear: {
      require(dim_ <= 512, "Resolvent::apply_in_metric: linear resolvent too large");
      Mat sys = m.map().to_dense() + lambda * a_->to_dense();
      return Eigen::LDLT<Mat>(sys).solve(v);
    }
  }
  throw std::logic_error("unreachable");
}

Resolvent Resolvent::zero(Index dim) {
  Resolvent r;
  r.kind_ = Kind::Zero;
  r.dim_ = dim;
  return r;
}

Resolvent Resolvent::separable(Index dim, SeparableFn fn) {
  Resolvent r;
  r.kind_ = Kind::Separable;
  r.dim_ = dim;
  r.fn_ = std::move(fn);
  return r;
}

Resolvent Resolvent::linear(LinearMap a) {
  require(a.rows() == a.cols(), "Resolvent::linear: map not square");
  Resolvent r;
  r.kind_ = Kind::Linear;
  r.dim_ = a.rows();
  r.a_ = std::make_shared<const LinearMap>(std::move(a));
  return r;
}

Resolvent Resolvent::stack(Resolvent top, Resolvent bottom) {
  Index d1 = top.dim(), d2 = bottom.dim();
  auto t = std::make_shared<Resolvent>(std::move(top));
  auto b = std::make_shared<Resolvent>(std::move(bottom));
  return separable(d1 + d2, [t, b, d1, d2](const Vec& v, const Vec& step) {
    Vec out(d1 + d2);
    out.head(d1) = t->apply(Vec(v.head(d1)), Vec(step.head(d1)));
    out.tail(d2) = b->apply(Vec(v.tail(d2)), Vec(step.tail(d2)));
    return out;
  });
}

// ---------------------------------------------------------------------------
// ForwardOp

ForwardOp ForwardOp::zero(Index dim) {
  return custom(dim, [](const Vec& x) { return Vec(Vec::Zero(x.size())); },
                LinearMap::scaled(dim, 0.0));
}

ForwardOp ForwardOp::affine(LinearMap q, Vec b) {
  require(q.rows() == q.cols() && b.size() == q.rows(), "ForwardOp::affine: dimension mismatch");
  Index n = q.rows();
  LinearMap qc = q;
  Vec bc = std::move(b);
  return custom(n, [qc, bc](const Vec& x) { return Vec(qc.apply(x) - bc); }, qc);
}

ForwardOp ForwardOp::custom(Index dim, std::function<Vec(const Vec&)> eval,
                            LinearMap cocoercivity) {
  ForwardOp op;
  op.dim = dim;
  op.eval = std::move(eval);
  op.cocoercivity = std::move(cocoercivity);
  return op;
}

// ---------------------------------------------------------------------------
// Proxes and gradients

Vec project_dual_ball(const Vec& p) {
  require(p.size() % 2 == 0, "project_dual_ball: odd length");
  Index n = p.size() / 2;
  Vec out(p.size());
  for (Index j = 0; j < n; ++j) {
    double a = p[j], b = p[j + n];
    double r = std::sqrt(a * a + b * b);
    double scale = r > 1.0 ? 1.0 / r : 1.0;
    out[j] = a * scale;
    out[j + n] = b * scale;
  }
  return out;
}

Vec prox_l2_data(const Vec& u, const Vec& f, double lambda, double tau) {
  require(u.size() == f.size(), "prox_l2_data: dimension mismatch");
  require(lambda >= 0 && tau > 0, "prox_l2_data: bad parameters");
  return (u + (tau * lambda) * f) / (1.0 + tau * lambda);
}

Vec prox_l2_data(const Vec& u, const Vec& f, double lambda, const Vec& tau) {
  require(u.size() == f.size() && tau.size() == u.size(), "prox_l2_data: dimension mismatch");
  require(lambda >= 0 && (tau.array() > 0).all(), "prox_l2_data: bad parameters");
  return (u + lambda * tau.cwiseProduct(f)).cwiseQuotient(Vec(1.0 + lambda * tau.array()));
}

Vec prox_splitdual_q(const Vec& qt, const Vec& f, double lambda, double sigma) {
  require(qt.size() == f.size(), "prox_splitdual_q: dimension mismatch");
  require(lambda > 0 && sigma > 0, "prox_splitdual_q: bad parameters");
  return lambda * (qt + sigma * f) / (lambda + sigma);
}

Vec prox_splitdual_q(const Vec& qt, const Vec& f, double lambda, const Vec& sigma) {
  require(qt.size() == f.size() && sigma.size() == qt.size(),
          "prox_splitdual_q: dimension mismatch");
  require(lambda > 0 && (sigma.array() > 0).all(), "prox_splitdual_q: bad parameters");
  return (lambda * (qt + sigma.cwiseProduct(f)).array() / (lambda + sigma.array())).matrix();
}

Vec grad_q_dual_rof(const Vec& p, const Vec& f, double lambda, const LinearMap& grad_op) {
  require(p.size() == grad_op.rows() && f.size() == grad_op.cols(),
          "grad_q_dual_rof: dimension mismatch");
  return grad_op.apply(Vec(grad_op.adjoint_apply(p) - lambda * f));
}

Vec grad_q_deconv(const Vec& u, const Vec& f, double lambda, const LinearMap& h_op) {
  require(u.size() == h_op.cols() && f.size() == h_op.rows(),
          "grad_q_deconv: dimension mismatch");
  return lambda * h_op.adjoint_apply(Vec(h_op.apply(u) - f));
}

}  // namespace ifb
