#include "ifb/imaging.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ifb {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Kernel Kernel::delta() {
  Kernel k;
  k.taps = Mat::Ones(1, 1);
  return k;
}

Kernel Kernel::box(int n) {
  Kernel k;
  k.taps = Mat::Constant(n, n, 1.0 / (n * n));
  return k;
}

Kernel Kernel::motion7() {
  Kernel k;
  k.taps = Mat::Zero(7, 7);
  // diagonal streak with soft ends
  for (int i = 0; i < 7; ++i) k.taps(i, i) = 1.0;
  k.taps(0, 1) = k.taps(1, 0) = 0.5;
  k.taps(5, 6) = k.taps(6, 5) = 0.5;
  k.taps /= k.taps.sum();
  return k;
}

LinearMap grad_op(Index width, Index height) {
  require(width >= 1 && height >= 1, "grad_op: degenerate grid");
  const Index n = width * height;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(4 * static_cast<size_t>(n));
  for (Index i = 0; i < height; ++i) {
    for (Index j = 0; j < width; ++j) {
      Index pix = i * width + j;
      if (j + 1 < width) {  // horizontal forward difference
        trips.emplace_back(pix, pix + 1, 1.0);
        trips.emplace_back(pix, pix, -1.0);
      }
      if (i + 1 < height) {  // vertical forward difference
        trips.emplace_back(n + pix, pix + width, 1.0);
        trips.emplace_back(n + pix, pix, -1.0);
      }
    }
  }
  SpMat g(2 * n, n);
  g.setFromTriplets(trips.begin(), trips.end());
  return LinearMap::sparse(std::move(g));
}

LinearMap conv_op(Index width, Index height, const Kernel& h, Boundary boundary) {
  require(h.taps.rows() % 2 == 1 && h.taps.cols() % 2 == 1, "conv_op: kernel must be odd-sized");
  require(h.taps.rows() <= height && h.taps.cols() <= width, "conv_op: kernel larger than image");
  const Index n = width * height;
  const Index cr = h.taps.rows() / 2, cc = h.taps.cols() / 2;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(n) * h.taps.size());
  for (Index i = 0; i < height; ++i) {
    for (Index j = 0; j < width; ++j) {
      Index out = i * width + j;
      for (Index a = 0; a < h.taps.rows(); ++a) {
        for (Index b = 0; b < h.taps.cols(); ++b) {
          double w = h.taps(a, b);
          if (w == 0.0) continue;
          Index si = i + cr - a, sj = j + cc - b;  // true convolution
          if (boundary == Boundary::Replicate) {
            si = std::clamp<Index>(si, 0, height - 1);
            sj = std::clamp<Index>(sj, 0, width - 1);
          } else if (si < 0 || si >= height || sj < 0 || sj >= width) {
            continue;
          }
          trips.emplace_back(out, si * width + sj, w);
        }
      }
    }
  }
  SpMat m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  return LinearMap::sparse(std::move(m));
}

Vec RofDualProblem::recover_primal(const Vec& p) const {
  return f - grad.adjoint_apply(p) / lambda;
}

double RofDualProblem::objective(const Vec& p) const {
  Index n = p.size() / 2;
  for (Index j = 0; j < n; ++j) {
    double a = p[j], b = p[j + n];
    if (a * a + b * b > 1.0 + 1e-9) return std::numeric_limits<double>::infinity();
  }
  Vec resid = lambda * f - grad.adjoint_apply(p);
  return 0.5 * resid.squaredNorm();
}

RofDualProblem build_rof_dual(const ImageGrid& f, double lambda) {
  require(lambda > 0, "build_rof_dual: lambda must be positive");
  require(f.pixels.size() == f.size(), "build_rof_dual: image size mismatch");
  RofDualProblem prob;
  prob.grad = grad_op(f.width, f.height);
  prob.f = f.pixels;
  prob.lambda = lambda;
  double norm = op_norm_estimate(prob.grad);
  prob.L = norm * norm;
  Index dim = prob.grad.rows();
  prob.pair.A = Resolvent::separable(
      dim, [](const Vec& v, const Vec&) { return project_dual_ball(v); });
  LinearMap grad = prob.grad;
  Vec fv = prob.f;
  prob.pair.B = ForwardOp::custom(
      dim,
      [grad, fv, lambda](const Vec& p) { return grad_q_dual_rof(p, fv, lambda, grad); },
      LinearMap::scaled(dim, prob.L));
  return prob;
}

SaddleProblem build_rof_saddle(const ImageGrid& f, double lambda) {
  require(lambda > 0, "build_rof_saddle: lambda must be positive");
  require(f.pixels.size() == f.size(), "build_rof_saddle: image size mismatch");
  SaddleProblem prob;
  prob.dim_x = f.size();
  prob.dim_y = 2 * f.size();
  prob.K = grad_op(f.width, f.height);
  prob.K_norm = op_norm_estimate(prob.K);
  Vec fv = f.pixels;
  prob.prox_G = Resolvent::separable(prob.dim_x, [fv, lambda](const Vec& v, const Vec& step) {
    return prox_l2_data(v, fv, lambda, step);
  });
  prob.prox_Fstar = Resolvent::separable(
      prob.dim_y, [](const Vec& v, const Vec&) { return project_dual_ball(v); });
  return prob;
}

SaddleProblem build_deconv(const ImageGrid& f, const Kernel& h, double lambda,
                           DeconvVariant variant) {
  require(lambda > 0, "build_deconv: lambda must be positive");
  require(f.pixels.size() == f.size(), "build_deconv: image size mismatch");
  const Index n = f.size();
  LinearMap grad = grad_op(f.width, f.height);
  LinearMap hop = conv_op(f.width, f.height, h);
  Vec fv = f.pixels;

  SaddleProblem prob;
  prob.dim_x = n;
  prob.prox_G = Resolvent::zero(n);
  if (variant == DeconvVariant::Explicit) {
    prob.dim_y = 2 * n;
    prob.K = grad;
    prob.K_norm = op_norm_estimate(prob.K);
    double h_norm = op_norm_estimate(hop);
    prob.L_Q = lambda * h_norm * h_norm;
    prob.grad_Q = ForwardOp::custom(
        n, [hop, fv, lambda](const Vec& u) { return grad_q_deconv(u, fv, lambda, hop); },
        LinearMap::scaled(n, prob.L_Q));
    prob.prox_Fstar = Resolvent::separable(
        prob.dim_y, [](const Vec& v, const Vec&) { return project_dual_ball(v); });
    prob.D = Vec::Constant(n, prob.L_Q);
    prob.E = Vec::Zero(prob.dim_y);
  } else {
    prob.dim_y = 3 * n;
    prob.K = LinearMap::vstack(grad, hop);
    prob.K_norm = op_norm_estimate(prob.K);
    Resolvent ball = Resolvent::separable(
        2 * n, [](const Vec& v, const Vec&) { return project_dual_ball(v); });
    // The conjugate of (lambda/2)||v - f||^2 is ||q||^2/(2 lambda) + <f, q>;
    // prox_splitdual_q implements the -<f, q> convention, so pass -f here to
    // land on the correct data term.
    Vec neg_f = -fv;
    Resolvent qprox = Resolvent::separable(n, [neg_f, lambda](const Vec& v, const Vec& step) {
      return prox_splitdual_q(v, neg_f, lambda, step);
    });
    prob.prox_Fstar = Resolvent::stack(std::move(ball), std::move(qprox));
    prob.D = Vec::Zero(n);
    prob.E = Vec::Zero(prob.dim_y);
  }
  return prob;
}

double tv_norm(const Vec& grad_u) {
  require(grad_u.size() % 2 == 0, "tv_norm: odd length");
  Index n = grad_u.size() / 2;
  double tv = 0.0;
  for (Index j = 0; j < n; ++j)
    tv += std::sqrt(grad_u[j] * grad_u[j] + grad_u[j + n] * grad_u[j + n]);
  return tv;
}

Energies rof_energies(const LinearMap& grad, const Vec& u, const Vec& p,
                      const Vec& f, double lambda) {
  Energies e;
  e.primal = tv_norm(grad.apply(u)) + 0.5 * lambda * (u - f).squaredNorm();
  Index n = p.size() / 2;
  bool feasible = true;
  for (Index j = 0; j < n; ++j) {
    double a = p[j], b = p[j + n];
    if (a * a + b * b > 1.0 + 2e-9) {
      feasible = false;
      break;
    }
  }
  if (!feasible) {
    e.dual = -std::numeric_limits<double>::infinity();
    e.gap = std::numeric_limits<double>::infinity();
    return e;
  }
  Vec div = grad.adjoint_apply(p);
  e.dual = 0.5 * lambda * f.squaredNorm() - (div - lambda * f).squaredNorm() / (2.0 * lambda);
  Vec u_of_p = f - div / lambda;
  double primal_at_up = tv_norm(grad.apply(u_of_p)) + 0.5 * lambda * (u_of_p - f).squaredNorm();
  e.gap = primal_at_up - e.dual;
  return e;
}

double deconv_primal(const LinearMap& grad, const LinearMap& h, const Vec& u,
                     const Vec& f, double lambda) {
  return tv_norm(grad.apply(u)) + 0.5 * lambda * (h.apply(u) - f).squaredNorm();
}

ImageGrid synthetic_image(Index width, Index height) {
  ImageGrid img;
  img.width = width;
  img.height = height;
  img.pixels.resize(width * height);
  for (Index i = 0; i < height; ++i) {
    for (Index j = 0; j < width; ++j) {
      double x = (j + 0.5) / width, y = (i + 0.5) / height;
      double v = 0.15 + 0.2 * x;  // ramp background
      double dx = x - 0.35, dy = y - 0.4;
      if (dx * dx + dy * dy < 0.04) v = 0.9;                          // disk
      if (x > 0.55 && x < 0.85 && y > 0.55 && y < 0.85) v = 0.55;     // square
      if (std::abs(x - y) < 0.03) v = std::min(1.0, v + 0.25);        // stripe
      img.pixels[i * width + j] = v;
    }
  }
  return img;
}

void add_gaussian_noise(ImageGrid& img, double sigma, unsigned seed) {
  std::mt19937 gen(seed);
  img.pixels += sigma * gaussian_vec(img.pixels.size(), gen);
}

}  // namespace ifb
