#pragma once

#include "ifb/primal_dual.hpp"

namespace ifb {

/// Row-major grayscale image, intensities nominally in [0,1].
struct ImageGrid {
  Index width = 0, height = 0;
  Vec pixels;  // size width*height, pixel (row i, col j) at i*width + j

  Index size() const { return width * height; }
};

/// Odd-sized convolution kernel anchored at its center.
struct Kernel {
  Mat taps;

  static Kernel delta();
  static Kernel box(int n);
  /// 7x7 normalized motion-like blur (a diagonal streak).
  static Kernel motion7();
};

enum class Boundary { Replicate, Zero };

/// Forward-difference gradient with Neumann boundary, R^{MN} -> R^{2MN}.
/// Output pairs follow the project_dual_ball convention: horizontal
/// differences in the first MN entries, vertical in the second. ||grad||^2 <= 8.
LinearMap grad_op(Index width, Index height);

/// Sparse 2-D convolution operator h * u with the chosen boundary rule; the
/// adjoint is exact by construction.
LinearMap conv_op(Index width, Index height, const Kernel& h,
                  Boundary boundary = Boundary::Replicate);

/// Dual ROF problem  min_p 1/2 ||lambda f - grad^T p||^2 + I_P(p),
/// solved as a monotone inclusion with A = dI_P and B = grad Q.
struct RofDualProblem {
  MonotonePair pair;
  LinearMap grad = LinearMap::identity(0);
  Vec f;
  double lambda = 0.0;
  double L = 0.0;  // Lipschitz constant of grad Q, = ||grad||^2

  Vec recover_primal(const Vec& p) const;  // u(p) = f - grad^T p / lambda
  double objective(const Vec& p) const;    // Q(p) + I_P(p) (infeasible -> +inf)
};

RofDualProblem build_rof_dual(const ImageGrid& f, double lambda);

/// Saddle form  min_u max_p <grad u, p> + (lambda/2)||u-f||^2 - I_P(p).
SaddleProblem build_rof_saddle(const ImageGrid& f, double lambda);

enum class DeconvVariant { Explicit, SplitDual };

/// TV-l2 deconvolution in either the explicit form (K = grad, smooth data
/// term) or the split-dual form (K = [grad; H], fully dualized data term).
SaddleProblem build_deconv(const ImageGrid& f, const Kernel& h, double lambda,
                           DeconvVariant variant);

/// Isotropic TV of a gradient-domain vector (sum of pairwise 2-norms).
double tv_norm(const Vec& grad_u);

struct Energies {
  double primal, dual, gap;
};

/// Denoising energies: primal at u, dual at p, and the duality gap
/// primal(u(p)) - dual(p) evaluated at the recovered primal point.
/// Infeasible p reports dual = -inf.
Energies rof_energies(const LinearMap& grad, const Vec& u, const Vec& p,
                      const Vec& f, double lambda);

/// Deconvolution primal energy ||grad u||_{2,1} + (lambda/2)||Hu - f||^2.
double deconv_primal(const LinearMap& grad, const LinearMap& h, const Vec& u,
                     const Vec& f, double lambda);

/// Deterministic synthetic test image (shapes on a ramp background).
ImageGrid synthetic_image(Index width, Index height);

/// Additive seeded Gaussian noise.
void add_gaussian_noise(ImageGrid& img, double sigma, unsigned seed);

}  // namespace ifb
