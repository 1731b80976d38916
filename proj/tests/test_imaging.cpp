#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ifb/imaging.hpp"
#include "ifb/solve.hpp"

#include <cmath>
#include <random>

using namespace ifb;

namespace {

ImageGrid noisy_image(Index w, Index h, double sigma = 0.08, unsigned seed = 7) {
  ImageGrid f = synthetic_image(w, h);
  add_gaussian_noise(f, sigma, seed);
  return f;
}

// Runs the saddle form with plain primal-dual steps until the residual drops.
Vec solve_saddle(const SaddleProblem& prob, const Vec& x0, const Vec& y0,
                 double tol, int k_max) {
  PDConfig cfg;
  cfg.tau = 0.95 / prob.K_norm;
  cfg.sigma = 0.95 / prob.K_norm;
  cfg.alpha_schedule = AlphaSchedule::constant(0.3);  // speeds up the tail
  PDState s = PDState::init(x0, y0);
  StopRule stop;
  stop.tol = tol;
  stop.k_max = k_max;
  run_ipdfb(s, prob, cfg, stop, 1000);
  return s.x_curr;
}

}  // namespace

TEST_CASE("grad_op basics") {
  // constant image has zero gradient
  LinearMap g = grad_op(5, 4);
  CHECK(g.rows() == 40);
  CHECK(g.cols() == 20);
  CHECK(g.apply(Vec::Constant(20, 3.7)).norm() == 0.0);

  // 1x2 image (a, b): single horizontal difference b - a, everything else 0
  LinearMap g2 = grad_op(2, 1);
  Vec u(2);
  u << 1.5, 4.0;
  Vec gu = g2.apply(u);
  CHECK(gu.size() == 4);
  CHECK(gu[0] == doctest::Approx(2.5));
  CHECK(gu.tail(3).norm() == 0.0);

  // adjoint probes and the norm bound ||grad||^2 <= 8
  std::mt19937 gen(111);
  for (int t = 0; t < 20; ++t) {
    Vec x = gaussian_vec(20, gen), y = gaussian_vec(40, gen);
    CHECK(std::abs(g.apply(x).dot(y) - x.dot(g.adjoint_apply(y))) <= 1e-12);
  }
  double n = op_norm_estimate(g);
  CHECK(n * n <= 8.0 + 1e-9);
  CHECK(n > 1.0);
}

TEST_CASE("conv_op basics") {
  LinearMap id = conv_op(6, 5, Kernel::delta());
  std::mt19937 gen(113);
  Vec u = gaussian_vec(30, gen);
  CHECK((id.apply(u) - u).norm() == 0.0);

  // replicate boundary preserves constants for an averaging kernel
  LinearMap box = conv_op(6, 5, Kernel::box(3));
  CHECK((box.apply(Vec::Constant(30, 2.0)) - Vec::Constant(30, 2.0)).norm() <= 1e-12);
  CHECK(op_norm_estimate(box) <= 1.0 + 1e-9);

  // zero boundary loses mass at the border
  LinearMap boxz = conv_op(6, 5, Kernel::box(3), Boundary::Zero);
  Vec ones = boxz.apply(Vec::Constant(30, 1.0));
  CHECK(ones[0] == doctest::Approx(4.0 / 9.0));  // corner keeps 4 of 9 taps
  CHECK(ones[2 * 6 + 2] == doctest::Approx(1.0));  // interior untouched

  for (int t = 0; t < 20; ++t) {
    Vec x = gaussian_vec(30, gen), y = gaussian_vec(30, gen);
    CHECK(std::abs(box.apply(x).dot(y) - x.dot(box.adjoint_apply(y))) <= 1e-12);
  }

  CHECK(Kernel::motion7().taps.sum() == doctest::Approx(1.0));
  CHECK_THROWS_AS(conv_op(3, 3, Kernel::motion7()), std::invalid_argument);
}

TEST_CASE("tv_norm") {
  Vec g(2);
  g << 3, 4;
  CHECK(tv_norm(g) == doctest::Approx(5.0));
  Vec g2(4);
  g2 << 1, 0, 0, 1;
  CHECK(tv_norm(g2) == doctest::Approx(2.0));
  CHECK_THROWS_AS(tv_norm(Vec::Zero(3)), std::invalid_argument);
}

TEST_CASE("rof dual problem: constant image is a fixed point") {
  ImageGrid f;
  f.width = 4;
  f.height = 4;
  f.pixels = Vec::Constant(16, 0.3);
  RofDualProblem prob = build_rof_dual(f, 2.0);
  CHECK(prob.objective(Vec::Zero(32)) == doctest::Approx(0.5 * (2.0 * 0.3) * (2.0 * 0.3) * 16));
  // p = 0 is optimal: grad Q(0) = grad(grad^T 0 - lambda f) = lambda grad f = 0
  Vec g = prob.pair.B.eval(Vec::Zero(32));
  CHECK(g.norm() <= 1e-12);
  CHECK((prob.recover_primal(Vec::Zero(32)) - f.pixels).norm() == 0.0);
  // infeasible points report +inf
  CHECK(std::isinf(prob.objective(Vec::Constant(32, 0.9))));
}

TEST_CASE("rof dual solution matches a brute-force oracle on three pixels") {
  // 3x1 image (0, 1, 0), lambda = 2. Only the two horizontal differences are
  // active, so the dual problem has two degrees of freedom in [-1,1]^2.
  ImageGrid f;
  f.width = 3;
  f.height = 1;
  f.pixels = Vec::Zero(3);
  f.pixels[1] = 1.0;
  double lambda = 2.0;
  RofDualProblem prob = build_rof_dual(f, lambda);

  double best = std::numeric_limits<double>::infinity();
  double bp0 = 0, bp1 = 0;
  for (int i = -1000; i <= 1000; ++i) {
    for (int j = -1000; j <= 1000; ++j) {
      double p0 = i / 1000.0, p1 = j / 1000.0;
      // grad^T p for the 1x3 forward-difference operator
      double d0 = -p0, d1 = p0 - p1, d2 = p1;
      double v = 0.5 * ((lambda * 0.0 - d0) * (lambda * 0.0 - d0) +
                        (lambda * 1.0 - d1) * (lambda * 1.0 - d1) +
                        (lambda * 0.0 - d2) * (lambda * 0.0 - d2));
      if (v < best) {
        best = v;
        bp0 = p0;
        bp1 = p1;
      }
    }
  }

  FBState s = FBState::init(Vec::Zero(6));
  Metric m = Metric::identity(6);
  StopRule stop;
  stop.tol = 1e-12;
  stop.k_max = 5000;
  run_inertial_fb(s, prob.pair, m, 1.0 / prob.L, AlphaSchedule::constant(0.2), stop, 1000);
  CHECK(std::abs(s.x_curr[0] - bp0) <= 1e-3);
  CHECK(std::abs(s.x_curr[1] - bp1) <= 1e-3);
  CHECK(prob.objective(s.x_curr) <= best + 1e-6);
}

TEST_CASE("rof_energies and the duality gap") {
  ImageGrid f = noisy_image(8, 8);
  double lambda = 5.0;
  LinearMap g = grad_op(8, 8);

  // at (f, 0) the gap equals TV(f)
  Energies at0 = rof_energies(g, f.pixels, Vec::Zero(128), f.pixels, lambda);
  CHECK(at0.gap == doctest::Approx(tv_norm(g.apply(f.pixels))).epsilon(1e-10));
  CHECK(at0.dual == doctest::Approx(0.0));

  // constant images are their own denoising
  Vec cst = Vec::Constant(64, 0.4);
  Energies flat = rof_energies(g, cst, Vec::Zero(128), cst, lambda);
  CHECK(flat.gap == doctest::Approx(0.0));

  // infeasible dual point
  Energies bad = rof_energies(g, f.pixels, Vec::Constant(128, 0.9), f.pixels, lambda);
  CHECK(std::isinf(bad.gap));
  CHECK(bad.dual == -std::numeric_limits<double>::infinity());
}

TEST_CASE("dual and saddle forms agree on a 16x16 denoising problem") {
  ImageGrid f = noisy_image(16, 16);
  double lambda = 8.0;

  // dual form, solved by inertial forward-backward on Q + indicator
  RofDualProblem dual = build_rof_dual(f, lambda);
  FBState fs = FBState::init(Vec::Zero(512));
  StopRule fstop;
  fstop.tol = 1e-10;
  fstop.k_max = 60000;
  RunResult fr = run_inertial_fb(fs, dual.pair, Metric::identity(512), 1.0 / dual.L,
                                 AlphaSchedule::fista_safeguarded(1e4), fstop, 5000);
  REQUIRE(fr.status == RunStatus::Converged);
  Vec u_dual = dual.recover_primal(fs.x_curr);

  // gap certificate at the high-accuracy solution
  Energies e = rof_energies(dual.grad, u_dual, fs.x_curr, f.pixels, lambda);
  CHECK(e.gap >= -1e-12);
  CHECK(e.gap <= 1e-8);

  // saddle form, solved by the primal-dual iteration
  SaddleProblem saddle = build_rof_saddle(f, lambda);
  saddle.validate();
  Vec u_saddle = solve_saddle(saddle, f.pixels, Vec::Zero(512), 1e-10, 400000);
  CHECK((u_saddle - u_dual).norm() <= 1e-6 * std::max(1.0, u_dual.norm()));
}

TEST_CASE("deconvolution with a delta kernel reduces to denoising") {
  ImageGrid f = noisy_image(12, 12);
  double lambda = 8.0;

  SaddleProblem rof = build_rof_saddle(f, lambda);
  Vec u_rof = solve_saddle(rof, f.pixels, Vec::Zero(288), 1e-11, 400000);

  // explicit variant: same minimizer reached through the smooth data term
  SaddleProblem expl = build_deconv(f, Kernel::delta(), lambda, DeconvVariant::Explicit);
  expl.validate();
  ScalarSteps st = scalar_steps_from_lemma(expl.K_norm, expl.L_Q, 0.0, 1.0, 1.0, 1.0);
  PDConfig cfg;
  cfg.tau = st.tau;
  cfg.sigma = st.sigma;
  cfg.alpha_schedule = AlphaSchedule::constant(0.2);
  PDState es = PDState::init(f.pixels, Vec::Zero(288));
  StopRule stop;
  stop.tol = 1e-11;
  stop.k_max = 400000;
  run_ipdfb(es, expl, cfg, stop, 10000);
  CHECK((es.x_curr - u_rof).norm() <= 1e-6 * std::max(1.0, u_rof.norm()));

  // split-dual variant: data term fully dualized, K = [grad; H]
  SaddleProblem split = build_deconv(f, Kernel::delta(), lambda, DeconvVariant::SplitDual);
  split.validate();
  CHECK(split.dim_y == 3 * 144);
  Vec u_split = solve_saddle(split, f.pixels, Vec::Zero(432), 1e-11, 400000);
  CHECK((u_split - u_rof).norm() <= 1e-4 * std::max(1.0, u_rof.norm()));
}

TEST_CASE("deconv energies decrease under blur-aware reconstruction") {
  ImageGrid clean = synthetic_image(16, 16);
  Kernel h = Kernel::motion7();
  LinearMap hop = conv_op(16, 16, h);
  ImageGrid f;
  f.width = f.height = 16;
  f.pixels = hop.apply(clean.pixels);
  add_gaussian_noise(f, 0.01, 5);
  double lambda = 500.0;

  SaddleProblem prob = build_deconv(f, h, lambda, DeconvVariant::Explicit);
  ScalarSteps st = scalar_steps_from_lemma(prob.K_norm, prob.L_Q, 0.0, 1.0, 1.0, 10.0);
  PDConfig cfg;
  cfg.tau = st.tau;
  cfg.sigma = st.sigma;
  PDState s = PDState::init(f.pixels, Vec::Zero(512));
  StopRule stop;
  stop.k_max = 2000;
  run_ipdfb(s, prob, cfg, stop, 500);

  LinearMap g = grad_op(16, 16);
  double before = deconv_primal(g, hop, f.pixels, f.pixels, lambda);
  double after = deconv_primal(g, hop, s.x_curr, f.pixels, lambda);
  CHECK(after < before);
  // the reconstruction explains the blurred data better than the blurred
  // observation explains itself through another pass of H
  CHECK((hop.apply(s.x_curr) - f.pixels).norm() < (hop.apply(f.pixels) - f.pixels).norm());
}

TEST_CASE("synthetic image and noise are deterministic") {
  ImageGrid a = synthetic_image(16, 12), b = synthetic_image(16, 12);
  CHECK((a.pixels - b.pixels).norm() == 0.0);
  CHECK(a.pixels.minCoeff() >= 0.0);
  CHECK(a.pixels.maxCoeff() <= 1.0);
  add_gaussian_noise(a, 0.1, 9);
  add_gaussian_noise(b, 0.1, 9);
  CHECK((a.pixels - b.pixels).norm() == 0.0);
  ImageGrid c = synthetic_image(16, 12);
  add_gaussian_noise(c, 0.1, 10);
  CHECK((a.pixels - c.pixels).norm() > 0.0);
}
