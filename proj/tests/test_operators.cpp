#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ifb/imaging.hpp"
#include "ifb/operators.hpp"

#include <cmath>
#include <random>

using namespace ifb;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Mat random_mat(Index r, Index c, std::mt19937& gen) {
  std::normal_distribution<double> d(0.0, 1.0);
  Mat m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = d(gen);
  return m;
}

Mat random_psd(Index n, std::mt19937& gen) {
  Mat r = random_mat(n, n, gen);
  return r * r.transpose();
}

}  // namespace

TEST_CASE("project_dual_ball pointwise behaviour") {
  Vec inside = vec2(0.3, 0.4);
  CHECK((project_dual_ball(inside) - inside).norm() == 0.0);

  Vec outside = vec2(3.0, 4.0);
  Vec proj = project_dual_ball(outside);
  CHECK(proj[0] == doctest::Approx(0.6));
  CHECK(proj[1] == doctest::Approx(0.8));

  CHECK_THROWS_AS(project_dual_ball(Vec::Zero(3)), std::invalid_argument);
}

TEST_CASE("project_dual_ball is a nonexpansive projection") {
  std::mt19937 gen(17);
  for (int t = 0; t < 200; ++t) {
    Index n = 1 + gen() % 16;
    Vec p = 3.0 * gaussian_vec(2 * n, gen);
    Vec q = 3.0 * gaussian_vec(2 * n, gen);
    Vec pp = project_dual_ball(p), pq = project_dual_ball(q);
    CHECK((pp - pq).norm() <= (p - q).norm() + 1e-12);
    // all pairs feasible
    for (Index j = 0; j < n; ++j)
      CHECK(pp[j] * pp[j] + pp[j + n] * pp[j + n] <= 1.0 + 1e-12);
    // projection characterization: <p - Pp, z - Pp> <= 0 for feasible z
    Vec z = project_dual_ball(Vec(3.0 * gaussian_vec(2 * n, gen)));
    CHECK((p - pp).dot(z - pp) <= 1e-10);
    // idempotent
    CHECK((project_dual_ball(pp) - pp).norm() <= 1e-14);
  }
}

TEST_CASE("prox_l2_data closed form and optimality") {
  Vec u = vec2(1.0, 0.0), f = vec2(0.0, 0.0);
  Vec p = prox_l2_data(u, f, 1.0, 1.0);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.0));

  std::mt19937 gen(23);
  for (int t = 0; t < 100; ++t) {
    Index n = 1 + gen() % 8;
    Vec uu = gaussian_vec(n, gen), ff = gaussian_vec(n, gen);
    double lambda = 0.1 + 3.0 * (gen() % 100) / 100.0;
    double tau = 0.05 + 2.0 * (gen() % 100) / 100.0;
    Vec x = prox_l2_data(uu, ff, lambda, tau);
    // optimality: (x - u)/tau + lambda (x - f) = 0
    Vec opt = (x - uu) / tau + lambda * (x - ff);
    CHECK(opt.norm() <= 1e-12 * std::max(1.0, x.norm()));
    // entrywise overload agrees with the uniform step
    Vec xd = prox_l2_data(uu, ff, lambda, Vec(Vec::Constant(n, tau)));
    CHECK((xd - x).norm() <= 1e-14);
  }

  // limits: tau -> 0 keeps u, tau -> inf returns f
  Vec tiny = prox_l2_data(u, f, 1.0, 1e-14);
  CHECK((tiny - u).norm() <= 1e-10);
  Vec huge = prox_l2_data(u, f, 1.0, 1e14);
  CHECK((huge - f).norm() <= 1e-10);
}

TEST_CASE("prox_splitdual_q closed form and optimality") {
  Vec qt = vec2(1.0, 1.0), f = vec2(0.0, 0.0);
  Vec q = prox_splitdual_q(qt, f, 1.0, 1.0);
  CHECK(q[0] == doctest::Approx(0.5));
  CHECK(q[1] == doctest::Approx(0.5));

  std::mt19937 gen(29);
  for (int t = 0; t < 100; ++t) {
    Index n = 1 + gen() % 8;
    Vec qq = gaussian_vec(n, gen), ff = gaussian_vec(n, gen);
    double lambda = 0.1 + 3.0 * (gen() % 100) / 100.0;
    double sigma = 0.05 + 2.0 * (gen() % 100) / 100.0;
    Vec x = prox_splitdual_q(qq, ff, lambda, sigma);
    // optimality of argmin_q  ||q - qt||^2/(2 sigma) + ||q||^2/(2 lambda) - <f, q>
    Vec opt = (x - qq) / sigma + x / lambda - ff;
    CHECK(opt.norm() <= 1e-12 * std::max(1.0, x.norm()));
    Vec xd = prox_splitdual_q(qq, ff, lambda, Vec(Vec::Constant(n, sigma)));
    CHECK((xd - x).norm() <= 1e-14);
  }
}

TEST_CASE("gradient oracles match central finite differences") {
  std::mt19937 gen(31);
  const double step = 1e-6;
  LinearMap grad = grad_op(5, 4);
  LinearMap h = conv_op(5, 4, Kernel::box(3));
  Vec f = gaussian_vec(20, gen);
  double lambda = 2.5;

  auto q_dual = [&](const Vec& p) {
    return 0.5 * (lambda * f - grad.adjoint_apply(p)).squaredNorm();
  };
  Vec p0 = gaussian_vec(40, gen);
  Vec g = grad_q_dual_rof(p0, f, lambda, grad);
  for (Index i = 0; i < 40; ++i) {
    Vec e = Vec::Zero(40);
    e[i] = step;
    double fd = (q_dual(p0 + e) - q_dual(p0 - e)) / (2 * step);
    CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5));
  }

  auto q_deconv = [&](const Vec& u) {
    return 0.5 * lambda * (h.apply(u) - f).squaredNorm();
  };
  Vec u0 = gaussian_vec(20, gen);
  Vec gd = grad_q_deconv(u0, f, lambda, h);
  for (Index i = 0; i < 20; ++i) {
    Vec e = Vec::Zero(20);
    e[i] = step;
    double fd = (q_deconv(u0 + e) - q_deconv(u0 - e)) / (2 * step);
    CHECK(gd[i] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("linear resolvent solves the shifted system") {
  std::mt19937 gen(37);
  Mat a = random_psd(6, gen);
  Resolvent r = Resolvent::linear(LinearMap::dense(a));
  Vec v = gaussian_vec(6, gen);
  double step = 0.7;
  Vec x = r.apply(v, step);
  Vec oracle = (Mat::Identity(6, 6) + step * a).ldlt().solve(v);
  CHECK((x - oracle).norm() <= 1e-10);

  // metric form: (M + lambda A)^{-1} v
  Mat mM = random_psd(6, gen) + Mat::Identity(6, 6);
  Metric m(LinearMap::dense(mM));
  Vec xm = r.apply_in_metric(v, m, step);
  Vec om = (mM + step * a).ldlt().solve(v);
  CHECK((xm - om).norm() <= 1e-10);
}

TEST_CASE("zero and separable resolvents in a metric") {
  std::mt19937 gen(41);
  Vec d(4);
  d << 1, 2, 3, 4;
  Metric md(LinearMap::diagonal(d));
  Vec v = gaussian_vec(4, gen);

  Resolvent z = Resolvent::zero(4);
  CHECK((z.apply(v, 2.0) - v).norm() == 0.0);
  CHECK((z.apply_in_metric(v, md, 2.0) - Vec(v.array() / d.array()).matrix()).norm() <= 1e-14);

  // separable prox in a diagonal metric = prox with entrywise step lambda/d
  Vec f = gaussian_vec(4, gen);
  double lambda = 0.8, weight = 1.3;
  Resolvent prox = Resolvent::separable(4, [f, weight](const Vec& in, const Vec& step) {
    return prox_l2_data(in, f, weight, step);
  });
  Vec got = prox.apply_in_metric(v, md, lambda);
  Vec eff_step = lambda * d.cwiseInverse();
  Vec expect = prox_l2_data(Vec(v.array() / d.array()), f, weight, eff_step);
  CHECK((got - expect).norm() <= 1e-12);

  Mat dense = random_psd(4, gen) + Mat::Identity(4, 4);
  Metric mdense(LinearMap::dense(dense));
  CHECK_THROWS_AS(prox.apply_in_metric(v, mdense, lambda), std::invalid_argument);
}

TEST_CASE("stacked resolvent splits its input") {
  std::mt19937 gen(43);
  Mat a = random_psd(3, gen);
  Resolvent top = Resolvent::linear(LinearMap::dense(a));
  Resolvent bottom = Resolvent::zero(2);
  Resolvent st = Resolvent::stack(top, bottom);
  CHECK(st.dim() == 5);
  Vec v = gaussian_vec(5, gen);
  Vec out = st.apply(v, 0.5);
  CHECK((out.head(3) - top.apply(Vec(v.head(3)), 0.5)).norm() <= 1e-14);
  CHECK((out.tail(2) - v.tail(2)).norm() == 0.0);
}

TEST_CASE("resolvents are firmly nonexpansive") {
  std::mt19937 gen(47);
  Mat a = random_psd(5, gen);
  Resolvent lin = Resolvent::linear(LinearMap::dense(a));
  Resolvent ball = Resolvent::separable(
      4, [](const Vec& v, const Vec&) { return project_dual_ball(v); });
  for (int t = 0; t < 100; ++t) {
    Vec u = 2.0 * gaussian_vec(5, gen), v = 2.0 * gaussian_vec(5, gen);
    Vec ju = lin.apply(u, 0.9), jv = lin.apply(v, 0.9);
    CHECK((ju - jv).squaredNorm() <= (ju - jv).dot(u - v) + 1e-12);
    Vec p = 2.0 * gaussian_vec(4, gen), q = 2.0 * gaussian_vec(4, gen);
    Vec jp = ball.apply(p, 1.0), jq = ball.apply(q, 1.0);
    CHECK((jp - jq).squaredNorm() <= (jp - jq).dot(p - q) + 1e-12);
  }
}

TEST_CASE("affine forward operator and its co-coercivity") {
  std::mt19937 gen(53);
  Mat q = random_psd(5, gen);
  Vec b = gaussian_vec(5, gen);
  ForwardOp op = ForwardOp::affine(LinearMap::dense(q), b);
  Vec x = gaussian_vec(5, gen);
  CHECK((op.eval(x) - (q * x - b)).norm() <= 1e-13);
  // co-coercivity w.r.t. L = Q holds with equality for affine maps:
  // <Bx - By, x - y> >= ||Bx - By||^2_{Q^{-1}} = <Q(x-y), x-y>
  for (int t = 0; t < 50; ++t) {
    Vec u = gaussian_vec(5, gen), v = gaussian_vec(5, gen);
    Vec du = op.eval(u) - op.eval(v);
    double inner = du.dot(u - v);
    double quad = (u - v).dot(q * (u - v));
    CHECK(inner == doctest::Approx(quad).epsilon(1e-10));
  }
  CHECK(op.cocoercivity.rows() == 5);

  ForwardOp z = ForwardOp::zero(3);
  CHECK(z.eval(gaussian_vec(3, gen)).norm() == 0.0);
}
