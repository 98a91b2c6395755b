#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "mmfg/quadratic.hpp"

using namespace mmfg;

namespace {

Eigen::VectorXd vec3(double a, double b, double c) {
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}

QuadraticForm sample_form() {
  QuadraticForm q = QuadraticForm::Zero(3);
  q.M << 2, 1, 0, 1, 3, -1, 0, -1, 4;
  q.l << 0.5, -1, 2;
  q.c = 0.25;
  return q;
}

}  // namespace

TEST_CASE("quadratic form value, gradient, hessian agree with direct algebra") {
  const QuadraticForm q = sample_form();
  const Eigen::VectorXd v = vec3(1, -2, 0.5);
  const double want = 0.5 * v.dot(q.M * v) + q.l.dot(v) + q.c;
  CHECK(q.value(v) == doctest::Approx(want).epsilon(1e-15));
  CHECK((q.gradient(v) - (q.M * v + q.l)).norm() == 0.0);
  CHECK(q.hessian() == q.M);
}

TEST_CASE("gradient matches central differences") {
  const QuadraticForm q = sample_form();
  const Eigen::VectorXd v = vec3(0.3, 1.2, -0.7);
  const double h = 1e-5;
  const Eigen::VectorXd g = q.gradient(v);
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd vp = v, vm = v;
    vp[i] += h;
    vm[i] -= h;
    CHECK(g[i] ==
          doctest::Approx((q.value(vp) - q.value(vm)) / (2 * h)).epsilon(1e-8));
  }
}

TEST_CASE("vector space arithmetic is coefficientwise") {
  const QuadraticForm a = sample_form();
  QuadraticForm b = QuadraticForm::Zero(3);
  b.M.setIdentity();
  b.l.setConstant(1.0);
  b.c = -2.0;
  const Eigen::VectorXd v = vec3(0.1, -0.4, 0.9);
  const QuadraticForm s = a + 2.0 * b;
  CHECK(s.value(v) ==
        doctest::Approx(a.value(v) + 2.0 * b.value(v)).epsilon(1e-14));
  const QuadraticForm d = a - b;
  CHECK(d.value(v) == doctest::Approx(a.value(v) - b.value(v)).epsilon(1e-14));
}

TEST_CASE("grad_block extracts the restricted gradient") {
  const QuadraticForm q = sample_form();
  const AffineMap g = grad_block(q, 1, 2);
  const Eigen::VectorXd v = vec3(0.2, -1.1, 0.6);
  const Eigen::VectorXd full = q.gradient(v);
  CHECK((g(v) - full.segment(1, 2)).norm() < 1e-15);
}

TEST_CASE("affine_dot reproduces a(v).b(v) pointwise") {
  AffineMap a{Eigen::MatrixXd(2, 3), Eigen::VectorXd(2)};
  a.C << 1, 0, 2, -1, 1, 0;
  a.r << 0.5, -0.25;
  AffineMap b{Eigen::MatrixXd(2, 3), Eigen::VectorXd(2)};
  b.C << 0, 1, 1, 2, 0, -1;
  b.r << 1, 3;
  const QuadraticForm q = affine_dot(a, b);
  for (int k = 0; k < 5; ++k) {
    const Eigen::VectorXd v =
        vec3(std::sin(k * 1.3), std::cos(k * 0.7), 0.3 * k - 1);
    CHECK(q.value(v) == doctest::Approx(a(v).dot(b(v))).epsilon(1e-13));
  }
  CHECK((q.M - q.M.transpose()).norm() < 1e-15);
}

TEST_CASE("half_square_norm and weighted_half_square evaluate exactly") {
  AffineMap a{Eigen::MatrixXd(2, 3), Eigen::VectorXd(2)};
  a.C << 1, -2, 0, 0.5, 1, 1;
  a.r << -1, 2;
  Eigen::MatrixXd Q(2, 2);
  Q << 2, 0.5, 0.5, 1;
  const QuadraticForm hs = half_square_norm(a);
  const QuadraticForm ws = weighted_half_square(a, Q);
  for (int k = 0; k < 5; ++k) {
    const Eigen::VectorXd v = vec3(k * 0.4 - 1, std::sin(k), 0.8);
    const Eigen::VectorXd av = a(v);
    CHECK(hs.value(v) ==
          doctest::Approx(0.5 * av.squaredNorm()).epsilon(1e-13));
    CHECK(ws.value(v) == doctest::Approx(0.5 * av.dot(Q * av)).epsilon(1e-13));
  }
}

TEST_CASE("substitute composes with a linear reparametrization") {
  AffineMap a{Eigen::MatrixXd(2, 2), Eigen::VectorXd(2)};
  a.C << 1, 2, 3, 4;
  a.r << -1, 1;
  Eigen::MatrixXd S(2, 3);
  S << 1, 0, 1, 0, 1, -1;
  const AffineMap as = a.substitute(S);
  const Eigen::VectorXd w = vec3(0.3, -0.2, 0.9);
  CHECK((as(w) - a(S * w)).norm() < 1e-14);
}

TEST_CASE("Hermite basis reproduces cubics exactly") {
  // p(s) = s^3 - 2 s^2 + 3 s - 1 on [0, 1], h = 1.
  auto p = [](double s) { return s * s * s - 2 * s * s + 3 * s - 1; };
  auto dp = [](double s) { return 3 * s * s - 4 * s + 3; };
  for (double s : {0.0, 0.17, 0.5, 0.83, 1.0}) {
    const HermiteWeights wv = hermite_value(s);
    const double got = wv.w_y0 * p(0) + wv.w_d0 * dp(0) + wv.w_y1 * p(1) +
                       wv.w_d1 * dp(1);
    CHECK(got == doctest::Approx(p(s)).epsilon(1e-14));
    const HermiteWeights wd = hermite_derivative(s);
    const double gotd = wd.w_y0 * p(0) + wd.w_d0 * dp(0) + wd.w_y1 * p(1) +
                        wd.w_d1 * dp(1);
    CHECK(gotd == doctest::Approx(dp(s)).epsilon(1e-13));
  }
}
