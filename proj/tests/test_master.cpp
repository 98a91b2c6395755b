#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "mmfg/errors.hpp"
#include "mmfg/master_solver.hpp"
#include "mmfg/rng.hpp"

using namespace mmfg;

namespace {

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

LqSpec decoupled_spec() {
  LqSpec s = LqSpec::Zero(1, 1, 1.0);
  s.Q(0, 0) = 1.0;
  return s;
}

LqSpec coupled_spec() {
  LqSpec s = LqSpec::Zero(1, 1, 1.0);
  s.Q(0, 0) = 1;
  s.A(0, 0) = 0.4;
  s.B(0, 0) = 0.3;
  s.Q_T(0, 0) = 0.5;
  s.A_T(0, 0) = 0.3;
  s.B_T(0, 0) = 0.2;
  s.Q0(0, 0) = 0.8;
  s.A0(0, 0) = 0.5;
  s.Q0_T(0, 0) = 0.4;
  s.A0_T(0, 0) = 0.5;
  return s;
}

Eigen::VectorXd rand_box(uint64_t seed, uint64_t tag, int n, double half) {
  const NoiseStream s(seed, tag, 0);
  Eigen::VectorXd v(n);
  for (int a = 0; a < n; ++a) v[a] = 2 * half * s.uniform(2 * a) - half;
  return v;
}

}  // namespace

TEST_CASE("zero-cost spec solves to the zero solution") {
  const MasterSolution sol = solve_master(LqSpec::Zero(1, 1, 1.0), 100);
  for (int k = 0; k <= 100; ++k) {
    CHECK(sol.u_at(k).maxAbsCoeff() == 0.0);
    CHECK(sol.u0_at(k).maxAbsCoeff() == 0.0);
  }
  const auto [ri, rii] =
      master_residual(sol, 0.37, scalar(1), scalar(-2), scalar(0.5));
  CHECK(ri == 0.0);
  CHECK(rii == 0.0);
  const MasterEval e = eval_master(sol, 0.37, scalar(1), scalar(-2), scalar(2));
  CHECK(e.U == 0.0);
  CHECK(e.U0 == 0.0);
  CHECK(sol.alpha_minor(0.2, scalar(1), scalar(1), scalar(1)).norm() == 0.0);
  CHECK(sol.alpha_major(0.2, scalar(1), scalar(1)).norm() == 0.0);
}

TEST_CASE("decoupled scalar Riccati matches tanh / ln cosh in closed form") {
  const MasterSolution sol = solve_master(decoupled_spec(), 4000);
  CHECK(sol.K_xx(0)(0, 0) == doctest::Approx(std::tanh(1.0)).epsilon(1e-8));
  CHECK(sol.k_c(0) == doctest::Approx(std::log(std::cosh(1.0))).epsilon(1e-6));
  // Along the whole grid.
  for (int k = 0; k <= 4000; k += 500) {
    const double t = sol.grid_time(k);
    CHECK(sol.K_xx(k)(0, 0) ==
          doctest::Approx(std::tanh(1.0 - t)).epsilon(1e-8));
  }
  // Feedback is -tanh(T - t) x.
  const double a = sol.alpha_minor(0.3, scalar(2), scalar(0), scalar(0))[0];
  CHECK(a == doctest::Approx(-std::tanh(0.7) * 2).epsilon(1e-8));
}

TEST_CASE("terminal conditions hold exactly") {
  const LqSpec s = coupled_spec();
  const MasterSolution sol = solve_master(s, 50);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd x = rand_box(1, 3 * trial, 1, 2);
    const Eigen::VectorXd x0 = rand_box(1, 3 * trial + 1, 1, 2);
    const Eigen::VectorXd z = rand_box(1, 3 * trial + 2, 1, 2);
    const MasterEval e = eval_master(sol, s.T, x, x0, z);
    CHECK(e.U == doctest::Approx(s.G(x, x0, z)).epsilon(1e-13));
    CHECK(e.U0 == doctest::Approx(s.G0(x0, z)).epsilon(1e-13));
  }
}

TEST_CASE("coefficient symmetry is preserved along the backward flow") {
  const MasterSolution sol = solve_master(coupled_spec(), 200);
  for (int k = 0; k <= 200; k += 20) {
    CHECK((sol.u_at(k).M - sol.u_at(k).M.transpose()).cwiseAbs().maxCoeff() <=
          1e-10);
    CHECK((sol.u0_at(k).M - sol.u0_at(k).M.transpose())
              .cwiseAbs()
              .maxCoeff() <= 1e-10);
  }
}

TEST_CASE("gradients match central finite differences") {
  const MasterSolution sol = solve_master(coupled_spec(), 500);
  const double h = 1e-5;
  for (int trial = 0; trial < 25; ++trial) {
    const double t = 0.99 * NoiseStream(2, trial, 0).uniform(0);
    const Eigen::VectorXd x = rand_box(2, 4 * trial, 1, 2);
    const Eigen::VectorXd x0 = rand_box(2, 4 * trial + 1, 1, 2);
    const Eigen::VectorXd z = rand_box(2, 4 * trial + 2, 1, 2);
    const MasterEval e = eval_master(sol, t, x, x0, z);
    auto relerr = [](double a, double b) {
      return std::abs(a - b) / std::max(1.0, std::abs(b));
    };
    const double fdx = (eval_master(sol, t, x.array() + h, x0, z).U -
                        eval_master(sol, t, x.array() - h, x0, z).U) /
                       (2 * h);
    CHECK(relerr(fdx, e.DxU[0]) <= 1e-7);
    const double fdx0 = (eval_master(sol, t, x, x0.array() + h, z).U -
                         eval_master(sol, t, x, x0.array() - h, z).U) /
                        (2 * h);
    CHECK(relerr(fdx0, e.Dx0U[0]) <= 1e-7);
    const double fdz = (eval_master(sol, t, x, x0, z.array() + h).U -
                        eval_master(sol, t, x, x0, z.array() - h).U) /
                       (2 * h);
    CHECK(relerr(fdz, e.DzU[0]) <= 1e-7);
    const double fdz0 = (eval_master(sol, t, x, x0, z.array() + h).U0 -
                         eval_master(sol, t, x, x0, z.array() - h).U0) /
                        (2 * h);
    CHECK(relerr(fdz0, e.DzU0[0]) <= 1e-7);
  }
}

TEST_CASE("decoupled residual is below 1e-8 on the sampling box") {
  const MasterSolution sol = solve_master(decoupled_spec(), 4000);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const double t = NoiseStream(3, trial, 0).uniform(0);
    const Eigen::VectorXd x = rand_box(3, 3 * trial, 1, 2);
    const Eigen::VectorXd x0 = rand_box(3, 3 * trial + 1, 1, 2);
    const Eigen::VectorXd z = rand_box(3, 3 * trial + 2, 1, 2);
    const auto [ri, rii] = master_residual(sol, t, x, x0, z);
    worst = std::max({worst, std::abs(ri), std::abs(rii)});
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("off-grid residual shrinks at fourth order under step doubling") {
  const LqSpec s = coupled_spec();
  auto worst_residual = [&](int nt) {
    const MasterSolution sol = solve_master(s, nt);
    double worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
      // Sample strictly between grid points of both solves.
      const double t =
          (std::floor(NoiseStream(4, trial, 0).uniform(0) * nt * 0.99) + 0.31) /
          nt;
      const Eigen::VectorXd x = rand_box(4, 3 * trial, 1, 2);
      const Eigen::VectorXd x0 = rand_box(4, 3 * trial + 1, 1, 2);
      const Eigen::VectorXd z = rand_box(4, 3 * trial + 2, 1, 2);
      const auto [ri, rii] = master_residual(sol, t, x, x0, z);
      worst = std::max({worst, std::abs(ri), std::abs(rii)});
    }
    return worst;
  };
  const double c = worst_residual(50), f = worst_residual(100);
  CHECK(c / f >= 12.0);
}

TEST_CASE("RK4 coefficient convergence is fourth order") {
  const LqSpec s = coupled_spec();
  const MasterSolution a = solve_master(s, 50);
  const MasterSolution b = solve_master(s, 100);
  const MasterSolution c = solve_master(s, 200);
  const double e1 = (a.u_at(0) - b.u_at(0)).maxAbsCoeff() +
                    (a.u0_at(0) - b.u0_at(0)).maxAbsCoeff();
  const double e2 = (b.u_at(0) - c.u_at(0)).maxAbsCoeff() +
                    (b.u0_at(0) - c.u0_at(0)).maxAbsCoeff();
  CHECK(e1 / e2 >= 12.0);
}

TEST_CASE("feedback difference is independent of the base point") {
  const MasterSolution sol = solve_master(coupled_spec(), 200);
  const Eigen::VectorXd q = scalar(0.8);
  const Eigen::VectorXd x1 = scalar(-1.1), x2 = scalar(2.3);
  const Eigen::VectorXd x0 = scalar(0.4), z = scalar(-0.6);
  const Eigen::VectorXd d1 = sol.alpha_minor(0.5, x1 + q, x0, z) -
                             sol.alpha_minor(0.5, x1, x0, z);
  const Eigen::VectorXd d2 = sol.alpha_minor(0.5, x2 + q, x0, z) -
                             sol.alpha_minor(0.5, x2, x0, z);
  CHECK((d1 - d2).norm() <= 1e-12);
}

TEST_CASE("closure consistency: the mean-field integral collapses to the mean") {
  // With D_xU affine in its first argument, the average over any atom cloud
  // of D_zU0 . D_xU(t, y, x0, m) equals D_zU0 . D_xU(t, z, x0, z).
  const MasterSolution sol = solve_master(coupled_spec(), 200);
  const NoiseStream s(5, 0, 0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> atoms;
    double zm = 0;
    for (int i = 0; i < 6; ++i) {
      atoms.push_back(4 * s.uniform(2 * (trial * 50 + i)) - 2);
      zm += atoms.back();
    }
    zm /= 6;
    const Eigen::VectorXd x0 = rand_box(6, trial, 1, 2);
    const Eigen::VectorXd z = scalar(zm);
    const double t = 0.9 * s.uniform(2 * (trial * 50 + 20));
    const MasterEval at_mean = eval_master(sol, t, z, x0, z);
    double avg = 0;
    for (double y : atoms)
      avg += eval_master(sol, t, scalar(y), x0, z).DxU[0] / 6;
    CHECK(at_mean.DzU0.dot(at_mean.DxU) ==
          doctest::Approx(at_mean.DzU0[0] * avg).epsilon(1e-12));
  }
}

TEST_CASE("rejects invalid inputs") {
  CHECK_THROWS_AS(solve_master(coupled_spec(), 1), std::exception);
  LqSpec bad = coupled_spec();
  bad.Q(0, 0) = -1;
  CHECK_THROWS_AS(solve_master(bad, 100), ConfigError);
  const MasterSolution sol = solve_master(coupled_spec(), 100);
  CHECK_THROWS(eval_master(sol, -0.1, scalar(0), scalar(0), scalar(0)));
  CHECK_THROWS(eval_master(sol, 1.1, scalar(0), scalar(0), scalar(0)));
}

TEST_CASE("strong coupling blows up with a reported failure time") {
  // Strong anticipation of the mean destabilizes the z-block Riccati flow.
  LqSpec s = LqSpec::Zero(1, 1, 8.0);
  s.Q(0, 0) = 1.0;
  s.A(0, 0) = 6.0;
  try {
    solve_master(s, 2000);
    // If this horizon integrates cleanly the guard below fails the test.
    CHECK(false);
  } catch (const BlowUpError& e) {
    CHECK(e.t_fail() >= 0.0);
    CHECK(e.t_fail() <= 8.0);
  }
}
