// Acceptance battery: eight end-to-end checks of the solver stack against
// closed-form oracles, statistical consistency, and reproducibility. Each
// criterion prints a single PASS/FAIL line; the exit code is 0 only if all
// pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "mmfg/config_io.hpp"
#include "mmfg/harness.hpp"
#include "mmfg/lq_model.hpp"
#include "mmfg/master_solver.hpp"
#include "mmfg/measures.hpp"
#include "mmfg/nash_solver.hpp"
#include "mmfg/rng.hpp"
#include "mmfg/simulator.hpp"

using namespace mmfg;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Eigen::VectorXd scalar(double v) {
  Eigen::VectorXd x(1);
  x[0] = v;
  return x;
}

LqSpec instance1() {
  LqSpec s = LqSpec::Zero(1, 1, 1.0);
  s.Q(0, 0) = 1.0;
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

SimConfig instance1_sim() {
  SimConfig c;
  c.dt = 1e-3;
  c.paths = 10000;
  c.seed = 2025;
  c.mu0 = Mu0::UniformBox(scalar(-1), scalar(1));
  c.x0_init = scalar(0.5);
  c.cloud_size = 0;
  return c;
}

// Uniform draw in [-2,2]^n from the counter RNG.
Eigen::VectorXd box_point(const NoiseStream& s, uint64_t idx, int n) {
  Eigen::VectorXd x(n);
  for (int a = 0; a < n; ++a)
    x[a] = -2.0 + 4.0 * s.uniform(idx * 131 + a);
  return x;
}

// Minimal cost over all permutation couplings of equal-size supports.
double brute_force_wasserstein(const EmpiricalMeasure& a,
                               const EmpiricalMeasure& b, int k) {
  const int n = a.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double acc = 0;
    for (int i = 0; i < n; ++i) {
      const double d = (a.atom(i) - b.atom(perm[i])).norm();
      acc += (k == 1) ? d : d * d;
    }
    acc /= n;
    best = std::min(best, (k == 1) ? acc : std::sqrt(acc));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

bool report(int idx, const char* name, bool pass, const char* fmt, ...) {
  std::printf("criterion %d (%s): %s ", idx, name, pass ? "PASS" : "FAIL");
  va_list args;
  va_start(args, fmt);
  std::vprintf(fmt, args);
  va_end(args);
  std::printf("\n");
  std::fflush(stdout);
  return pass;
}

// ---------------------------------------------------------------------------

bool criterion1() {
  const auto t0 = Clock::now();
  LqSpec spec = LqSpec::Zero(1, 1, 1.0);
  spec.Q(0, 0) = 1.0;  // decoupled: scalar Riccati with tanh solution

  const MasterSolution sol = solve_master(spec, 4000);
  const double errK = std::abs(sol.K_xx(0)(0, 0) - std::tanh(1.0));
  const double errc = std::abs(sol.k_c(0) - std::log(std::cosh(1.0)));

  // Every finite-N player value must carry the same Riccati coefficients.
  double errN = 0;
  for (int N : {2, 8}) {
    const NashSolution ns = solve_nash(spec, N, 4000, 40);
    for (int i = 1; i <= N; ++i) {
      Eigen::VectorXd X0 = Eigen::VectorXd::Zero(ns.D());
      Eigen::VectorXd X1 = X0, Xm = X0;
      X1[ns.block_offset(i)] = 1.0;
      Xm[ns.block_offset(i)] = -1.0;
      const double v0 = eval_nash(ns, i, 0.0, X0).value;
      const double v1 = eval_nash(ns, i, 0.0, X1).value;
      const double vm = eval_nash(ns, i, 0.0, Xm).value;
      errN = std::max(errN, std::abs(v0 - std::log(std::cosh(1.0))));
      errN = std::max(errN,
                      std::abs((v1 + vm - 2 * v0) - std::tanh(1.0)));
    }
  }
  const double rt = seconds_since(t0);
  const bool pass = errK <= 1e-8 && errc <= 1e-6 && errN <= 1e-6 && rt < 5.0;
  return report(1, "closed-form Riccati oracle", pass,
                "(|K-tanh(1)|=%.2e, |k-lncosh(1)|=%.2e, nash max err=%.2e, "
                "%.1fs)",
                errK, errc, errN, rt);
}

bool criterion2() {
  const auto t0 = Clock::now();
  const LqSpec spec = instance1();
  const MasterSolution master = solve_master(spec, 4000);

  const NoiseStream rng(1001, 0, 0);
  double worst_master = 0;
  for (int q = 0; q < 1000; ++q) {
    const double t = rng.uniform(7000000 + q);
    const Eigen::VectorXd x = box_point(rng, 3 * q, 1);
    const Eigen::VectorXd x0 = box_point(rng, 3 * q + 1, 1);
    const Eigen::VectorXd z = box_point(rng, 3 * q + 2, 1);
    const auto [r0, r] = master_residual(master, t, x, x0, z);
    worst_master = std::max({worst_master, std::abs(r0), std::abs(r)});
  }

  double worst_nash = 0;
  for (int N : {2, 4, 8}) {
    const NashSolution ns = solve_nash(spec, N, 4000, 40);
    const NoiseStream rngN(1002, N, 0);
    for (int q = 0; q < 1000; ++q) {
      const double t = rngN.uniform(9000000 + q);
      const Eigen::VectorXd X = box_point(rngN, q, ns.D());
      for (int i = 0; i <= N; ++i)
        worst_nash = std::max(worst_nash,
                              std::abs(nash_residual(ns, i, t, X)));
    }
  }
  const double rt = seconds_since(t0);
  const bool pass = worst_master <= 1e-6 && worst_nash <= 1e-6 && rt < 60.0;
  return report(2, "residual suite", pass,
                "(max master=%.2e, max nash=%.2e, %.1fs)", worst_master,
                worst_nash, rt);
}

bool criterion3() {
  const auto t0 = Clock::now();
  const LqSpec spec = instance1();
  const Mu0 mu0 = Mu0::UniformBox(scalar(-1), scalar(1));
  const std::vector<int> Ns = {2, 4, 8, 16, 32, 64};
  const ConvergenceTable table =
      run_convergence(spec, mu0, Ns, 200, 0.0, 42, 2000);
  const RateFit fit = fit_rate(table);

  // Scaled worst normalized error per N: bounded within a factor 3.
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (int N : Ns) {
    double worst = 0;
    for (const auto& r : table.rows)
      if (r.N == N) worst = std::max(worst, N * r.e_minor_norm);
    lo = std::min(lo, worst);
    hi = std::max(hi, worst);
  }
  const double rt = seconds_since(t0);
  const bool pass = fit.slope >= -1.25 && fit.slope <= -0.75 &&
                    fit.r2 >= 0.95 && hi <= 3.0 * lo && rt < 600.0;
  return report(3, "1/N convergence rate", pass,
                "(slope=%.3f, R2=%.3f, scaled err range [%.3f, %.3f], %.1fs)",
                fit.slope, fit.r2, lo, hi, rt);
}

bool criterion4() {
  const auto t0 = Clock::now();
  const LqSpec spec = instance1();
  const MasterSolution master = solve_master(spec, 2000);

  auto scaled_residual_max = [&](int N) {
    double worst = 0;
    const NoiseStream rng(777, N, 0);
    for (int s = 0; s < 200; ++s) {
      const double t = 0.9 * rng.uniform(5000000 + s);
      Eigen::VectorXd X(1 + N);
      for (int a = 0; a <= N; ++a)
        X[a] = -2.0 + 4.0 * rng.uniform(s * 521 + a);
      std::vector<Eigen::VectorXd> atoms;
      for (int a = 1; a <= N; ++a) atoms.push_back(scalar(X[a]));
      const double m1 = EmpiricalMeasure(atoms).moment(1);
      const Lemma32Report rep = project_master_lemma32(master, N, t, X);
      for (int i = 0; i <= N; ++i)
        worst = std::max(worst, N * std::abs(rep.r[i]) / (1 + m1));
    }
    return worst;
  };
  const double w8 = scaled_residual_max(8);
  const double w64 = scaled_residual_max(64);
  const double ratio = std::max(w8, w64) / std::min(w8, w64);

  double worst_ident = 0;
  const NoiseStream rng(778, 0, 0);
  for (int s = 0; s < 20; ++s) {
    const double t = 0.9 * rng.uniform(6000000 + s);
    Eigen::VectorXd X(9);
    for (int a = 0; a < 9; ++a) X[a] = -2.0 + 4.0 * rng.uniform(s * 97 + a);
    const ProjectionIdentityReport rep =
        projection_identity_check(master, 8, t, X, 1e-4);
    worst_ident = std::max(worst_ident, rep.max_rel());
  }
  const double rt = seconds_since(t0);
  const bool pass = ratio <= 3.0 && worst_ident <= 1e-5;
  return report(4, "projected-solution residual bound", pass,
                "(scaled max N=8: %.4f, N=64: %.4f, ratio %.2f; identities "
                "%.2e, %.1fs)",
                w8, w64, ratio, worst_ident, rt);
}

bool criterion5() {
  const auto t0 = Clock::now();
  const LqSpec spec = instance1();
  const MasterSolution master = solve_master(spec, 2000);
  const SimConfig cfg = instance1_sim();

  MinorFeedback alpha_bar = [&](double t, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& x0,
                                const Eigen::VectorXd& z) {
    return master.alpha_minor(t, x, x0, z);
  };
  MajorFeedback alpha0_bar = [&](double t, const Eigen::VectorXd& x0,
                                 const Eigen::VectorXd& z) {
    return master.alpha_major(t, x0, z);
  };

  const CostEstimate jm = estimate_minor_cost(master, alpha_bar, cfg);
  const double want_m = expected_minor_value(master, cfg);
  const double dev_m = std::abs(jm.mean - want_m) / jm.std_err;

  const CostEstimate j0 = estimate_major_cost(master, alpha0_bar, cfg);
  const double want_0 = major_value(master, cfg);
  const double dev_0 = std::abs(j0.mean - want_0) / j0.std_err;

  MinorFeedback g1 = [](double, const Eigen::VectorXd&,
                        const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Ones(1).eval();
  };
  MajorFeedback g1_0 = [](double, const Eigen::VectorXd&,
                          const Eigen::VectorXd&) {
    return Eigen::VectorXd::Ones(1).eval();
  };
  const std::vector<double> eps = {-0.2, -0.1, 0.0, 0.1, 0.2};
  const DeviationReport dm =
      deviation_test(master, g1, g1_0, eps, cfg, DeviationSide::Minor);
  const DeviationReport d0 =
      deviation_test(master, g1, g1_0, eps, cfg, DeviationSide::Major);

  const double rt = seconds_since(t0);
  const bool pass = dev_m <= 3.0 && dev_0 <= 3.0 && dm.curvature > 0 &&
                    d0.curvature > 0 && std::abs(dm.vertex) <= 0.05 &&
                    std::abs(d0.vertex) <= 0.05 && rt < 300.0;
  return report(5, "Nash property via Monte Carlo", pass,
                "(cost devs %.2f/%.2f se; curvature %.3f/%.3f; vertex "
                "%.4f/%.4f, %.0fs)",
                dev_m, dev_0, dm.curvature, d0.curvature, dm.vertex,
                d0.vertex, rt);
}

bool criterion6() {
  const auto t0 = Clock::now();
  const NoiseStream rng(606, 0, 0);
  double worst = 0;
  for (int pair = 0; pair < 100; ++pair) {
    const int n = 1 + static_cast<int>(5 * rng.uniform(4 * pair));
    const int dim = 1 + static_cast<int>(3 * rng.uniform(4 * pair + 1));
    const int k = 1 + static_cast<int>(2 * rng.uniform(4 * pair + 2));
    std::vector<Eigen::VectorXd> a, b;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd xa(dim), xb(dim);
      for (int c = 0; c < dim; ++c) {
        xa[c] = -3.0 + 6.0 * rng.uniform(1000 * pair + 10 * i + c);
        xb[c] = -3.0 + 6.0 * rng.uniform(1000 * pair + 10 * i + c + 500);
      }
      a.push_back(xa);
      b.push_back(xb);
    }
    const EmpiricalMeasure ma(a), mb(b);
    worst = std::max(worst, std::abs(wasserstein(ma, mb, k) -
                                     brute_force_wasserstein(ma, mb, k)));
  }
  const double rt = seconds_since(t0);
  const bool pass = worst <= 1e-12;
  return report(6, "exact transport oracle", pass,
                "(max |assignment - enumeration| = %.2e over 100 pairs, "
                "%.1fs)",
                worst, rt);
}

bool criterion7() {
  const auto t0 = Clock::now();
  const LqSpec spec = instance1();
  const MasterSolution master = solve_master(spec, 2000);

  SimConfig cfg = instance1_sim();
  cfg.paths = 1;  // the cloud statistics come from a single flow realization
  cfg.cloud_size = 10000;
  cfg.seed = 31;
  const PathBundle b = simulate_equilibrium_flow(master, cfg);
  const int steps = static_cast<int>(b.times.size()) - 1;
  double worst_dev = 0;
  for (int chk = 1; chk <= 10; ++chk) {
    const int k = steps * chk / 10;
    const double z = b.paths[0](k, 1);
    const double cm = b.paths[0](k, 2);
    const double sd = b.paths[0](k, 3);
    worst_dev = std::max(
        worst_dev, std::abs(cm - z) / (3 * sd / std::sqrt(10000.0) + 1e-300));
  }

  // Decoupled model: the mean follows z_t = z0 cosh(T-t)/cosh(T) exactly.
  LqSpec dec = LqSpec::Zero(1, 1, 1.0);
  dec.Q(0, 0) = 1.0;
  const MasterSolution md = solve_master(dec, 2000);
  SimConfig cfg2 = instance1_sim();
  cfg2.paths = 1;
  cfg2.cloud_size = 0;
  cfg2.mu0 = Mu0::UniformBox(scalar(0.2), scalar(1.2));  // mean 0.7
  const PathBundle bd = simulate_equilibrium_flow(md, cfg2);
  double worst_z = 0;
  for (size_t k = 0; k < bd.times.size(); ++k) {
    const double want = 0.7 * std::cosh(1 - bd.times[k]) / std::cosh(1.0);
    worst_z = std::max(worst_z, std::abs(bd.paths[0](k, 1) - want));
  }
  const double rt = seconds_since(t0);
  const bool pass = worst_dev <= 1.0 && worst_z <= 1e-6;
  return report(7, "mean-field flow consistency", pass,
                "(cloud dev max %.2f of band; closed-form z err %.2e, %.1fs)",
                worst_dev, worst_z, rt);
}

bool criterion8() {
  const auto t0 = Clock::now();
  const LqSpec spec = instance1();
  const Mu0 mu0 = Mu0::UniformBox(scalar(-1), scalar(1));

  const std::string conv_a = table_to_csv(
      run_convergence(spec, mu0, {2, 4, 8}, 10, 0.0, 42, 400));
  const std::string conv_b = table_to_csv(
      run_convergence(spec, mu0, {2, 4, 8}, 10, 0.0, 42, 400));

  const NashSolution ns = solve_nash(spec, 4, 400, 4);
  SimConfig cfg = instance1_sim();
  cfg.paths = 50;
  cfg.dt = 1e-2;
  Eigen::VectorXd X_init(5);
  X_init << 0.5, -0.6, -0.2, 0.2, 0.6;
  const std::string sim_a =
      bundle_to_csv(simulate_coupled_particles(ns, X_init, cfg));
  const std::string sim_b =
      bundle_to_csv(simulate_coupled_particles(ns, X_init, cfg));

  const MasterSolution master = solve_master(spec, 400);
  cfg.cloud_size = 500;
  const std::string eq_a = bundle_to_csv(simulate_equilibrium_flow(master, cfg));
  const std::string eq_b = bundle_to_csv(simulate_equilibrium_flow(master, cfg));

  const double rt = seconds_since(t0);
  const bool pass = conv_a == conv_b && sim_a == sim_b && eq_a == eq_b &&
                    !conv_a.empty() && !sim_a.empty();
  return report(8, "bitwise determinism", pass,
                "(converge %s, particle sim %s, equilibrium sim %s, %.1fs)",
                conv_a == conv_b ? "identical" : "DIFFERS",
                sim_a == sim_b ? "identical" : "DIFFERS",
                eq_a == eq_b ? "identical" : "DIFFERS", rt);
}

}  // namespace

int main() {
  int failures = 0;
  failures += !criterion1();
  failures += !criterion2();
  failures += !criterion3();
  failures += !criterion4();
  failures += !criterion5();
  failures += !criterion6();
  failures += !criterion7();
  failures += !criterion8();
  if (failures == 0) {
    std::printf("acceptance: all 8 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criteria FAILED\n", failures);
  return 1;
}
