#include "mmfg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "mmfg/errors.hpp"
#include "mmfg/master_solver.hpp"
#include "mmfg/measures.hpp"
#include "mmfg/nash_solver.hpp"
#include "mmfg/rng.hpp"

namespace mmfg {

namespace {

// Thin the stored Nash grid to roughly 50 points; Hermite interpolation on
// the thinned grid keeps time errors far below the O(1/N) signal.
int pick_stride(int nt) {
  int stride = std::max(1, nt / 50);
  while (nt % stride != 0) --stride;
  return stride;
}

Eigen::VectorXd draw_x0(const NoiseStream& s, int d0) {
  Eigen::VectorXd x0(d0);
  for (int a = 0; a < d0; ++a)
    x0[a] = 2.0 * s.uniform(2 * (0x51ed270b2f0fULL + a)) - 1.0;
  return x0;
}

// Random sample state for a given (N, sample) pair; deterministic in
// (seed, N, sample) regardless of evaluation order.
Eigen::VectorXd draw_state(const Mu0& mu0, int d, int d0, int N, int sample,
                           uint64_t seed) {
  Eigen::VectorXd X(d0 + N * d);
  const NoiseStream s0(seed, sample, static_cast<uint64_t>(N) * 1000003);
  X.segment(0, d0) = draw_x0(s0, d0);
  for (int j = 1; j <= N; ++j) {
    const NoiseStream sj(seed, sample,
                         static_cast<uint64_t>(N) * 1000003 + j);
    X.segment(d0 + (j - 1) * d, d) = mu0.sample(sj);
  }
  return X;
}

double first_moment(const Eigen::VectorXd& X, int d, int d0, int N) {
  double m1 = 0.0;
  for (int j = 0; j < N; ++j) m1 += X.segment(d0 + j * d, d).norm();
  return m1 / N;
}

}  // namespace

ConvergenceTable run_convergence(const LqSpec& spec, const Mu0& mu0,
                                 const std::vector<int>& N_list, int samples,
                                 double t0, uint64_t seed, int nt) {
  spec.validate();
  mu0.validate(spec.d);
  if (samples < 1)
    throw std::invalid_argument("run_convergence: samples must be >= 1");
  if (t0 < 0 || t0 >= spec.T)
    throw std::invalid_argument("run_convergence: t0 must be in [0, T)");
  for (int N : N_list)
    if (N < 2)
      throw std::invalid_argument("run_convergence: every N must be >= 2");

  const int d = spec.d, d0 = spec.d0;
  const MasterSolution master = solve_master(spec, nt);

  ConvergenceTable table;
  for (int N : N_list) {
    const NashSolution nash = solve_nash(spec, N, nt, pick_stride(nt));
    for (int s = 0; s < samples; ++s) {
      const Eigen::VectorXd X = draw_state(mu0, d, d0, N, s, seed);
      const Eigen::VectorXd x0 = X.segment(0, d0);
      Eigen::VectorXd z = Eigen::VectorXd::Zero(d);
      for (int j = 0; j < N; ++j) z += X.segment(d0 + j * d, d);
      z /= N;

      const double u0 = eval_nash(nash, 0, t0, X).value;
      const double U0 = eval_master(master, t0, z, x0, z).U0;
      double e_minor = 0.0;
      for (int i = 1; i <= N; ++i) {
        const Eigen::VectorXd xi = X.segment(d0 + (i - 1) * d, d);
        const Eigen::VectorXd zi = (N * z - xi) / (N - 1);
        const double ui = eval_nash(nash, i, t0, X).value;
        const double Ui = eval_master(master, t0, xi, x0, zi).U;
        e_minor = std::max(e_minor, std::abs(ui - Ui));
      }
      const double m1 = first_moment(X, d, d0, N);
      table.rows.push_back({N, s, e_minor, std::abs(u0 - U0), m1,
                            e_minor / (1 + m1), std::abs(u0 - U0) / (1 + m1)});
    }
  }
  return table;
}

RateFit fit_rate(const ConvergenceTable& table) {
  std::map<int, std::pair<double, int>> acc;
  for (const auto& r : table.rows) {
    acc[r.N].first += r.e_minor_norm;
    acc[r.N].second += 1;
  }
  if (acc.size() < 3)
    throw std::invalid_argument("fit_rate: need at least 3 distinct N");

  std::vector<double> lx, ly;
  bool all_zero = true;
  for (const auto& [N, p] : acc) {
    const double mean = p.first / p.second;
    if (mean > 0) all_zero = false;
  }
  if (all_zero) {
    RateFit f;
    f.exact = true;
    f.r2 = 1.0;
    return f;
  }
  for (const auto& [N, p] : acc) {
    const double mean = p.first / p.second;
    if (mean <= 0)
      throw std::invalid_argument(
          "fit_rate: zero mean error for one N with nonzero others");
    lx.push_back(std::log(static_cast<double>(N)));
    ly.push_back(std::log(mean));
  }

  const int n = static_cast<int>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / n;
  for (int i = 0; i < n; ++i) {
    const double fit = slope * lx[i] + intercept;
    ss_res += (ly[i] - fit) * (ly[i] - fit);
    ss_tot += (ly[i] - ybar) * (ly[i] - ybar);
  }
  RateFit f;
  f.slope = slope;
  f.intercept = intercept;
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

namespace {

// Uniform sample in [-2,2]^n, deterministic in (seed, tag, index).
Eigen::VectorXd box_sample(uint64_t seed, uint64_t tag, int idx, int n) {
  const NoiseStream s(seed, tag, idx);
  Eigen::VectorXd v(n);
  for (int a = 0; a < n; ++a)
    v[a] = 4.0 * s.uniform(2 * (0xabcdefULL + a)) - 2.0;
  return v;
}

}  // namespace

VerifyReport verify_all(const LqSpec& spec, const SimConfig& cfg, int nt,
                        int N_check, uint64_t seed) {
  VerifyReport rep;
  auto add = [&](VerifyCheck c) { rep.checks.push_back(std::move(c)); };

  try {
    spec.validate();
    cfg.validate(spec.d, spec.d0);
    add({"config-valid", true, false, 0.0, 0.0, ""});
  } catch (const std::exception& e) {
    add({"config-valid", false, false, 0.0, 0.0, e.what()});
    for (const char* name :
         {"master-residual", "nash-residual", "fenchel-gap", "lemma32-bound",
          "projection-identities", "exchangeability", "cloud-consistency",
          "cost-identity-minor", "cost-identity-major", "deviation-minor",
          "deviation-major"})
      add({name, false, true, 0.0, 0.0, "skipped: invalid config"});
    return rep;
  }

  const int d = spec.d, d0 = spec.d0;
  const double T = spec.T;

  try {
    const MasterSolution master = solve_master(spec, nt);

    {  // Residuals of the two reduced limiting equations.
      double worst = 0.0;
      for (int i = 0; i < 200; ++i) {
        const double t = T * NoiseStream(seed, 1, i).uniform(2);
        const Eigen::VectorXd x = box_sample(seed, 2, i, d);
        const Eigen::VectorXd x0 = box_sample(seed, 3, i, d0);
        const Eigen::VectorXd z = box_sample(seed, 4, i, d);
        const auto [ri, rii] = master_residual(master, t, x, x0, z);
        worst = std::max({worst, std::abs(ri), std::abs(rii)});
      }
      add({"master-residual", worst <= 1e-6, false, worst, 1e-6, ""});
    }

    {  // Fenchel gap positivity.
      double worst = 0.0;
      for (int i = 0; i < 200; ++i) {
        const Eigen::VectorXd x = box_sample(seed, 5, i, d);
        const Eigen::VectorXd x0 = box_sample(seed, 6, i, d0);
        const Eigen::VectorXd p = box_sample(seed, 7, i, d);
        const Eigen::VectorXd al = box_sample(seed, 8, i, d);
        const Eigen::VectorXd z = box_sample(seed, 9, i, d);
        worst = std::min(worst, fenchel_gap(spec, x, x0, p, al, z));
      }
      add({"fenchel-gap", worst >= -1e-12, false, worst, -1e-12, ""});
    }

    try {  // Finite-N residuals.
      const NashSolution nash = solve_nash(spec, N_check, nt, pick_stride(nt));
      double worst = 0.0;
      const int D = nash.D();
      for (int i = 0; i < 200; ++i) {
        const double t = T * NoiseStream(seed, 10, i).uniform(2);
        const Eigen::VectorXd X = box_sample(seed, 11, i, D);
        for (int pl = 0; pl <= N_check; ++pl)
          worst = std::max(worst, std::abs(nash_residual(nash, pl, t, X)));
      }
      add({"nash-residual", worst <= 1e-6, false, worst, 1e-6, ""});

      {  // Exchangeability under minor-index permutation.
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
          const double t = T * NoiseStream(seed, 12, i).uniform(2);
          Eigen::VectorXd X = box_sample(seed, 13, i, D);
          Eigen::VectorXd Xs = X;
          Xs.segment(d0, d).swap(Xs.segment(d0 + d, d));  // swap minors 1, 2
          worst = std::max(worst, std::abs(eval_nash(nash, 0, t, X).value -
                                           eval_nash(nash, 0, t, Xs).value));
          worst = std::max(worst, std::abs(eval_nash(nash, 1, t, X).value -
                                           eval_nash(nash, 2, t, Xs).value));
        }
        add({"exchangeability", worst <= 1e-9, false, worst, 1e-9, ""});
      }
    } catch (const std::exception& e) {
      add({"nash-residual", false, false, 0.0, 1e-6, e.what()});
      add({"exchangeability", false, true, 0.0, 0.0, "skipped"});
    }

    {  // Residual bound of the projected master solution.
      auto ratio_at = [&](int N) {
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
          const double t = 0.9 * T * NoiseStream(seed, 14, i).uniform(2);
          Eigen::VectorXd X(d0 + N * d);
          X.segment(0, d0) = box_sample(seed, 15, i, d0);
          for (int j = 0; j < N; ++j)
            X.segment(d0 + j * d, d) =
                box_sample(seed, 16, i * 1000 + j, d) / 2.0;
          const Lemma32Report lr = project_master_lemma32(master, N, t, X);
          const double m1 = first_moment(X, d, d0, N);
          for (double r : lr.r)
            worst = std::max(worst, N * std::abs(r) / (1 + m1));
        }
        return worst;
      };
      const double a = ratio_at(N_check), b = ratio_at(2 * N_check);
      const double lo = std::min(a, b), hi = std::max(a, b);
      const double ratio = lo > 0 ? hi / lo : (hi > 0 ? 1e300 : 1.0);
      add({"lemma32-bound", ratio <= 3.0, false, ratio, 3.0, ""});
    }

    {  // Projection derivative identities.
      double worst = 0.0;
      for (int i = 0; i < 10; ++i) {
        Eigen::VectorXd X(d0 + N_check * d);
        X.segment(0, d0) = box_sample(seed, 17, i, d0);
        for (int j = 0; j < N_check; ++j)
          X.segment(d0 + j * d, d) = box_sample(seed, 18, i * 100 + j, d);
        const double t = 0.9 * T * NoiseStream(seed, 19, i).uniform(2);
        worst = std::max(
            worst,
            projection_identity_check(master, N_check, t, X, 1e-4).max_rel());
      }
      add({"projection-identities", worst <= 1e-5, false, worst, 1e-5, ""});
    }

    {  // Cloud mean vs mean ODE.
      SimConfig c = cfg;
      c.paths = 1;
      c.cloud_size = std::max(cfg.cloud_size, 2000);
      c.seed = seed;
      const PathBundle flow = simulate_equilibrium_flow(master, c);
      const auto& traj = flow.paths[0];
      const int steps = static_cast<int>(flow.times.size()) - 1;
      bool ok = true;
      double worst = 0.0;
      for (int chk = 1; chk <= 10; ++chk) {
        const int k = steps * chk / 10;
        for (int a = 0; a < d; ++a) {
          const double z = traj(k, d0 + a);
          const double cm = traj(k, d0 + d + a);
          const double sd = traj(k, d0 + 2 * d + a);
          const double dev = std::abs(cm - z);
          const double lim = 3.0 * sd / std::sqrt(c.cloud_size) + 1e-12;
          worst = std::max(worst, lim > 0 ? dev / lim : 0.0);
          if (dev > lim) ok = false;
        }
      }
      add({"cloud-consistency", ok, false, worst, 1.0, ""});
    }

    {  // Monte Carlo cost identities and deviation profiles.
      SimConfig c = cfg;
      c.paths = std::min(cfg.paths, 4000);
      c.seed = seed;
      MinorFeedback eq = [&master](double t, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& x0,
                                   const Eigen::VectorXd& z) {
        return master.alpha_minor(t, x, x0, z);
      };
      MajorFeedback eq0 = [&master](double t, const Eigen::VectorXd& x0,
                                    const Eigen::VectorXd& z) {
        return master.alpha_major(t, x0, z);
      };
      const CostEstimate jm = estimate_minor_cost(master, eq, c);
      const double um = expected_minor_value(master, c);
      const double tol_m = 3.0 * jm.std_err + 1e-9;
      add({"cost-identity-minor", std::abs(jm.mean - um) <= tol_m, false,
           std::abs(jm.mean - um), tol_m, ""});

      const CostEstimate j0 = estimate_major_cost(master, eq0, c);
      const double u0v = major_value(master, c);
      const double tol_0 = 3.0 * j0.std_err + 1e-9;
      add({"cost-identity-major", std::abs(j0.mean - u0v) <= tol_0, false,
           std::abs(j0.mean - u0v), tol_0, ""});

      MinorFeedback ones = [d](double, const Eigen::VectorXd&,
                               const Eigen::VectorXd&,
                               const Eigen::VectorXd&) {
        return Eigen::VectorXd(Eigen::VectorXd::Ones(d));
      };
      MajorFeedback ones0 = [d0](double, const Eigen::VectorXd&,
                                 const Eigen::VectorXd&) {
        return Eigen::VectorXd(Eigen::VectorXd::Ones(d0));
      };
      const std::vector<double> eps = {-0.2, -0.1, 0.0, 0.1, 0.2};
      const DeviationReport dm =
          deviation_test(master, ones, ones0, eps, c, DeviationSide::Minor);
      add({"deviation-minor",
           dm.curvature > 0 && std::abs(dm.vertex) <= 0.05, false, dm.vertex,
           0.05, "curvature " + std::to_string(dm.curvature)});
      const DeviationReport d0r =
          deviation_test(master, ones, ones0, eps, c, DeviationSide::Major);
      add({"deviation-major",
           d0r.curvature > 0 && std::abs(d0r.vertex) <= 0.05, false,
           d0r.vertex, 0.05, "curvature " + std::to_string(d0r.curvature)});
    }
  } catch (const std::exception& e) {
    add({"master-solve", false, false, 0.0, 0.0, e.what()});
  }

  return rep;
}

}  // namespace mmfg
