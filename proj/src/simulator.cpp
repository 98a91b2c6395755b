#include "mmfg/simulator.hpp"

#include <cmath>
#include <stdexcept>

#include "mmfg/errors.hpp"
#include "mmfg/lq_model.hpp"

namespace mmfg {

namespace {

constexpr double kDivergenceBound = 1e6;
constexpr uint64_t kInitStep = 0x7fffffffffff0000ULL;
constexpr uint64_t kCloudPlayerBase = 1000000;

struct Grid {
  int steps;
  double dt;
};

Grid make_grid(double T, double dt) {
  const int steps = std::max(1, static_cast<int>(std::llround(T / dt)));
  return {steps, T / steps};
}

void check_finite(const Eigen::VectorXd& v, double t) {
  if (!v.allFinite() || v.cwiseAbs().maxCoeff() > kDivergenceBound)
    throw SimulationDiverged("simulation diverged at t = " +
                             std::to_string(t));
}

// One RK4 step of dz/dt = a(t, z) with the major state frozen.
template <typename F>
Eigen::VectorXd rk4_vec(const F& a, double t, const Eigen::VectorXd& z,
                        double h) {
  const Eigen::VectorXd k1 = a(t, z);
  const Eigen::VectorXd k2 = a(t + h / 2, z + (h / 2) * k1);
  const Eigen::VectorXd k3 = a(t + h / 2, z + (h / 2) * k2);
  const Eigen::VectorXd k4 = a(t + h, z + h * k3);
  return z + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

CostEstimate summarize(const std::vector<double>& samples) {
  const int n = static_cast<int>(samples.size());
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= n;
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  var = n > 1 ? var / (n - 1) : 0.0;
  return {mean, std::sqrt(var / n), n};
}

}  // namespace

Mu0 Mu0::UniformBox(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  Mu0 m;
  m.type = Type::Uniform;
  m.low = lo;
  m.high = hi;
  return m;
}

Mu0 Mu0::GaussianIso(const Eigen::VectorXd& mean, double std) {
  Mu0 m;
  m.type = Type::Gaussian;
  m.mean = mean;
  m.std = std;
  return m;
}

void Mu0::validate(int d) const {
  if (type == Type::Uniform) {
    if (low.size() != d || high.size() != d)
      throw ConfigError("mu0: uniform bounds must have length d");
    if (!(low.array() < high.array()).all())
      throw ConfigError("mu0: uniform requires low < high componentwise");
  } else {
    if (mean.size() != d) throw ConfigError("mu0: mean must have length d");
    if (!(std > 0)) throw ConfigError("mu0: gaussian std must be > 0");
  }
}

Eigen::VectorXd Mu0::distribution_mean() const {
  return type == Type::Uniform ? Eigen::VectorXd(0.5 * (low + high)) : mean;
}

Eigen::MatrixXd Mu0::distribution_cov() const {
  if (type == Type::Uniform) {
    const Eigen::VectorXd w = high - low;
    return (w.array().square() / 12.0).matrix().asDiagonal();
  }
  const int d = static_cast<int>(mean.size());
  return std * std * Eigen::MatrixXd::Identity(d, d);
}

Eigen::VectorXd Mu0::sample(const NoiseStream& stream) const {
  if (type == Type::Uniform) {
    const int d = static_cast<int>(low.size());
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) {
      const double u =
          stream.uniform(2 * (kInitStep * 0x100000001b3ULL + i));
      x[i] = low[i] + (high[i] - low[i]) * u;
    }
    return x;
  }
  const int d = static_cast<int>(mean.size());
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x[i] = mean[i] + std * stream.normal(kInitStep, i);
  return x;
}

void SimConfig::validate(int d, int d0) const {
  if (!(dt > 0)) throw ConfigError("SimConfig: dt must be > 0");
  if (paths < 1) throw ConfigError("SimConfig: paths must be >= 1");
  if (cloud_size < 0) throw ConfigError("SimConfig: cloud_size must be >= 0");
  if (x0_init.size() != d0)
    throw ConfigError("SimConfig: x0_init must have length d0");
  mu0.validate(d);
}

PathBundle simulate_coupled_particles(
    const NashSolution& sol, const Eigen::VectorXd& X_init,
    const SimConfig& cfg, bool retain_noise,
    const std::vector<Eigen::MatrixXd>* noise) {
  const LqSpec& spec = sol.spec();
  cfg.validate(spec.d, spec.d0);
  const int D = sol.D(), N = sol.N();
  if (X_init.size() != D)
    throw std::invalid_argument(
        "simulate_coupled_particles: X_init dimension mismatch");
  const Grid g = make_grid(spec.T, cfg.dt);

  // Per-step equilibrium drift operator: drift(X) = -(Wd X + wd), where the
  // block row of player i comes from its own value function.
  std::vector<Eigen::MatrixXd> Wd(g.steps);
  std::vector<Eigen::VectorXd> wd(g.steps);
  for (int k = 0; k < g.steps; ++k) {
    const double t = k * g.dt;
    Wd[k].resize(D, D);
    wd[k].resize(D);
    for (int i = 0; i <= N; ++i) {
      const QuadraticForm q = sol.interp(i, t);
      const int o = sol.block_offset(i), len = sol.block_dim(i);
      Wd[k].middleRows(o, len) = q.M.middleRows(o, len);
      wd[k].segment(o, len) = q.l.segment(o, len);
    }
  }

  PathBundle out;
  out.times.resize(g.steps + 1);
  for (int k = 0; k <= g.steps; ++k) out.times[k] = k * g.dt;
  out.columns.resize(D);
  for (int a = 0; a < spec.d0; ++a)
    out.columns[a] = "x0_" + std::to_string(a);
  for (int i = 1; i <= N; ++i)
    for (int a = 0; a < spec.d; ++a)
      out.columns[sol.block_offset(i) + a] =
          "x" + std::to_string(i) + "_" + std::to_string(a);
  out.paths.resize(cfg.paths);
  if (retain_noise) out.noise.resize(cfg.paths);

  const double sq = std::sqrt(2.0 * g.dt);
  for (int p = 0; p < cfg.paths; ++p) {
    std::vector<NoiseStream> streams;
    streams.reserve(N + 1);
    for (int i = 0; i <= N; ++i) streams.emplace_back(cfg.seed, p, i);

    Eigen::MatrixXd traj(g.steps + 1, D);
    Eigen::MatrixXd xi_mat;
    if (retain_noise) xi_mat.resize(g.steps, D);
    Eigen::VectorXd X = X_init;
    traj.row(0) = X;
    for (int k = 0; k < g.steps; ++k) {
      Eigen::VectorXd xi(D);
      if (noise) {
        xi = (*noise)[p].row(k);
      } else {
        for (int i = 0; i <= N; ++i) {
          const int o = sol.block_offset(i), len = sol.block_dim(i);
          for (int a = 0; a < len; ++a)
            xi[o + a] = streams[i].normal(k, a);
        }
      }
      if (retain_noise) xi_mat.row(k) = xi;
      X += g.dt * (-(Wd[k] * X + wd[k])) + sq * xi;
      check_finite(X, (k + 1) * g.dt);
      traj.row(k + 1) = X;
    }
    out.paths[p] = std::move(traj);
    if (retain_noise) out.noise[p] = std::move(xi_mat);
  }
  return out;
}

PathBundle simulate_equilibrium_flow(const MasterSolution& sol,
                                     const SimConfig& cfg) {
  const LqSpec& spec = sol.spec();
  cfg.validate(spec.d, spec.d0);
  const int d = spec.d, d0 = spec.d0;
  const Grid g = make_grid(spec.T, cfg.dt);
  const bool cloud = cfg.cloud_size > 0;

  PathBundle out;
  out.times.resize(g.steps + 1);
  for (int k = 0; k <= g.steps; ++k) out.times[k] = k * g.dt;
  for (int a = 0; a < d0; ++a) out.columns.push_back("x0_" + std::to_string(a));
  for (int a = 0; a < d; ++a) out.columns.push_back("z_" + std::to_string(a));
  if (cloud) {
    for (int a = 0; a < d; ++a)
      out.columns.push_back("cloud_mean_" + std::to_string(a));
    for (int a = 0; a < d; ++a)
      out.columns.push_back("cloud_sd_" + std::to_string(a));
  }
  out.paths.resize(cfg.paths);

  const double sq = std::sqrt(2.0 * g.dt);
  const Eigen::VectorXd z0 = cfg.mu0.distribution_mean();
  const int W = static_cast<int>(out.columns.size());

  for (int p = 0; p < cfg.paths; ++p) {
    NoiseStream major(cfg.seed, p, 0);
    Eigen::VectorXd x0 = cfg.x0_init, z = z0;
    Eigen::MatrixXd particles;
    std::vector<NoiseStream> cstreams;
    if (cloud) {
      particles.resize(cfg.cloud_size, d);
      cstreams.reserve(cfg.cloud_size);
      for (int c = 0; c < cfg.cloud_size; ++c) {
        cstreams.emplace_back(cfg.seed, p, kCloudPlayerBase + c);
        particles.row(c) = cfg.mu0.sample(cstreams.back());
      }
    }

    Eigen::MatrixXd traj(g.steps + 1, W);
    auto record = [&](int k) {
      traj.block(k, 0, 1, d0) = x0.transpose();
      traj.block(k, d0, 1, d) = z.transpose();
      if (cloud) {
        const Eigen::RowVectorXd cm = particles.colwise().mean();
        const Eigen::RowVectorXd sd =
            ((particles.rowwise() - cm).array().square().colwise().sum() /
             std::max(1, cfg.cloud_size - 1))
                .sqrt();
        traj.block(k, d0 + d, 1, d) = cm;
        traj.block(k, d0 + 2 * d, 1, d) = sd;
      }
    };
    record(0);

    for (int k = 0; k < g.steps; ++k) {
      const double t = k * g.dt;
      const Eigen::VectorXd x0_frozen = x0;
      if (cloud) {
        for (int c = 0; c < cfg.cloud_size; ++c) {
          Eigen::VectorXd y = particles.row(c);
          Eigen::VectorXd xi(d);
          for (int a = 0; a < d; ++a) xi[a] = cstreams[c].normal(k, a);
          y += g.dt * sol.alpha_minor(t, y, x0_frozen, z) + sq * xi;
          particles.row(c) = y;
        }
      }
      Eigen::VectorXd xi0(d0);
      for (int a = 0; a < d0; ++a) xi0[a] = major.normal(k, a);
      x0 += g.dt * sol.alpha_major(t, x0, z) + sq * xi0;
      z = rk4_vec(
          [&](double tt, const Eigen::VectorXd& zz) {
            return sol.alpha_minor(tt, zz, x0_frozen, zz);
          },
          t, z, g.dt);
      check_finite(x0, t + g.dt);
      check_finite(z, t + g.dt);
      record(k + 1);
    }
    out.paths[p] = std::move(traj);
  }
  return out;
}

CostEstimate estimate_minor_cost(const MasterSolution& sol,
                                 const MinorFeedback& alpha,
                                 const SimConfig& cfg) {
  const LqSpec& spec = sol.spec();
  cfg.validate(spec.d, spec.d0);
  const int d = spec.d, d0 = spec.d0;
  const Grid g = make_grid(spec.T, cfg.dt);
  const double sq = std::sqrt(2.0 * g.dt);
  const Eigen::VectorXd z0 = cfg.mu0.distribution_mean();

  std::vector<double> samples(cfg.paths);
  for (int p = 0; p < cfg.paths; ++p) {
    NoiseStream major(cfg.seed, p, 0);
    NoiseStream minor(cfg.seed, p, 1);
    Eigen::VectorXd x0 = cfg.x0_init, z = z0;
    Eigen::VectorXd X = cfg.mu0.sample(minor);

    double run = 0.0;
    double prev = 0.0;
    {
      const Eigen::VectorXd a = alpha(0.0, X, x0, z);
      prev = eval_L(spec, X, x0, a, z);
    }
    for (int k = 0; k < g.steps; ++k) {
      const double t = k * g.dt;
      const Eigen::VectorXd x0_frozen = x0;
      // Minor state under the candidate feedback.
      Eigen::VectorXd xi(d);
      for (int a = 0; a < d; ++a) xi[a] = minor.normal(k, a);
      X += g.dt * alpha(t, X, x0, z) + sq * xi;
      // Frozen equilibrium flow.
      Eigen::VectorXd xi0(d0);
      for (int a = 0; a < d0; ++a) xi0[a] = major.normal(k, a);
      x0 += g.dt * sol.alpha_major(t, x0, z) + sq * xi0;
      z = rk4_vec(
          [&](double tt, const Eigen::VectorXd& zz) {
            return sol.alpha_minor(tt, zz, x0_frozen, zz);
          },
          t, z, g.dt);
      check_finite(X, t + g.dt);
      check_finite(x0, t + g.dt);

      const double tn = (k + 1) * g.dt;
      const Eigen::VectorXd a = alpha(tn, X, x0, z);
      const double cur = eval_L(spec, X, x0, a, z);
      run += 0.5 * g.dt * (prev + cur);
      prev = cur;
    }
    const double total = run + spec.G(X, x0, z);
    if (!std::isfinite(total))
      throw SimulationDiverged("estimate_minor_cost: non-finite cost");
    samples[p] = total;
  }
  return summarize(samples);
}

CostEstimate estimate_major_cost(const MasterSolution& sol,
                                 const MajorFeedback& alpha0,
                                 const SimConfig& cfg) {
  const LqSpec& spec = sol.spec();
  cfg.validate(spec.d, spec.d0);
  const int d0 = spec.d0;
  const Grid g = make_grid(spec.T, cfg.dt);
  const double sq = std::sqrt(2.0 * g.dt);
  const Eigen::VectorXd z0 = cfg.mu0.distribution_mean();

  std::vector<double> samples(cfg.paths);
  for (int p = 0; p < cfg.paths; ++p) {
    NoiseStream major(cfg.seed, p, 0);
    Eigen::VectorXd x0 = cfg.x0_init, z = z0;

    double run = 0.0;
    double prev = eval_L0(spec, x0, alpha0(0.0, x0, z), z);
    for (int k = 0; k < g.steps; ++k) {
      const double t = k * g.dt;
      const Eigen::VectorXd x0_frozen = x0;
      Eigen::VectorXd xi0(d0);
      for (int a = 0; a < d0; ++a) xi0[a] = major.normal(k, a);
      x0 += g.dt * alpha0(t, x0, z) + sq * xi0;
      // Minors keep the equilibrium feedback but the mean responds to the
      // deviating major state.
      z = rk4_vec(
          [&](double tt, const Eigen::VectorXd& zz) {
            return sol.alpha_minor(tt, zz, x0_frozen, zz);
          },
          t, z, g.dt);
      check_finite(x0, t + g.dt);

      const double tn = (k + 1) * g.dt;
      const double cur = eval_L0(spec, x0, alpha0(tn, x0, z), z);
      run += 0.5 * g.dt * (prev + cur);
      prev = cur;
    }
    const double total = run + spec.G0(x0, z);
    if (!std::isfinite(total))
      throw SimulationDiverged("estimate_major_cost: non-finite cost");
    samples[p] = total;
  }
  return summarize(samples);
}

DeviationReport deviation_test(const MasterSolution& sol,
                               const MinorFeedback& g_minor,
                               const MajorFeedback& g_major,
                               const std::vector<double>& eps_list,
                               const SimConfig& cfg, DeviationSide side) {
  DeviationReport rep;
  rep.eps = eps_list;
  for (double e : eps_list) {
    if (side == DeviationSide::Minor) {
      MinorFeedback a = [&sol, &g_minor, e](double t, const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& x0,
                                            const Eigen::VectorXd& z) {
        return Eigen::VectorXd(sol.alpha_minor(t, x, x0, z) +
                               e * g_minor(t, x, x0, z));
      };
      rep.cost.push_back(estimate_minor_cost(sol, a, cfg));
    } else {
      MajorFeedback a = [&sol, &g_major, e](double t,
                                            const Eigen::VectorXd& x0,
                                            const Eigen::VectorXd& z) {
        return Eigen::VectorXd(sol.alpha_major(t, x0, z) +
                               e * g_major(t, x0, z));
      };
      rep.cost.push_back(estimate_major_cost(sol, a, cfg));
    }
  }

  // Least-squares quadratic fit J(eps) = a eps^2 + b eps + c.
  const int n = static_cast<int>(eps_list.size());
  Eigen::MatrixXd V(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    V(i, 0) = eps_list[i] * eps_list[i];
    V(i, 1) = eps_list[i];
    V(i, 2) = 1.0;
    y[i] = rep.cost[i].mean;
  }
  const Eigen::VectorXd coef = V.colPivHouseholderQr().solve(y);
  rep.curvature = 2.0 * coef[0];
  rep.vertex = coef[0] != 0.0 ? -coef[1] / (2.0 * coef[0]) : 0.0;
  return rep;
}

double expected_minor_value(const MasterSolution& sol, const SimConfig& cfg) {
  const LqSpec& spec = sol.spec();
  cfg.validate(spec.d, spec.d0);
  const Eigen::VectorXd z0 = cfg.mu0.distribution_mean();
  const MasterEval ev = eval_master(sol, 0.0, z0, cfg.x0_init, z0);
  const Eigen::MatrixXd Kxx = ev.hessU.block(0, 0, spec.d, spec.d);
  return ev.U + 0.5 * (Kxx * cfg.mu0.distribution_cov()).trace();
}

double major_value(const MasterSolution& sol, const SimConfig& cfg) {
  const LqSpec& spec = sol.spec();
  cfg.validate(spec.d, spec.d0);
  return eval_master(sol, 0.0, cfg.mu0.distribution_mean(), cfg.x0_init,
                     cfg.mu0.distribution_mean())
      .U0;
}

}  // namespace mmfg
