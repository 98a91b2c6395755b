#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mmfg/master_solver.hpp"
#include "mmfg/nash_solver.hpp"
#include "mmfg/rng.hpp"

namespace mmfg {

/// Initial law of the minor players.
struct Mu0 {
  enum class Type { Uniform, Gaussian };
  Type type = Type::Uniform;
  Eigen::VectorXd low, high;  // Uniform[low, high]^d, componentwise
  Eigen::VectorXd mean;       // Gaussian(mean, std^2 I)
  double std = 1.0;

  static Mu0 UniformBox(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
  static Mu0 GaussianIso(const Eigen::VectorXd& mean, double std);

  void validate(int d) const;
  Eigen::VectorXd distribution_mean() const;
  Eigen::MatrixXd distribution_cov() const;
  Eigen::VectorXd sample(const NoiseStream& stream) const;
};

struct SimConfig {
  double dt = 1e-3;
  int paths = 10000;
  uint64_t seed = 0;
  Mu0 mu0;
  Eigen::VectorXd x0_init;
  int cloud_size = 0;  // 0 = use the closed mean ODE only

  void validate(int d, int d0) const;
};

/// Monte Carlo cost estimate with its standard error.
struct CostEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  int paths = 0;
};

/// Time-gridded per-path trajectories with labeled columns.
struct PathBundle {
  std::vector<double> times;
  std::vector<std::string> columns;
  std::vector<Eigen::MatrixXd> paths;  // (times.size() x columns.size()) each
  // Unit-normal driving increments, retained when requested:
  // one (steps x columns) matrix per path.
  std::vector<Eigen::MatrixXd> noise;
};

using MinorFeedback = std::function<Eigen::VectorXd(
    double t, const Eigen::VectorXd& x, const Eigen::VectorXd& x0,
    const Eigen::VectorXd& z)>;
using MajorFeedback = std::function<Eigen::VectorXd(
    double t, const Eigen::VectorXd& x0, const Eigen::VectorXd& z)>;

/// Euler-Maruyama simulation of the N+1 particle system driven by the
/// finite-N equilibrium feedbacks, diffusion sqrt(2) per player. When
/// `noise` is non-null it supplies the unit-normal increments (one row per
/// step, one column per state coordinate) instead of the counter RNG.
PathBundle simulate_coupled_particles(
    const NashSolution& sol, const Eigen::VectorXd& X_init,
    const SimConfig& cfg, bool retain_noise = false,
    const std::vector<Eigen::MatrixXd>* noise = nullptr);

/// The equilibrium flow (X0_bar, z): Euler-Maruyama for the major state,
/// classical RK4 for the mean ODE dz/dt = alpha_bar(t, z, X0_bar, z). With
/// cloud_size > 0 a particle cloud sharing X0_bar is evolved alongside and
/// its per-coordinate mean and standard deviation are recorded.
PathBundle simulate_equilibrium_flow(const MasterSolution& sol,
                                     const SimConfig& cfg);

/// J(alpha; alpha0_bar, m_bar): the deviating minor player faces the frozen
/// equilibrium flow. Trapezoidal running-cost quadrature.
CostEstimate estimate_minor_cost(const MasterSolution& sol,
                                 const MinorFeedback& alpha,
                                 const SimConfig& cfg);

/// J0(alpha_bar; alpha0): the mean flow responds to the deviating major
/// state through dz/dt = alpha_bar(t, z, X0, z).
CostEstimate estimate_major_cost(const MasterSolution& sol,
                                 const MajorFeedback& alpha0,
                                 const SimConfig& cfg);

enum class DeviationSide { Minor, Major };

struct DeviationReport {
  std::vector<double> eps;
  std::vector<CostEstimate> cost;
  double curvature = 0.0;  // second derivative of the fitted quadratic
  double vertex = 0.0;     // argmin of the fitted quadratic
};

/// Cost profile along alpha + eps*g with common random numbers across eps.
DeviationReport deviation_test(const MasterSolution& sol,
                               const MinorFeedback& g_minor,
                               const MajorFeedback& g_major,
                               const std::vector<double>& eps_list,
                               const SimConfig& cfg, DeviationSide side);

/// E_{mu0}[U(0, X0, x0_init, mean mu0)], evaluated in closed form.
double expected_minor_value(const MasterSolution& sol, const SimConfig& cfg);
/// U0(0, x0_init, mean mu0).
double major_value(const MasterSolution& sol, const SimConfig& cfg);

}  // namespace mmfg
