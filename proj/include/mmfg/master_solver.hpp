#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "mmfg/lq_model.hpp"
#include "mmfg/quadratic.hpp"

namespace mmfg {

/// Pointwise evaluation of the limiting value functions and their
/// derivatives. U lives on (x, x0, z), U0 on (x0, z).
struct MasterEval {
  double U = 0.0;
  double U0 = 0.0;
  Eigen::VectorXd DxU, Dx0U, DzU;
  Eigen::VectorXd Dx0U0, DzU0;
  Eigen::MatrixXd hessU;   // stacked (x, x0, z) blocks
  Eigen::MatrixXd hessU0;  // stacked (x0, z) blocks
};

/// Backward-in-time coefficient trajectories of the quadratic forms
/// U0(t, x0, z) and U(t, x, x0, z). Stacked variable layouts:
///   U  : w  = (x, x0, z), size d + d0 + d
///   U0 : w0 = (x0, z),    size d0 + d
/// Coefficients and their ODE right-hand sides are stored on a uniform grid;
/// off-grid evaluation uses cubic Hermite interpolation.
class MasterSolution {
 public:
  MasterSolution(LqSpec spec, int nt);

  const LqSpec& spec() const { return spec_; }
  int nt() const { return nt_; }
  double T() const { return spec_.T; }
  double grid_time(int k) const { return spec_.T * k / nt_; }

  const QuadraticForm& u_at(int k) const { return u_[k]; }
  const QuadraticForm& u0_at(int k) const { return u0_[k]; }
  const QuadraticForm& du_at(int k) const { return du_[k]; }
  const QuadraticForm& du0_at(int k) const { return du0_[k]; }

  /// Hermite-interpolated coefficient forms and their time derivatives.
  QuadraticForm u_interp(double t) const;
  QuadraticForm u0_interp(double t) const;
  QuadraticForm du_interp(double t) const;
  QuadraticForm du0_interp(double t) const;

  // Named coefficient blocks at grid index k.
  Eigen::MatrixXd K_xx(int k) const { return u_[k].M.block(0, 0, d(), d()); }
  Eigen::MatrixXd K_zz(int k) const {
    return u_[k].M.block(d() + d0(), d() + d0(), d(), d());
  }
  Eigen::MatrixXd P_00(int k) const { return u0_[k].M.block(0, 0, d0(), d0()); }
  Eigen::MatrixXd P_zz(int k) const {
    return u0_[k].M.block(d0(), d0(), d(), d());
  }
  double k_c(int k) const { return u_[k].c; }
  double p_c(int k) const { return u0_[k].c; }

  int d() const { return spec_.d; }
  int d0() const { return spec_.d0; }
  int n() const { return 2 * spec_.d + spec_.d0; }
  int n0() const { return spec_.d0 + spec_.d; }

  /// Equilibrium feedbacks of the verification argument.
  Eigen::VectorXd alpha_minor(double t, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& x0,
                              const Eigen::VectorXd& z) const;
  Eigen::VectorXd alpha_major(double t, const Eigen::VectorXd& x0,
                              const Eigen::VectorXd& z) const;

  friend MasterSolution solve_master(const LqSpec& spec, int nt);

 private:
  LqSpec spec_;
  int nt_;
  std::vector<QuadraticForm> u0_, u_, du0_, du_, ddu0_, ddu_;
};

/// Integrates the reduced coefficient ODEs backward from the terminal data
/// with fixed-step classical RK4. Throws BlowUpError if any coefficient
/// exceeds 1e8 in absolute value, ConfigError on invalid spec.
MasterSolution solve_master(const LqSpec& spec, int nt);

MasterEval eval_master(const MasterSolution& sol, double t,
                       const Eigen::VectorXd& x, const Eigen::VectorXd& x0,
                       const Eigen::VectorXd& z);

/// Left-hand sides of the two reduced master equations at a point; the time
/// derivative comes from the stored ODE right-hand sides.
std::pair<double, double> master_residual(const MasterSolution& sol, double t,
                                          const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& x0,
                                          const Eigen::VectorXd& z);

}  // namespace mmfg
