#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mmfg/lq_model.hpp"
#include "mmfg/master_solver.hpp"
#include "mmfg/quadratic.hpp"

namespace mmfg {

/// Exact quadratic-ansatz solution of the finite-N Nash system in the
/// stacked state X = (x0, x1..xN), D = d0 + N d. Player 0 is the major
/// player. Coefficients are stored on a (possibly thinned) uniform grid
/// together with their ODE right-hand sides; off-grid evaluation uses cubic
/// Hermite interpolation on the stored grid.
class NashSolution {
 public:
  NashSolution(LqSpec spec, int N, int nt, int store_stride);

  const LqSpec& spec() const { return spec_; }
  int N() const { return N_; }
  int nt() const { return nt_; }
  double T() const { return spec_.T; }
  int D() const { return spec_.d0 + N_ * spec_.d; }

  /// Offset of player i's block inside the stacked variable.
  int block_offset(int i) const {
    return i == 0 ? 0 : spec_.d0 + (i - 1) * spec_.d;
  }
  int block_dim(int i) const { return i == 0 ? spec_.d0 : spec_.d; }

  int stored_points() const { return static_cast<int>(y_.size()); }
  double stored_time(int k) const {
    return spec_.T * k * store_stride_ / nt_;
  }
  const QuadraticForm& coeff_at(int k, int i) const { return y_[k][i]; }
  const QuadraticForm& dcoeff_at(int k, int i) const { return dy_[k][i]; }
  const QuadraticForm& ddcoeff_at(int k, int i) const { return ddy_[k][i]; }

  /// Interpolated coefficient form of player i (and its time derivative).
  QuadraticForm interp(int i, double t) const;
  QuadraticForm interp_derivative(int i, double t) const;

  friend NashSolution solve_nash(const LqSpec& spec, int N, int nt,
                                 int store_stride);

 private:
  LqSpec spec_;
  int N_, nt_, store_stride_;
  std::vector<std::vector<QuadraticForm>> y_, dy_, ddy_;
};

/// Backward RK4 integration of the coupled coefficient ODEs of all N+1
/// value functions. store_stride thins the stored grid (nt must be a
/// multiple of it); integration always runs at step T/nt.
NashSolution solve_nash(const LqSpec& spec, int N, int nt,
                        int store_stride = 1);

struct NashEval {
  double value;
  Eigen::VectorXd grad;  // full stacked gradient
};

NashEval eval_nash(const NashSolution& sol, int i, double t,
                   const Eigen::VectorXd& X);

/// Left-hand side of Nash equation i at (t, X); time derivative from the
/// stored ODE right-hand sides.
double nash_residual(const NashSolution& sol, int i, double t,
                     const Eigen::VectorXd& X);

/// Projection of the master solution onto the finite-N state space:
/// v^0 = U0(t, x0, m^N), v^i = U(t, x_i, x0, m^{N,i}), together with the
/// Nash-system left-hand sides r^i they generate.
struct Lemma32Report {
  std::vector<double> v;  // i = 0..N
  std::vector<double> r;
};

Lemma32Report project_master_lemma32(const MasterSolution& sol, int N,
                                     double t, const Eigen::VectorXd& X);

/// Central-difference verification of the projection derivative identities.
/// Relative errors use denominator max(1, |analytic|).
struct ProjectionIdentityReport {
  double max_rel_grad_major;   // D_x0 v^0 vs D_x0 U0 (exact identity)
  double max_rel_grad_scaled;  // D_xi v^0 vs (1/N) D_z U0 and minor analogue
  double max_rel_hess_scaled;  // second derivatives vs scaled D_zz blocks
  double max_rel() const {
    return std::max({max_rel_grad_major, max_rel_grad_scaled,
                     max_rel_hess_scaled});
  }
};

ProjectionIdentityReport projection_identity_check(const MasterSolution& sol,
                                                   int N, double t,
                                                   const Eigen::VectorXd& X,
                                                   double h = 1e-4);

}  // namespace mmfg
