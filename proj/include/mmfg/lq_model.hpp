#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>

#include "mmfg/measures.hpp"
#include "mmfg/quadratic.hpp"

namespace mmfg {

/// Linear-quadratic model family. Costs depend on the minor-player measure
/// only through its mean z:
///   f(x, x0, z)  = 0.5 (x - A z - B x0 - b)' Q (x - A z - B x0 - b)
///   G(x, x0, z)  = same with the T-subscripted data
///   f0(x0, z)    = 0.5 (x0 - A0 z - b0)' Q0 (x0 - A0 z - b0)
///   G0(x0, z)    = same with the T-subscripted data
/// Hamiltonians: H = 0.5|p|^2 - f, H0 = 0.5|p0|^2 - f0, so D_pH = p and the
/// Lagrangians are the exact conjugates L = 0.5|a|^2 + f, L0 = 0.5|a0|^2 + f0.
struct LqSpec {
  int d = 1;
  int d0 = 1;
  double T = 1.0;

  // Minor running cost.
  Eigen::MatrixXd Q, A, B;
  Eigen::VectorXd b;
  // Minor terminal cost.
  Eigen::MatrixXd Q_T, A_T, B_T;
  Eigen::VectorXd b_T;
  // Major running cost.
  Eigen::MatrixXd Q0, A0;
  Eigen::VectorXd b0;
  // Major terminal cost.
  Eigen::MatrixXd Q0_T, A0_T;
  Eigen::VectorXd b0_T;

  /// All-zero cost data of the given dimensions.
  static LqSpec Zero(int d, int d0, double T);

  /// Throws ConfigError on dimension inconsistency, non-symmetric or
  /// non-PSD cost matrices (eigenvalue tolerance -1e-10), or T <= 0.
  void validate() const;

  double f(const Eigen::VectorXd& x, const Eigen::VectorXd& x0,
           const Eigen::VectorXd& z) const;
  double G(const Eigen::VectorXd& x, const Eigen::VectorXd& x0,
           const Eigen::VectorXd& z) const;
  double f0(const Eigen::VectorXd& x0, const Eigen::VectorXd& z) const;
  double G0(const Eigen::VectorXd& x0, const Eigen::VectorXd& z) const;
};

double eval_H(const LqSpec& spec, const Eigen::VectorXd& x,
              const Eigen::VectorXd& x0, const Eigen::VectorXd& p,
              const Eigen::VectorXd& z);
Eigen::VectorXd eval_DpH(const LqSpec& spec, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& x0, const Eigen::VectorXd& p,
                         const Eigen::VectorXd& z);

double eval_H0(const LqSpec& spec, const Eigen::VectorXd& x0,
               const Eigen::VectorXd& p0, const Eigen::VectorXd& z);
Eigen::VectorXd eval_DpH0(const LqSpec& spec, const Eigen::VectorXd& x0,
                          const Eigen::VectorXd& p0, const Eigen::VectorXd& z);

double eval_L(const LqSpec& spec, const Eigen::VectorXd& x,
              const Eigen::VectorXd& x0, const Eigen::VectorXd& alpha,
              const Eigen::VectorXd& z);
double eval_L0(const LqSpec& spec, const Eigen::VectorXd& x0,
               const Eigen::VectorXd& alpha0, const Eigen::VectorXd& z);

/// L + H + alpha.p >= 0 (Fenchel-Young); equals 0.5|alpha + p|^2 here.
double fenchel_gap(const LqSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& x0, const Eigen::VectorXd& p,
                   const Eigen::VectorXd& alpha, const Eigen::VectorXd& z);

/// A differentiable function of the mean vector, with analytic gradient.
struct MeanFunctional {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
};

struct MeasureDerivative {
  double flat;              // dU/dm(m, y), normalized to integrate to 0 vs m
  Eigen::VectorXd lderiv;   // D_m U(m, y); constant in y under the closure
};

/// Measure derivatives of U(m) = phi(mean(m)):
///   flat(y)  = Dphi(z).(y - z)   with z = mean(m)
///   lderiv   = Dphi(z)
MeasureDerivative lderivative_mean_functional(const MeanFunctional& phi,
                                              const EmpiricalMeasure& m,
                                              const Eigen::VectorXd& y);

}  // namespace mmfg
