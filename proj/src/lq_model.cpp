#include "mmfg/lq_model.hpp"

#include <Eigen/Eigenvalues>

#include "mmfg/errors.hpp"

namespace mmfg {

namespace {

double quad_cost(const Eigen::VectorXd& resid, const Eigen::MatrixXd& Q) {
  return 0.5 * resid.dot(Q * resid);
}

void check_psd(const Eigen::MatrixXd& M, int n, const std::string& name) {
  if (M.rows() != n || M.cols() != n)
    throw ConfigError(name + ": expected " + std::to_string(n) + "x" +
                      std::to_string(n) + " matrix");
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw ConfigError(name + ": not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw ConfigError(name + ": not positive semidefinite");
}

void check_shape(const Eigen::MatrixXd& M, int r, int c,
                 const std::string& name) {
  if (M.rows() != r || M.cols() != c)
    throw ConfigError(name + ": expected " + std::to_string(r) + "x" +
                      std::to_string(c) + " matrix");
}

void check_vec(const Eigen::VectorXd& v, int n, const std::string& name) {
  if (v.size() != n)
    throw ConfigError(name + ": expected vector of length " +
                      std::to_string(n));
}

void require_dim(const Eigen::VectorXd& v, int n, const char* name) {
  if (v.size() != n)
    throw std::invalid_argument(std::string(name) + ": dimension mismatch");
}

}  // namespace

LqSpec LqSpec::Zero(int d, int d0, double T) {
  LqSpec s;
  s.d = d;
  s.d0 = d0;
  s.T = T;
  s.Q = s.Q_T = Eigen::MatrixXd::Zero(d, d);
  s.A = s.A_T = Eigen::MatrixXd::Zero(d, d);
  s.B = s.B_T = Eigen::MatrixXd::Zero(d, d0);
  s.b = s.b_T = Eigen::VectorXd::Zero(d);
  s.Q0 = s.Q0_T = Eigen::MatrixXd::Zero(d0, d0);
  s.A0 = s.A0_T = Eigen::MatrixXd::Zero(d0, d);
  s.b0 = s.b0_T = Eigen::VectorXd::Zero(d0);
  return s;
}

void LqSpec::validate() const {
  if (d < 1 || d0 < 1) throw ConfigError("LqSpec: dimensions must be >= 1");
  if (!(T > 0)) throw ConfigError("LqSpec: horizon T must be > 0");
  check_psd(Q, d, "Q");
  check_psd(Q_T, d, "QT");
  check_psd(Q0, d0, "Q0");
  check_psd(Q0_T, d0, "Q0T");
  check_shape(A, d, d, "A");
  check_shape(A_T, d, d, "AT");
  check_shape(B, d, d0, "B");
  check_shape(B_T, d, d0, "BT");
  check_vec(b, d, "b");
  check_vec(b_T, d, "bT");
  check_shape(A0, d0, d, "A0");
  check_shape(A0_T, d0, d, "A0T");
  check_vec(b0, d0, "b0");
  check_vec(b0_T, d0, "b0T");
}

double LqSpec::f(const Eigen::VectorXd& x, const Eigen::VectorXd& x0,
                 const Eigen::VectorXd& z) const {
  return quad_cost(x - A * z - B * x0 - b, Q);
}

double LqSpec::G(const Eigen::VectorXd& x, const Eigen::VectorXd& x0,
                 const Eigen::VectorXd& z) const {
  return quad_cost(x - A_T * z - B_T * x0 - b_T, Q_T);
}

double LqSpec::f0(const Eigen::VectorXd& x0, const Eigen::VectorXd& z) const {
  return quad_cost(x0 - A0 * z - b0, Q0);
}

double LqSpec::G0(const Eigen::VectorXd& x0, const Eigen::VectorXd& z) const {
  return quad_cost(x0 - A0_T * z - b0_T, Q0_T);
}

double eval_H(const LqSpec& spec, const Eigen::VectorXd& x,
              const Eigen::VectorXd& x0, const Eigen::VectorXd& p,
              const Eigen::VectorXd& z) {
  require_dim(x, spec.d, "eval_H(x)");
  require_dim(x0, spec.d0, "eval_H(x0)");
  require_dim(p, spec.d, "eval_H(p)");
  require_dim(z, spec.d, "eval_H(z)");
  return 0.5 * p.squaredNorm() - spec.f(x, x0, z);
}

Eigen::VectorXd eval_DpH(const LqSpec& spec, const Eigen::VectorXd&,
                         const Eigen::VectorXd&, const Eigen::VectorXd& p,
                         const Eigen::VectorXd&) {
  require_dim(p, spec.d, "eval_DpH(p)");
  return p;
}

double eval_H0(const LqSpec& spec, const Eigen::VectorXd& x0,
               const Eigen::VectorXd& p0, const Eigen::VectorXd& z) {
  require_dim(x0, spec.d0, "eval_H0(x0)");
  require_dim(p0, spec.d0, "eval_H0(p0)");
  require_dim(z, spec.d, "eval_H0(z)");
  return 0.5 * p0.squaredNorm() - spec.f0(x0, z);
}

Eigen::VectorXd eval_DpH0(const LqSpec& spec, const Eigen::VectorXd&,
                          const Eigen::VectorXd& p0, const Eigen::VectorXd&) {
  require_dim(p0, spec.d0, "eval_DpH0(p0)");
  return p0;
}

double eval_L(const LqSpec& spec, const Eigen::VectorXd& x,
              const Eigen::VectorXd& x0, const Eigen::VectorXd& alpha,
              const Eigen::VectorXd& z) {
  require_dim(alpha, spec.d, "eval_L(alpha)");
  require_dim(x, spec.d, "eval_L(x)");
  return 0.5 * alpha.squaredNorm() + spec.f(x, x0, z);
}

double eval_L0(const LqSpec& spec, const Eigen::VectorXd& x0,
               const Eigen::VectorXd& alpha0, const Eigen::VectorXd& z) {
  require_dim(alpha0, spec.d0, "eval_L0(alpha0)");
  require_dim(x0, spec.d0, "eval_L0(x0)");
  return 0.5 * alpha0.squaredNorm() + spec.f0(x0, z);
}

double fenchel_gap(const LqSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& x0, const Eigen::VectorXd& p,
                   const Eigen::VectorXd& alpha, const Eigen::VectorXd& z) {
  return eval_L(spec, x, x0, alpha, z) + eval_H(spec, x, x0, p, z) +
         alpha.dot(p);
}

MeasureDerivative lderivative_mean_functional(const MeanFunctional& phi,
                                              const EmpiricalMeasure& m,
                                              const Eigen::VectorXd& y) {
  if (y.size() != m.dim())
    throw std::invalid_argument(
        "lderivative_mean_functional: dimension mismatch");
  const Eigen::VectorXd z = m.mean();
  const Eigen::VectorXd g = phi.grad(z);
  return {g.dot(y - z), g};
}

}  // namespace mmfg
