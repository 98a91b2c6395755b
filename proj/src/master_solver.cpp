#include "mmfg/master_solver.hpp"

#include <cmath>
#include <stdexcept>

#include "mmfg/errors.hpp"

namespace mmfg {

namespace {

constexpr double kBlowUpThreshold = 1e8;

struct MasterState {
  QuadraticForm u0, u;

  MasterState& axpy(double a, const MasterState& o) {
    u0 += a * o.u0;
    u += a * o.u;
    return *this;
  }
  double maxAbsCoeff() const {
    return std::max(u0.maxAbsCoeff(), u.maxAbsCoeff());
  }
};

// Assembles the coefficient ODE right-hand sides by polynomial
// identification: every term of the reduced equations is a Laplacian trace,
// a squared affine gradient, a quadratic cost, or a dot product of affine
// gradients, each of which maps to an exact quadratic form in the stacked
// variable.
class MasterRhs {
 public:
  explicit MasterRhs(const LqSpec& spec)
      : d_(spec.d), d0_(spec.d0), n_(2 * spec.d + spec.d0), n0_(spec.d0 + spec.d) {
    // w = S w0 realizes (x, x0, z) = (z, x0, z).
    S_ = Eigen::MatrixXd::Zero(n_, n0_);
    S_.block(0, d0_, d_, d_).setIdentity();
    S_.block(d_, 0, d0_, d0_).setIdentity();
    S_.block(d_ + d0_, d0_, d_, d_).setIdentity();
    // w0 = P w drops the x block.
    P_ = Eigen::MatrixXd::Zero(n0_, n_);
    P_.block(0, d_, d0_, d0_).setIdentity();
    P_.block(d0_, d_ + d0_, d_, d_).setIdentity();

    // Residual maps of the running costs.
    Eigen::MatrixXd C0(d0_, n0_);
    C0 << Eigen::MatrixXd::Identity(d0_, d0_), -spec.A0;
    resid0_ = {C0, -spec.b0};
    Q0_ = spec.Q0;

    Eigen::MatrixXd C(d_, n_);
    C << Eigen::MatrixXd::Identity(d_, d_), -spec.B, -spec.A;
    resid_ = {C, -spec.b};
    Q_ = spec.Q;
  }

  MasterState operator()(const MasterState& s) const {
    // D_xU as a function of w0 = (x0, z), evaluated along x = z.
    const AffineMap DxU = grad_block(s.u, 0, d_);
    const AffineMap DxU_on_mean = DxU.substitute(S_);

    // dU0/dt = -lap + 0.5|D_x0 U0|^2 - f0 + D_zU0 . D_xU(t, z, x0, z)
    QuadraticForm r0 = half_square_norm(grad_block(s.u0, 0, d0_));
    r0 -= weighted_half_square(resid0_, Q0_);
    r0 += affine_dot(grad_block(s.u0, d0_, d_), DxU_on_mean);
    r0.c -= s.u0.M.block(0, 0, d0_, d0_).trace();

    // dU/dt = -lap_x - lap_x0 + 0.5|D_xU|^2 - f
    //         + D_x0 U . D_x0 U0(t, x0, z) + D_zU . D_xU(t, z, x0, z)
    QuadraticForm r = half_square_norm(DxU);
    r -= weighted_half_square(resid_, Q_);
    r += affine_dot(grad_block(s.u, d_, d0_),
                    grad_block(s.u0, 0, d0_).substitute(P_));
    r += affine_dot(grad_block(s.u, d_ + d0_, d_), DxU_on_mean.substitute(P_));
    r.c -= s.u.M.block(0, 0, d_, d_).trace() +
           s.u.M.block(d_, d_, d0_, d0_).trace();

    r0.symmetrize();
    r.symmetrize();
    return {std::move(r0), std::move(r)};
  }

 private:
  int d_, d0_, n_, n0_;
  Eigen::MatrixXd S_, P_;
  AffineMap resid0_, resid_;
  Eigen::MatrixXd Q0_, Q_;
};

MasterState rk4_step(const MasterRhs& f, const MasterState& s, double h) {
  const MasterState k1 = f(s);
  MasterState s2 = s;
  s2.axpy(h / 2, k1);
  const MasterState k2 = f(s2);
  MasterState s3 = s;
  s3.axpy(h / 2, k2);
  const MasterState k3 = f(s3);
  MasterState s4 = s;
  s4.axpy(h, k3);
  const MasterState k4 = f(s4);
  MasterState out = s;
  out.axpy(h / 6, k1).axpy(h / 3, k2).axpy(h / 3, k3).axpy(h / 6, k4);
  return out;
}

}  // namespace

MasterSolution::MasterSolution(LqSpec spec, int nt)
    : spec_(std::move(spec)), nt_(nt) {}

MasterSolution solve_master(const LqSpec& spec, int nt) {
  if (nt < 2) throw std::invalid_argument("solve_master: nt must be >= 2");
  spec.validate();

  MasterSolution sol(spec, nt);
  const int d = spec.d, d0 = spec.d0;
  const int n = 2 * d + d0, n0 = d0 + d;

  // Terminal data: exact quadratic forms of G and G0.
  Eigen::MatrixXd C(d, n);
  C << Eigen::MatrixXd::Identity(d, d), -spec.B_T, -spec.A_T;
  Eigen::MatrixXd C0(d0, n0);
  C0 << Eigen::MatrixXd::Identity(d0, d0), -spec.A0_T;
  MasterState s{weighted_half_square({C0, -spec.b0_T}, spec.Q0_T),
                weighted_half_square({C, -spec.b_T}, spec.Q_T)};

  const MasterRhs rhs(spec);
  const double h = spec.T / nt;

  sol.u0_.resize(nt + 1);
  sol.u_.resize(nt + 1);
  sol.du0_.resize(nt + 1);
  sol.du_.resize(nt + 1);
  sol.ddu0_.resize(nt + 1);
  sol.ddu_.resize(nt + 1);

  auto store = [&](int k, const MasterState& st) {
    MasterState dk = rhs(st);
    // Second derivative along the flow: the RHS is quadratic in the
    // coefficients, so the symmetric difference gives its exact directional
    // derivative F'(u)[du].
    MasterState plus = st, minus = st;
    plus.axpy(1.0, dk);
    minus.axpy(-1.0, dk);
    MasterState ddk = rhs(plus);
    ddk.axpy(-1.0, rhs(minus));
    ddk.u0 *= 0.5;
    ddk.u *= 0.5;
    sol.u0_[k] = st.u0;
    sol.u_[k] = st.u;
    sol.du0_[k] = std::move(dk.u0);
    sol.du_[k] = std::move(dk.u);
    sol.ddu0_[k] = std::move(ddk.u0);
    sol.ddu_[k] = std::move(ddk.u);
  };

  store(nt, s);
  for (int k = nt; k >= 1; --k) {
    s = rk4_step(rhs, s, -h);
    if (s.maxAbsCoeff() > kBlowUpThreshold)
      throw BlowUpError("solve_master: coefficient blow-up, horizon too long",
                        sol.grid_time(k - 1));
    store(k - 1, s);
  }
  return sol;
}

namespace {

QuadraticForm hermite_combine(const std::vector<QuadraticForm>& y,
                              const std::vector<QuadraticForm>& dy, double T,
                              double t) {
  const int nt = static_cast<int>(y.size()) - 1;
  if (t < -1e-12 || t > T + 1e-12)
    throw std::invalid_argument("time outside [0, T]");
  t = std::min(std::max(t, 0.0), T);
  const double h = T / nt;
  int k = std::min(static_cast<int>(t / h), nt - 1);
  const double s = (t - k * h) / h;
  const HermiteWeights w = hermite_value(s);
  QuadraticForm out = y[k] * w.w_y0;
  out += dy[k] * (w.w_d0 * h);
  out += y[k + 1] * w.w_y1;
  out += dy[k + 1] * (w.w_d1 * h);
  return out;
}

}  // namespace

QuadraticForm MasterSolution::u_interp(double t) const {
  return hermite_combine(u_, du_, spec_.T, t);
}
QuadraticForm MasterSolution::u0_interp(double t) const {
  return hermite_combine(u0_, du0_, spec_.T, t);
}
QuadraticForm MasterSolution::du_interp(double t) const {
  return hermite_combine(du_, ddu_, spec_.T, t);
}
QuadraticForm MasterSolution::du0_interp(double t) const {
  return hermite_combine(du0_, ddu0_, spec_.T, t);
}

Eigen::VectorXd MasterSolution::alpha_minor(double t, const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& x0,
                                            const Eigen::VectorXd& z) const {
  Eigen::VectorXd w(n());
  w << x, x0, z;
  const QuadraticForm q = u_interp(t);
  return -(q.M.middleRows(0, d()) * w + q.l.segment(0, d()));
}

Eigen::VectorXd MasterSolution::alpha_major(double t,
                                            const Eigen::VectorXd& x0,
                                            const Eigen::VectorXd& z) const {
  Eigen::VectorXd w0(n0());
  w0 << x0, z;
  const QuadraticForm q = u0_interp(t);
  return -(q.M.middleRows(0, d0()) * w0 + q.l.segment(0, d0()));
}

MasterEval eval_master(const MasterSolution& sol, double t,
                       const Eigen::VectorXd& x, const Eigen::VectorXd& x0,
                       const Eigen::VectorXd& z) {
  const int d = sol.d(), d0 = sol.d0();
  if (x.size() != d || x0.size() != d0 || z.size() != d)
    throw std::invalid_argument("eval_master: dimension mismatch");
  Eigen::VectorXd w(sol.n()), w0(sol.n0());
  w << x, x0, z;
  w0 << x0, z;

  const QuadraticForm qu = sol.u_interp(t);
  const QuadraticForm qu0 = sol.u0_interp(t);

  MasterEval ev;
  ev.U = qu.value(w);
  ev.U0 = qu0.value(w0);
  const Eigen::VectorXd g = qu.gradient(w);
  const Eigen::VectorXd g0 = qu0.gradient(w0);
  ev.DxU = g.segment(0, d);
  ev.Dx0U = g.segment(d, d0);
  ev.DzU = g.segment(d + d0, d);
  ev.Dx0U0 = g0.segment(0, d0);
  ev.DzU0 = g0.segment(d0, d);
  ev.hessU = qu.M;
  ev.hessU0 = qu0.M;
  return ev;
}

std::pair<double, double> master_residual(const MasterSolution& sol, double t,
                                          const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& x0,
                                          const Eigen::VectorXd& z) {
  const LqSpec& spec = sol.spec();
  const int d = sol.d(), d0 = sol.d0();
  Eigen::VectorXd w(sol.n()), w0(sol.n0()), wm(sol.n());
  w << x, x0, z;
  w0 << x0, z;
  wm << z, x0, z;  // x replaced by the mean

  const QuadraticForm qu = sol.u_interp(t);
  const QuadraticForm qu0 = sol.u0_interp(t);
  const QuadraticForm dqu = sol.du_interp(t);
  const QuadraticForm dqu0 = sol.du0_interp(t);

  const Eigen::VectorXd g0 = qu0.gradient(w0);
  const Eigen::VectorXd Dx0U0 = g0.segment(0, d0);
  const Eigen::VectorXd DzU0 = g0.segment(d0, d);
  const Eigen::VectorXd DxU_mean = qu.gradient(wm).segment(0, d);

  const double lap0 = qu0.M.block(0, 0, d0, d0).trace();
  const double r_i = -dqu0.value(w0) - lap0 + 0.5 * Dx0U0.squaredNorm() -
                     spec.f0(x0, z) + DzU0.dot(DxU_mean);

  const Eigen::VectorXd g = qu.gradient(w);
  const Eigen::VectorXd DxU = g.segment(0, d);
  const Eigen::VectorXd Dx0U = g.segment(d, d0);
  const Eigen::VectorXd DzU = g.segment(d + d0, d);
  const double lap = qu.M.block(0, 0, d, d).trace() +
                     qu.M.block(d, d, d0, d0).trace();
  const double r_ii = -dqu.value(w) - lap + 0.5 * DxU.squaredNorm() -
                      spec.f(x, x0, z) + Dx0U.dot(Dx0U0) + DzU.dot(DxU_mean);

  return {r_i, r_ii};
}

}  // namespace mmfg
