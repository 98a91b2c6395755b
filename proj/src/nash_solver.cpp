#include "mmfg/nash_solver.hpp"

#include <cmath>
#include <stdexcept>

#include "mmfg/errors.hpp"
#include "mmfg/measures.hpp"

namespace mmfg {

namespace {

constexpr double kBlowUpThreshold = 1e8;

using Forms = std::vector<QuadraticForm>;

void axpy(Forms& a, double s, const Forms& b) {
  for (size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
}

double max_abs(const Forms& a) {
  double m = 0.0;
  for (const auto& q : a) m = std::max(m, q.maxAbsCoeff());
  return m;
}

// Coefficient ODE right-hand sides of the Nash system under the quadratic
// ansatz. The mean-field couplings enter through fixed averaging selector
// matrices; the pairwise interaction sums collapse to one D x D product per
// player using the stacked matrix of every minor's own-gradient rows.
class NashRhs {
 public:
  NashRhs(const LqSpec& spec, int N)
      : d_(spec.d), d0_(spec.d0), N_(N), D_(spec.d0 + N * spec.d) {
    Eigen::MatrixXd S0 = Eigen::MatrixXd::Zero(d0_, D_);
    S0.block(0, 0, d0_, d0_).setIdentity();

    Eigen::MatrixXd EN = Eigen::MatrixXd::Zero(d_, D_);
    for (int j = 1; j <= N_; ++j)
      EN.block(0, off(j), d_, d_) =
          Eigen::MatrixXd::Identity(d_, d_) / N_;

    resid0_ = {S0 - spec.A0 * EN, -spec.b0};
    Q0_ = spec.Q0;
    resid_.reserve(N_);
    for (int i = 1; i <= N_; ++i) {
      Eigen::MatrixXd Si = Eigen::MatrixXd::Zero(d_, D_);
      Si.block(0, off(i), d_, d_).setIdentity();
      Eigen::MatrixXd ENi = Eigen::MatrixXd::Zero(d_, D_);
      for (int j = 1; j <= N_; ++j)
        if (j != i)
          ENi.block(0, off(j), d_, d_) =
              Eigen::MatrixXd::Identity(d_, d_) / (N_ - 1);
      resid_.push_back({Si - spec.A * ENi - spec.B * S0, -spec.b});
    }
    Q_ = spec.Q;
  }

  int off(int i) const { return i == 0 ? 0 : d0_ + (i - 1) * d_; }

  Forms operator()(const Forms& u) const {
    // W stacks each minor's own-gradient rows; major rows stay zero.
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(D_, D_);
    Eigen::VectorXd wv = Eigen::VectorXd::Zero(D_);
    for (int j = 1; j <= N_; ++j) {
      W.middleRows(off(j), d_) = u[j].M.middleRows(off(j), d_);
      wv.segment(off(j), d_) = u[j].l.segment(off(j), d_);
    }

    Forms out(N_ + 1);
    for (int i = 0; i <= N_; ++i) {
      QuadraticForm r =
          i == 0 ? half_square_norm(grad_block(u[0], 0, d0_)) -
                       weighted_half_square(resid0_, Q0_)
                 : half_square_norm(grad_block(u[i], off(i), d_)) -
                       weighted_half_square(resid_[i - 1], Q_);

      if (i >= 1)
        r += affine_dot(grad_block(u[i], 0, d0_), grad_block(u[0], 0, d0_));

      // sum_j D_{x_j}u^i . D_{x_j}u^j over minors j (j != i):
      // K^i' Mask W with the own-block term subtracted for i >= 1.
      Eigen::MatrixXd Afull = u[i].M * W;
      Eigen::VectorXd lfull = u[i].M * wv + W.transpose() * u[i].l;
      double cfull = u[i].l.dot(wv);
      if (i >= 1) {
        const auto Ki = u[i].M.middleRows(off(i), d_);
        const auto Wi = W.middleRows(off(i), d_);
        Afull.noalias() -= Ki.transpose() * Wi;
        lfull.noalias() -= Ki.transpose() * wv.segment(off(i), d_);
        lfull.noalias() -= Wi.transpose() * u[i].l.segment(off(i), d_);
        cfull -= u[i].l.segment(off(i), d_).dot(wv.segment(off(i), d_));
      }
      r.M += Afull + Afull.transpose();
      r.l += lfull;
      r.c += cfull;

      r.c -= u[i].M.trace();  // full Laplacian over all player blocks
      r.symmetrize();
      out[i] = std::move(r);
    }
    return out;
  }

  QuadraticForm terminal(const LqSpec& spec, int i) const {
    if (i == 0) {
      Eigen::MatrixXd S0 = Eigen::MatrixXd::Zero(d0_, D_);
      S0.block(0, 0, d0_, d0_).setIdentity();
      Eigen::MatrixXd EN = Eigen::MatrixXd::Zero(d_, D_);
      for (int j = 1; j <= N_; ++j)
        EN.block(0, off(j), d_, d_) =
            Eigen::MatrixXd::Identity(d_, d_) / N_;
      return weighted_half_square({S0 - spec.A0_T * EN, -spec.b0_T},
                                  spec.Q0_T);
    }
    Eigen::MatrixXd S0 = Eigen::MatrixXd::Zero(d0_, D_);
    S0.block(0, 0, d0_, d0_).setIdentity();
    Eigen::MatrixXd Si = Eigen::MatrixXd::Zero(d_, D_);
    Si.block(0, off(i), d_, d_).setIdentity();
    Eigen::MatrixXd ENi = Eigen::MatrixXd::Zero(d_, D_);
    for (int j = 1; j <= N_; ++j)
      if (j != i)
        ENi.block(0, off(j), d_, d_) =
            Eigen::MatrixXd::Identity(d_, d_) / (N_ - 1);
    return weighted_half_square(
        {Si - spec.A_T * ENi - spec.B_T * S0, -spec.b_T}, spec.Q_T);
  }

 private:
  int d_, d0_, N_, D_;
  AffineMap resid0_;
  std::vector<AffineMap> resid_;
  Eigen::MatrixXd Q0_, Q_;
};

Forms rk4_step(const NashRhs& f, const Forms& u, double h) {
  const Forms k1 = f(u);
  Forms tmp = u;
  axpy(tmp, h / 2, k1);
  const Forms k2 = f(tmp);
  tmp = u;
  axpy(tmp, h / 2, k2);
  const Forms k3 = f(tmp);
  tmp = u;
  axpy(tmp, h, k3);
  const Forms k4 = f(tmp);
  Forms out = u;
  axpy(out, h / 6, k1);
  axpy(out, h / 3, k2);
  axpy(out, h / 3, k3);
  axpy(out, h / 6, k4);
  return out;
}

}  // namespace

NashSolution::NashSolution(LqSpec spec, int N, int nt, int store_stride)
    : spec_(std::move(spec)), N_(N), nt_(nt), store_stride_(store_stride) {}

NashSolution solve_nash(const LqSpec& spec, int N, int nt, int store_stride) {
  if (N < 2)
    throw std::invalid_argument("solve_nash: population must have N >= 2");
  if (nt < 2) throw std::invalid_argument("solve_nash: nt must be >= 2");
  if (store_stride < 1 || nt % store_stride != 0)
    throw std::invalid_argument(
        "solve_nash: store_stride must divide nt");
  spec.validate();

  NashSolution sol(spec, N, nt, store_stride);
  const NashRhs rhs(spec, N);
  const double h = spec.T / nt;
  const int ns = nt / store_stride;

  sol.y_.resize(ns + 1);
  sol.dy_.resize(ns + 1);
  sol.ddy_.resize(ns + 1);

  Forms u(N + 1);
  for (int i = 0; i <= N; ++i) u[i] = rhs.terminal(spec, i);

  auto store = [&](int k, const Forms& st) {
    Forms dk = rhs(st);
    // The RHS is quadratic in the coefficients, so the symmetric difference
    // is its exact directional derivative F'(u)[du] = d(du)/dt.
    Forms plus = st, minus = st;
    axpy(plus, 1.0, dk);
    axpy(minus, -1.0, dk);
    Forms ddk = rhs(plus);
    const Forms fm = rhs(minus);
    for (size_t i = 0; i < ddk.size(); ++i) {
      ddk[i] -= fm[i];
      ddk[i] *= 0.5;
    }
    sol.y_[k] = st;
    sol.dy_[k] = std::move(dk);
    sol.ddy_[k] = std::move(ddk);
  };

  store(ns, u);
  for (int k = nt; k >= 1; --k) {
    u = rk4_step(rhs, u, -h);
    if (max_abs(u) > kBlowUpThreshold)
      throw BlowUpError("solve_nash: coefficient blow-up, horizon too long",
                        spec.T * (k - 1) / nt);
    if ((k - 1) % store_stride == 0) store((k - 1) / store_stride, u);
  }
  return sol;
}

namespace {

struct InterpBasis {
  int k;
  double w_y0, w_d0, w_y1, w_d1;
};

InterpBasis basis(const NashSolution& sol, double t) {
  const double T = sol.T();
  if (t < -1e-12 || t > T + 1e-12)
    throw std::invalid_argument("nash: time outside [0, T]");
  t = std::min(std::max(t, 0.0), T);
  const int ns = sol.stored_points() - 1;
  const double h = T / ns;
  const int k = std::min(static_cast<int>(t / h), ns - 1);
  const double s = (t - k * h) / h;
  const HermiteWeights w = hermite_value(s);
  return {k, w.w_y0, w.w_d0 * h, w.w_y1, w.w_d1 * h};
}

}  // namespace

QuadraticForm NashSolution::interp(int i, double t) const {
  const InterpBasis b = basis(*this, t);
  QuadraticForm out = coeff_at(b.k, i) * b.w_y0;
  out += dcoeff_at(b.k, i) * b.w_d0;
  out += coeff_at(b.k + 1, i) * b.w_y1;
  out += dcoeff_at(b.k + 1, i) * b.w_d1;
  return out;
}

QuadraticForm NashSolution::interp_derivative(int i, double t) const {
  const InterpBasis b = basis(*this, t);
  QuadraticForm out = dcoeff_at(b.k, i) * b.w_y0;
  out += ddcoeff_at(b.k, i) * b.w_d0;
  out += dcoeff_at(b.k + 1, i) * b.w_y1;
  out += ddcoeff_at(b.k + 1, i) * b.w_d1;
  return out;
}

NashEval eval_nash(const NashSolution& sol, int i, double t,
                   const Eigen::VectorXd& X) {
  if (i < 0 || i > sol.N())
    throw std::invalid_argument("eval_nash: player index out of range");
  if (X.size() != sol.D())
    throw std::invalid_argument("eval_nash: state dimension mismatch");
  const QuadraticForm q = sol.interp(i, t);
  return {q.value(X), q.gradient(X)};
}

double nash_residual(const NashSolution& sol, int i, double t,
                     const Eigen::VectorXd& X) {
  if (i < 0 || i > sol.N())
    throw std::invalid_argument("nash_residual: player index out of range");
  if (X.size() != sol.D())
    throw std::invalid_argument("nash_residual: state dimension mismatch");
  const LqSpec& spec = sol.spec();
  const int N = sol.N(), d = spec.d, d0 = spec.d0;

  const QuadraticForm qi = sol.interp(i, t);
  const QuadraticForm dqi = sol.interp_derivative(i, t);
  const Eigen::VectorXd gi = qi.gradient(X);

  const Eigen::VectorXd x0 = X.segment(0, d0);
  auto minor = [&](int j) { return X.segment(sol.block_offset(j), d); };

  // Own gradients of the other players.
  double coupling = 0.0;
  for (int j = 1; j <= N; ++j) {
    if (j == i) continue;
    const QuadraticForm qj = (j == i) ? qi : sol.interp(j, t);
    const int oj = sol.block_offset(j);
    const Eigen::VectorXd own =
        qj.M.middleRows(oj, d) * X + qj.l.segment(oj, d);
    coupling += gi.segment(oj, d).dot(own);
  }

  double r = -dqi.value(X) - qi.M.trace() + coupling;
  if (i == 0) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(d);
    for (int j = 1; j <= N; ++j) z += minor(j);
    z /= N;
    r += 0.5 * gi.segment(0, d0).squaredNorm() - spec.f0(x0, z);
  } else {
    Eigen::VectorXd zi = Eigen::VectorXd::Zero(d);
    for (int j = 1; j <= N; ++j)
      if (j != i) zi += minor(j);
    zi /= (N - 1);
    const int oi = sol.block_offset(i);
    r += 0.5 * gi.segment(oi, d).squaredNorm() - spec.f(minor(i), x0, zi);
    const QuadraticForm q0 = sol.interp(0, t);
    const Eigen::VectorXd g0own =
        q0.M.middleRows(0, d0) * X + q0.l.segment(0, d0);
    r += gi.segment(0, d0).dot(g0own);
  }
  return r;
}

namespace {

StackedState unstack(const Eigen::VectorXd& X, int d, int d0, int N) {
  StackedState s;
  s.x0 = X.segment(0, d0);
  s.minors.reserve(N);
  for (int i = 1; i <= N; ++i)
    s.minors.push_back(X.segment(d0 + (i - 1) * d, d));
  return s;
}

}  // namespace

Lemma32Report project_master_lemma32(const MasterSolution& sol, int N,
                                     double t, const Eigen::VectorXd& X) {
  const LqSpec& spec = sol.spec();
  const int d = spec.d, d0 = spec.d0;
  if (N < 2)
    throw std::invalid_argument("project_master_lemma32: N must be >= 2");
  if (X.size() != d0 + N * d)
    throw std::invalid_argument("project_master_lemma32: state dim mismatch");

  const StackedState st = unstack(X, d, d0, N);
  const Eigen::VectorXd x0 = st.x0;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(d);
  for (const auto& m : st.minors) z += m;
  z /= N;
  std::vector<Eigen::VectorXd> zi(N);
  for (int i = 0; i < N; ++i) zi[i] = (N * z - st.minors[i]) / (N - 1);

  // Per-minor master evaluations at (x_j, x0, z_j).
  std::vector<MasterEval> evs(N);
  for (int j = 0; j < N; ++j)
    evs[j] = eval_master(sol, t, st.minors[j], x0, zi[j]);

  const QuadraticForm qu0 = sol.u0_interp(t);
  const QuadraticForm dqu0 = sol.du0_interp(t);
  const QuadraticForm dqu = sol.du_interp(t);
  Eigen::VectorXd w0(sol.n0());
  w0 << x0, z;
  const Eigen::VectorXd g0 = qu0.gradient(w0);
  const Eigen::VectorXd Dx0U0 = g0.segment(0, d0);
  const Eigen::VectorXd DzU0 = g0.segment(d0, d);

  Lemma32Report rep;
  rep.v.resize(N + 1);
  rep.r.resize(N + 1);

  // i = 0.
  {
    const double lap = qu0.M.block(0, 0, d0, d0).trace() +
                       qu0.M.block(d0, d0, d, d).trace() / N;
    double coupling = 0.0;
    for (int j = 0; j < N; ++j) coupling += DzU0.dot(evs[j].DxU);
    coupling /= N;
    rep.v[0] = qu0.value(w0);
    rep.r[0] = -dqu0.value(w0) - lap + 0.5 * Dx0U0.squaredNorm() -
               spec.f0(x0, z) + coupling;
  }

  // i >= 1.
  const QuadraticForm qu = sol.u_interp(t);
  for (int i = 1; i <= N; ++i) {
    const MasterEval& ev = evs[i - 1];
    Eigen::VectorXd w(sol.n());
    w << st.minors[i - 1], x0, zi[i - 1];
    const double lap = qu.M.block(0, 0, d, d).trace() +
                       qu.M.block(d, d, d0, d0).trace() +
                       qu.M.block(d + d0, d + d0, d, d).trace() / (N - 1);
    double coupling = 0.0;
    for (int j = 0; j < N; ++j) {
      if (j == i - 1) continue;
      coupling += ev.DzU.dot(evs[j].DxU);
    }
    coupling /= (N - 1);
    rep.v[i] = ev.U;
    rep.r[i] = -dqu.value(w) - lap + 0.5 * ev.DxU.squaredNorm() -
               spec.f(st.minors[i - 1], x0, zi[i - 1]) +
               ev.Dx0U.dot(Dx0U0) + coupling;
  }
  return rep;
}

ProjectionIdentityReport projection_identity_check(const MasterSolution& sol,
                                                   int N, double t,
                                                   const Eigen::VectorXd& X,
                                                   double h) {
  const LqSpec& spec = sol.spec();
  const int d = spec.d, d0 = spec.d0;
  if (N < 2)
    throw std::invalid_argument("projection_identity_check: N must be >= 2");
  if (!(h > 0))
    throw std::invalid_argument("projection_identity_check: h must be > 0");
  if (X.size() != d0 + N * d)
    throw std::invalid_argument("projection_identity_check: state mismatch");

  auto rel = [](double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::abs(b));
  };

  // v^0 as a function of the stacked state.
  auto v0 = [&](const Eigen::VectorXd& Xv) {
    const StackedState st = unstack(Xv, d, d0, N);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(d);
    for (const auto& m : st.minors) z += m;
    z /= N;
    Eigen::VectorXd w0(sol.n0());
    w0 << st.x0, z;
    return sol.u0_interp(t).value(w0);
  };
  // v^1 (representative minor) as a function of the stacked state.
  auto v1 = [&](const Eigen::VectorXd& Xv) {
    const StackedState st = unstack(Xv, d, d0, N);
    Eigen::VectorXd z1 = Eigen::VectorXd::Zero(d);
    for (int j = 1; j < N; ++j) z1 += st.minors[j];
    z1 /= (N - 1);
    Eigen::VectorXd w(sol.n());
    w << st.minors[0], st.x0, z1;
    return sol.u_interp(t).value(w);
  };

  const StackedState st = unstack(X, d, d0, N);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(d);
  for (const auto& m : st.minors) z += m;
  z /= N;
  Eigen::VectorXd z1 = (N * z - st.minors[0]) / (N - 1);

  const MasterEval ev0 = eval_master(sol, t, st.minors[0], st.x0, z);
  const MasterEval ev1 = eval_master(sol, t, st.minors[0], st.x0, z1);
  const Eigen::MatrixXd Pzz = ev0.hessU0.block(d0, d0, d, d);
  const Eigen::MatrixXd Kzz =
      ev1.hessU.block(d + d0, d + d0, d, d);

  ProjectionIdentityReport rep{0.0, 0.0, 0.0};

  auto central = [&](auto&& fn, int a) {
    Eigen::VectorXd Xp = X, Xm = X;
    Xp[a] += h;
    Xm[a] -= h;
    return (fn(Xp) - fn(Xm)) / (2 * h);
  };
  auto second = [&](auto&& fn, int a, int b) {
    if (a == b) {
      Eigen::VectorXd Xp = X, Xm = X;
      Xp[a] += h;
      Xm[a] -= h;
      return (fn(Xp) - 2 * fn(X) + fn(Xm)) / (h * h);
    }
    Eigen::VectorXd Xpp = X, Xpm = X, Xmp = X, Xmm = X;
    Xpp[a] += h;
    Xpp[b] += h;
    Xpm[a] += h;
    Xpm[b] -= h;
    Xmp[a] -= h;
    Xmp[b] += h;
    Xmm[a] -= h;
    Xmm[b] -= h;
    return (fn(Xpp) - fn(Xpm) - fn(Xmp) + fn(Xmm)) / (4 * h * h);
  };

  // Major-gradient identity (exact, no scaling).
  for (int a = 0; a < d0; ++a)
    rep.max_rel_grad_major = std::max(
        rep.max_rel_grad_major, rel(central(v0, a), ev0.Dx0U0[a]));

  // First-derivative identities with 1/N and 1/(N-1) weights. Probe the
  // first two minor blocks.
  for (int j = 1; j <= std::min(2, N); ++j) {
    const int oj = d0 + (j - 1) * d;
    for (int a = 0; a < d; ++a)
      rep.max_rel_grad_scaled =
          std::max(rep.max_rel_grad_scaled,
                   rel(central(v0, oj + a), ev0.DzU0[a] / N));
  }
  // For v^1: derivative in x_j, j >= 2, carries weight 1/(N-1).
  {
    const int o2 = d0 + d;
    for (int a = 0; a < d; ++a)
      rep.max_rel_grad_scaled =
          std::max(rep.max_rel_grad_scaled,
                   rel(central(v1, o2 + a), ev1.DzU[a] / (N - 1)));
  }

  // Second-derivative identities. Under the mean-field closure the mixed
  // y-derivative of D_m vanishes, so diagonal and cross blocks share the
  // same 1/N^2 (resp. 1/(N-1)^2) scaling.
  {
    const int o1 = d0, o2 = d0 + d;
    for (int a = 0; a < d; ++a)
      for (int bb = 0; bb < d; ++bb) {
        rep.max_rel_hess_scaled = std::max(
            rep.max_rel_hess_scaled,
            rel(second(v0, o1 + a, o2 + bb), Pzz(a, bb) / (N * N)));
        rep.max_rel_hess_scaled = std::max(
            rep.max_rel_hess_scaled,
            rel(second(v0, o1 + a, o1 + bb), Pzz(a, bb) / (N * N)));
      }
    if (N >= 3) {
      const int o3 = d0 + 2 * d;
      for (int a = 0; a < d; ++a)
        for (int bb = 0; bb < d; ++bb)
          rep.max_rel_hess_scaled =
              std::max(rep.max_rel_hess_scaled,
                       rel(second(v1, o2 + a, o3 + bb),
                           Kzz(a, bb) / ((N - 1.0) * (N - 1.0))));
    }
  }
  return rep;
}

}  // namespace mmfg
