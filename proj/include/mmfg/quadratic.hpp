#pragma once

#include <Eigen/Dense>

namespace mmfg {

/// Quadratic form q(v) = 0.5 v'Mv + l.v + c with M kept symmetric.
/// The coefficient triple doubles as the state of the backward
/// coefficient ODEs, so the type supports vector-space arithmetic.
struct QuadraticForm {
  Eigen::MatrixXd M;
  Eigen::VectorXd l;
  double c = 0.0;

  static QuadraticForm Zero(int n) {
    return {Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n), 0.0};
  }

  int dim() const { return static_cast<int>(l.size()); }

  double value(const Eigen::VectorXd& v) const {
    return 0.5 * v.dot(M * v) + l.dot(v) + c;
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& v) const { return M * v + l; }
  const Eigen::MatrixXd& hessian() const { return M; }

  double maxAbsCoeff() const {
    double m = std::abs(c);
    if (M.size() > 0) m = std::max(m, M.cwiseAbs().maxCoeff());
    if (l.size() > 0) m = std::max(m, l.cwiseAbs().maxCoeff());
    return m;
  }

  void symmetrize() { M = 0.5 * (M + M.transpose()).eval(); }

  QuadraticForm& operator+=(const QuadraticForm& o) {
    M += o.M;
    l += o.l;
    c += o.c;
    return *this;
  }
  QuadraticForm& operator-=(const QuadraticForm& o) {
    M -= o.M;
    l -= o.l;
    c -= o.c;
    return *this;
  }
  QuadraticForm& operator*=(double s) {
    M *= s;
    l *= s;
    c *= s;
    return *this;
  }
  friend QuadraticForm operator+(QuadraticForm a, const QuadraticForm& b) {
    a += b;
    return a;
  }
  friend QuadraticForm operator-(QuadraticForm a, const QuadraticForm& b) {
    a -= b;
    return a;
  }
  friend QuadraticForm operator*(QuadraticForm a, double s) {
    a *= s;
    return a;
  }
  friend QuadraticForm operator*(double s, QuadraticForm a) {
    a *= s;
    return a;
  }
};

/// Affine map v -> Cv + r; the gradient of a quadratic form restricted to a
/// block of variables is of this shape.
struct AffineMap {
  Eigen::MatrixXd C;
  Eigen::VectorXd r;

  Eigen::VectorXd operator()(const Eigen::VectorXd& v) const {
    return C * v + r;
  }

  /// Substitute v = S w (linear reparametrization).
  AffineMap substitute(const Eigen::MatrixXd& S) const { return {C * S, r}; }
};

/// Gradient of q with respect to the variable block [off, off+len).
inline AffineMap grad_block(const QuadraticForm& q, int off, int len) {
  return {q.M.middleRows(off, len), q.l.segment(off, len)};
}

/// a(v).b(v) as a quadratic form.
inline QuadraticForm affine_dot(const AffineMap& a, const AffineMap& b) {
  Eigen::MatrixXd A = a.C.transpose() * b.C;
  return {A + A.transpose(), a.C.transpose() * b.r + b.C.transpose() * a.r,
          a.r.dot(b.r)};
}

/// 0.5 |a(v)|^2 as a quadratic form.
inline QuadraticForm half_square_norm(const AffineMap& a) {
  return {a.C.transpose() * a.C, a.C.transpose() * a.r, 0.5 * a.r.squaredNorm()};
}

/// 0.5 a(v)' Q a(v) as a quadratic form (Q symmetric).
inline QuadraticForm weighted_half_square(const AffineMap& a,
                                          const Eigen::MatrixXd& Q) {
  Eigen::MatrixXd QC = Q * a.C;
  return {a.C.transpose() * QC, QC.transpose() * a.r, 0.5 * a.r.dot(Q * a.r)};
}

/// Cubic Hermite basis on a unit interval; returns value/derivative weights
/// for (y0, h*dy0, y1, h*dy1).
struct HermiteWeights {
  double w_y0, w_d0, w_y1, w_d1;
};

inline HermiteWeights hermite_value(double s) {
  const double s2 = s * s, s3 = s2 * s;
  return {2 * s3 - 3 * s2 + 1, s3 - 2 * s2 + s, -2 * s3 + 3 * s2, s3 - s2};
}

inline HermiteWeights hermite_derivative(double s) {
  const double s2 = s * s;
  return {6 * s2 - 6 * s, 3 * s2 - 4 * s + 1, -6 * s2 + 6 * s, 3 * s2 - 2 * s};
}

}  // namespace mmfg
