#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace mmfg {

/// Finite uniform-weight atom cloud on R^d. Immutable after construction.
class EmpiricalMeasure {
 public:
  explicit EmpiricalMeasure(std::vector<Eigen::VectorXd> atoms);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(atoms_.size()); }
  const std::vector<Eigen::VectorXd>& atoms() const { return atoms_; }
  const Eigen::VectorXd& atom(int i) const { return atoms_.at(i); }

  /// Componentwise average of the atoms.
  Eigen::VectorXd mean() const;

  /// M_k(m) = (avg |x|^k)^(1/k), k >= 1. Note the exponent 1/k makes
  /// moment(m, 1) the plain first absolute moment.
  double moment(int k) const;

 private:
  std::vector<Eigen::VectorXd> atoms_;
  int dim_;
};

/// Stacked state (x0; x1..xN) of the major and N minor players.
struct StackedState {
  Eigen::VectorXd x0;
  std::vector<Eigen::VectorXd> minors;

  int count() const { return static_cast<int>(minors.size()); }
};

/// m^N = uniform measure on the minors; the major position never enters.
EmpiricalMeasure empirical_from_states(const StackedState& X);

/// Leave-one-out family: the i-th entry averages the N-1 minors j != i.
/// Requires N >= 2.
std::vector<EmpiricalMeasure> leave_one_out(const StackedState& X);

/// Exact Wasserstein distance d_k, k in {1, 2}. In dimension one arbitrary
/// atom counts are handled through the quantile formula; in higher dimension
/// both supports must have the same size and the distance is computed by an
/// exact minimum-cost assignment.
double wasserstein(const EmpiricalMeasure& a, const EmpiricalMeasure& b, int k);

namespace detail {
/// Exact solver for the uniform assignment problem (Jonker-Volgenant style
/// shortest augmenting paths). Returns the minimal total cost.
double solve_assignment(const Eigen::MatrixXd& cost);
}  // namespace detail

}  // namespace mmfg
