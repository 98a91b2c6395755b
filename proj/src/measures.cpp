#include "mmfg/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mmfg {

EmpiricalMeasure::EmpiricalMeasure(std::vector<Eigen::VectorXd> atoms)
    : atoms_(std::move(atoms)) {
  if (atoms_.empty())
    throw std::invalid_argument("EmpiricalMeasure: empty population");
  dim_ = static_cast<int>(atoms_.front().size());
  if (dim_ < 1) throw std::invalid_argument("EmpiricalMeasure: zero dimension");
  for (const auto& a : atoms_) {
    if (a.size() != dim_)
      throw std::invalid_argument("EmpiricalMeasure: mixed atom dimensions");
    if (!a.allFinite())
      throw std::invalid_argument("EmpiricalMeasure: non-finite atom");
  }
}

Eigen::VectorXd EmpiricalMeasure::mean() const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(dim_);
  for (const auto& a : atoms_) s += a;
  return s / static_cast<double>(atoms_.size());
}

double EmpiricalMeasure::moment(int k) const {
  if (k < 1) throw std::invalid_argument("moment: order must be >= 1");
  double s = 0.0;
  for (const auto& a : atoms_) s += std::pow(a.norm(), k);
  s /= static_cast<double>(atoms_.size());
  return std::pow(s, 1.0 / k);
}

EmpiricalMeasure empirical_from_states(const StackedState& X) {
  if (X.minors.empty())
    throw std::invalid_argument("empirical_from_states: empty population");
  return EmpiricalMeasure(X.minors);
}

std::vector<EmpiricalMeasure> leave_one_out(const StackedState& X) {
  const int N = X.count();
  if (N == 0) throw std::invalid_argument("leave_one_out: empty population");
  if (N == 1)
    throw std::invalid_argument(
        "leave_one_out: degenerate with a single minor player");
  std::vector<EmpiricalMeasure> out;
  out.reserve(N);
  for (int i = 0; i < N; ++i) {
    std::vector<Eigen::VectorXd> atoms;
    atoms.reserve(N - 1);
    for (int j = 0; j < N; ++j)
      if (j != i) atoms.push_back(X.minors[j]);
    out.emplace_back(std::move(atoms));
  }
  return out;
}

namespace {

// d_k in dimension one for arbitrary atom counts: integrate the quantile
// difference over the merged breakpoint grid.
double wasserstein_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                      int k) {
  std::vector<double> xs, ys;
  for (const auto& p : a.atoms()) xs.push_back(p[0]);
  for (const auto& p : b.atoms()) ys.push_back(p[0]);
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const int n = static_cast<int>(xs.size()), m = static_cast<int>(ys.size());
  double acc = 0.0, u = 0.0;
  int i = 0, j = 0;
  while (i < n && j < m) {
    const double ui = static_cast<double>(i + 1) / n;
    const double uj = static_cast<double>(j + 1) / m;
    const double next = std::min(ui, uj);
    acc += (next - u) * std::pow(std::abs(xs[i] - ys[j]), k);
    u = next;
    if (ui <= next + 1e-15) ++i;
    if (uj <= next + 1e-15) ++j;
  }
  return std::pow(acc, 1.0 / k);
}

}  // namespace

namespace detail {

double solve_assignment(const Eigen::MatrixXd& cost) {
  // Shortest augmenting path assignment (dense Jonker-Volgenant variant,
  // 1-indexed internal arrays).
  const int n = static_cast<int>(cost.rows());
  const double INF = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, INF);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = INF;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j) total += cost(p[j] - 1, j - 1);
  return total;
}

}  // namespace detail

double wasserstein(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                   int k) {
  if (k != 1 && k != 2)
    throw std::invalid_argument("wasserstein: order must be 1 or 2");
  if (a.dim() != b.dim())
    throw std::invalid_argument("wasserstein: dimension mismatch");
  if (a.dim() == 1) return wasserstein_1d(a, b, k);
  if (a.size() != b.size())
    throw std::invalid_argument(
        "wasserstein: unsupported transport between unequal supports in "
        "dimension > 1");
  const int n = a.size();
  Eigen::MatrixXd cost(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cost(i, j) = std::pow((a.atom(i) - b.atom(j)).norm(), k);
  const double total = detail::solve_assignment(cost);
  return std::pow(total / n, 1.0 / k);
}

}  // namespace mmfg
