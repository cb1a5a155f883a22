#include "gsr/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gsr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SquareSolution {
  std::vector<int> col_of_row;
  std::vector<double> u;  // row potentials
  std::vector<double> v;  // column potentials
};

// Shortest augmenting path Hungarian on a dense square matrix with finite
// entries. Potentials satisfy a(i,j) - u(i) - v(j) >= 0, with equality on
// the returned assignment.
SquareSolution hungarian(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
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
    } while (j0 != 0);
  }
  SquareSolution s;
  s.col_of_row.assign(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) s.col_of_row[p[j] - 1] = j - 1;
  s.u.assign(u.begin() + 1, u.end());
  s.v.assign(v.begin() + 1, v.end());
  return s;
}

double row_order_sum(const Eigen::MatrixXd& a, const std::vector<int>& cols) {
  double s = 0.0;
  for (std::size_t i = 0; i < cols.size(); ++i) s += a(static_cast<Eigen::Index>(i), cols[i]);
  return s;
}

// Optimal completion of `a` with rows [0, fixed.size()) pinned to the given
// columns. Returns the full column sequence.
std::vector<int> complete(const Eigen::MatrixXd& a, const std::vector<int>& fixed) {
  const int n = static_cast<int>(a.rows());
  const int k = static_cast<int>(fixed.size());
  std::vector<char> taken(n, 0);
  for (int c : fixed) taken[c] = 1;
  std::vector<int> free_cols;
  for (int j = 0; j < n; ++j)
    if (!taken[j]) free_cols.push_back(j);
  const int m = n - k;
  std::vector<int> out = fixed;
  if (m == 0) return out;
  Eigen::MatrixXd sub(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) sub(i, j) = a(k + i, free_cols[j]);
  const SquareSolution s = hungarian(sub);
  for (int i = 0; i < m; ++i) out.push_back(free_cols[s.col_of_row[i]]);
  return out;
}

}  // namespace

Assignment solve_assignment(const Eigen::MatrixXd& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  Assignment out;
  if (rows == 0 || cols == 0) {
    for (int i = 0; i < rows; ++i) out.unmatchedRows.push_back(i);
    for (int j = 0; j < cols; ++j) out.unmatchedCols.push_back(j);
    return out;
  }

  double lo = kInf, hi = -kInf;
  for (Eigen::Index i = 0; i < cost.size(); ++i) {
    const double c = cost.data()[i];
    if (std::isfinite(c)) lo = std::min(lo, c), hi = std::max(hi, c);
  }
  if (!std::isfinite(lo)) lo = hi = 0.0;
  const int n = std::max(rows, cols);
  // Any single forbidden pair outweighs every possible difference in
  // admissible cost, so cardinality is maximized first.
  const double forbidden = hi + (hi - lo + 1.0) * (n + 1);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = std::isfinite(cost(i, j)) ? cost(i, j) : forbidden;

  SquareSolution sol = hungarian(a);
  std::vector<int> best = sol.col_of_row;
  double best_total = row_order_sum(a, best);

  // Lexicographic tie-break. Pinning (i, j) costs at least the reduced cost
  // a(i,j) - u(i) - v(j) above the optimum, so only pairs whose reduced cost
  // is at rounding level can tie; those are re-solved and compared exactly.
  const double scale = std::max(std::abs(forbidden), std::abs(lo)) + 1.0;
  const double slack = 1e-9 * scale;
  std::vector<int> prefix;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < best[i]; ++j) {
      if (std::find(prefix.begin(), prefix.end(), j) != prefix.end()) continue;
      if (a(i, j) - sol.u[i] - sol.v[j] > slack) continue;
      std::vector<int> pinned = prefix;
      pinned.push_back(j);
      std::vector<int> cand = complete(a, pinned);
      const double total = row_order_sum(a, cand);
      if (total <= best_total) {
        best = std::move(cand);
        best_total = total;
        break;
      }
    }
    prefix.push_back(best[i]);
  }

  std::vector<char> col_used(cols, 0);
  for (int i = 0; i < rows; ++i) {
    const int j = best[i];
    if (j < cols && std::isfinite(cost(i, j))) {
      out.matches.emplace_back(i, j);
      out.cost += cost(i, j);
      col_used[j] = 1;
    } else {
      out.unmatchedRows.push_back(i);
    }
  }
  for (int j = 0; j < cols; ++j)
    if (!col_used[j]) out.unmatchedCols.push_back(j);
  return out;
}

}  // namespace gsr
