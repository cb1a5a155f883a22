#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

namespace gsr {

struct Assignment {
  /// (row, column) pairs in increasing row order.
  std::vector<std::pair<int, int>> matches;
  std::vector<int> unmatchedRows;
  std::vector<int> unmatchedCols;
  /// Sum of matched entries, accumulated in row order.
  double cost = 0.0;
};

/// Exact rectangular linear assignment. Entries equal to +infinity are
/// forbidden. Among all assignments the solver first maximizes the number of
/// admissible matches, then minimizes their summed cost. When several
/// assignments reach the same cost, the one whose column sequence (read in
/// row order) is lexicographically smallest is returned.
Assignment solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace gsr
