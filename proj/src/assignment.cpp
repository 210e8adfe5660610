#include "spectrafit/assignment.hpp"

#include <limits>

#include "spectrafit/error.hpp"

namespace spectrafit {

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols()) throw ValidationError("assignment: cost matrix must be square");
  if (!cost.allFinite()) throw ValidationError("assignment: cost matrix must be finite");
  const int q = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; column 0 is the virtual start of each augmenting path.
  std::vector<double> pot_row(q + 1, 0.0), pot_col(q + 1, 0.0);
  std::vector<int> match(q + 1, 0), way(q + 1, 0);
  for (int r = 1; r <= q; ++r) {
    match[0] = r;
    int col0 = 0;
    std::vector<double> minv(q + 1, inf);
    std::vector<char> used(q + 1, 0);
    do {
      used[col0] = 1;
      const int r0 = match[col0];
      double delta = inf;
      int col1 = 0;
      for (int c = 1; c <= q; ++c) {
        if (used[c]) continue;
        const double cur = cost(r0 - 1, c - 1) - pot_row[r0] - pot_col[c];
        if (cur < minv[c]) {
          minv[c] = cur;
          way[c] = col0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          col1 = c;
        }
      }
      for (int c = 0; c <= q; ++c) {
        if (used[c]) {
          pot_row[match[c]] += delta;
          pot_col[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const int col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> out(static_cast<std::size_t>(q), -1);
  for (int c = 1; c <= q; ++c) out[static_cast<std::size_t>(match[c] - 1)] = c - 1;
  return out;
}

}  // namespace spectrafit
