#pragma once

// Rectangular linear assignment (Kuhn-Munkres with potentials, O(n^2 m)).

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

namespace xcheck::assignment {

using Matrix = std::vector<std::vector<double>>;

struct Result {
  std::vector<int> row_to_col;  // -1 = row left unassigned
  double total = 0.0;
};

namespace detail {

// Minimum-cost assignment of every row of `cost` (rows <= cols).
inline std::vector<int> hungarian_min(const Matrix& cost, std::size_t rows, std::size_t cols) {
  const double inf = std::numeric_limits<double>::infinity();
  // 1-indexed potentials; column 0 is the virtual start.
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0), minv(cols + 1);
  std::vector<std::size_t> p(cols + 1, 0), way(cols + 1, 0);
  std::vector<char> used(cols + 1);
  for (std::size_t i = 1; i <= rows; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= cols; ++j) {
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
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(rows, -1);
  for (std::size_t j = 1; j <= cols; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = static_cast<int>(j - 1);
  }
  return row_to_col;
}

}  // namespace detail

// Maximum-weight partial matching over non-negative weights. A zero weight
// means "forbidden": such pairs are never reported. Pairs are summed in row
// order.
inline Result max_weight(const Matrix& weights) {
  Result r;
  const std::size_t rows = weights.size();
  r.row_to_col.assign(rows, -1);
  if (rows == 0) return r;
  const std::size_t cols = weights.front().size();
  if (cols == 0) return r;

  if (rows <= cols) {
    Matrix cost(rows, std::vector<double>(cols));
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) cost[i][j] = -weights[i][j];
    r.row_to_col = detail::hungarian_min(cost, rows, cols);
  } else {
    Matrix cost(cols, std::vector<double>(rows));
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) cost[j][i] = -weights[i][j];
    auto col_to_row = detail::hungarian_min(cost, cols, rows);
    for (std::size_t j = 0; j < cols; ++j) {
      if (col_to_row[j] >= 0) r.row_to_col[static_cast<std::size_t>(col_to_row[j])] = static_cast<int>(j);
    }
  }
  for (std::size_t i = 0; i < rows; ++i) {
    const int j = r.row_to_col[i];
    if (j < 0) continue;
    const double w = weights[i][static_cast<std::size_t>(j)];
    if (w <= 0.0) {
      r.row_to_col[i] = -1;
    } else {
      r.total += w;
    }
  }
  return r;
}

// Optimal matching that, among all optimal ones, is lexicographically smallest
// when read as (row 0's column, row 1's column, ...), with "unassigned" ranked
// after every column. Solved by fixing rows greedily and re-checking
// optimality of the remainder.
inline Result max_weight_lexicographic(const Matrix& weights, double rel_tol = 1e-9) {
  const std::size_t rows = weights.size();
  const std::size_t cols = rows ? weights.front().size() : 0;
  Result best = max_weight(weights);
  if (rows == 0 || cols == 0) return best;
  const double target = best.total;
  const double tol = rel_tol * std::max(1.0, target);

  std::vector<char> col_taken(cols, 0);
  auto remainder_value = [&](std::size_t from_row) {
    Matrix sub;
    std::vector<std::size_t> free_cols;
    for (std::size_t j = 0; j < cols; ++j)
      if (!col_taken[j]) free_cols.push_back(j);
    if (free_cols.empty() || from_row >= rows) return 0.0;
    for (std::size_t i = from_row; i < rows; ++i) {
      std::vector<double> row;
      row.reserve(free_cols.size());
      for (std::size_t j : free_cols) row.push_back(weights[i][j]);
      sub.push_back(std::move(row));
    }
    return max_weight(sub).total;
  };

  Result out;
  out.row_to_col.assign(rows, -1);
  double acc = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (col_taken[j] || weights[i][j] <= 0.0) continue;
      col_taken[j] = 1;
      const double value = acc + weights[i][j] + remainder_value(i + 1);
      if (value >= target - tol) {
        out.row_to_col[i] = static_cast<int>(j);
        acc += weights[i][j];
        break;
      }
      col_taken[j] = 0;
    }
  }
  for (std::size_t i = 0; i < rows; ++i) {
    if (out.row_to_col[i] >= 0) out.total += weights[i][static_cast<std::size_t>(out.row_to_col[i])];
  }
  return out;
}

}  // namespace xcheck::assignment
