#include "obt/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace obt {

namespace {

// Min-cost perfect matching on a square matrix, shortest augmenting path
// with potentials (Jonker-Volgenant style). Handles arbitrary finite costs.
// Returns col -> row in p (1-based internally, classic formulation).
std::vector<int> solve_square(const std::vector<std::vector<double>>& a) {
  const int n = static_cast<int>(a.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
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
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_of_col(n, -1);
  for (int j = 1; j <= n; ++j) row_of_col[j - 1] = p[j] - 1;
  return row_of_col;
}

// Among equal-cost optima, push matches toward (low row, low col): swap or
// move a match when the exchange keeps the exact same total.
void canonicalize_ties(const CostMatrix& costs, std::vector<int>& col_of_row,
                       std::vector<char>& col_used) {
  const int r = static_cast<int>(costs.rows());
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < r; ++i) {
      if (col_of_row[i] < 0) continue;
      int ci = col_of_row[i];
      // Move to a cheaper-indexed free column at identical cost.
      for (int j = 0; j < ci; ++j) {
        if (col_used[j] || costs.is_forbidden(i, j)) continue;
        if (costs.values[i][j] == costs.values[i][ci]) {
          col_used[ci] = 0;
          col_used[j] = 1;
          col_of_row[i] = j;
          ci = j;
          changed = true;
        }
      }
      // Swap columns with a later row when the total is unchanged.
      for (int k = i + 1; k < r; ++k) {
        if (col_of_row[k] < 0) continue;
        int ck = col_of_row[k];
        if (ck >= ci) continue;
        if (costs.is_forbidden(i, ck) || costs.is_forbidden(k, ci)) continue;
        if (costs.values[i][ck] + costs.values[k][ci] ==
            costs.values[i][ci] + costs.values[k][ck]) {
          std::swap(col_of_row[i], col_of_row[k]);
          ci = col_of_row[i];
          changed = true;
        }
      }
    }
  }
}

}  // namespace

Assignment solve_lap(const CostMatrix& costs) {
  const int r = static_cast<int>(costs.rows());
  const int c = static_cast<int>(costs.cols());
  for (const auto& row : costs.values) {
    if (static_cast<int>(row.size()) != c) {
      throw std::invalid_argument("solve_lap: ragged cost matrix");
    }
  }
  if (!costs.forbidden.empty() &&
      (static_cast<int>(costs.forbidden.size()) != r ||
       (r > 0 && static_cast<int>(costs.forbidden[0].size()) != c))) {
    throw std::invalid_argument("solve_lap: mask shape mismatch");
  }

  Assignment out;
  if (r == 0 || c == 0) {
    for (int j = 0; j < c; ++j) out.unmatched_cols.push_back(j);
    for (int i = 0; i < r; ++i) out.unmatched_rows.push_back(i);
    return out;
  }

  double sum_abs = 0.0;
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) {
      if (costs.is_forbidden(i, j)) continue;
      if (!std::isfinite(costs.values[i][j])) {
        throw std::invalid_argument("solve_lap: non-finite cost on allowed pair");
      }
      sum_abs += std::fabs(costs.values[i][j]);
    }
  }
  // Power-of-two sentinels keep the padded sums exactly representable.
  double skip = 1.0;
  while (skip <= sum_abs + 1.0) skip *= 2.0;
  const double wall = 0x1p50;

  // Padded square: leaving any row or column unmatched costs `skip`, so
  // cardinality dominates; `wall` prices forbidden pairs out entirely.
  const int n = r + c;
  std::vector<std::vector<double>> a(n, std::vector<double>(n, wall));
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) {
      a[i][j] = costs.is_forbidden(i, j) ? wall : costs.values[i][j];
    }
    a[i][c + i] = skip;
  }
  for (int j = 0; j < c; ++j) {
    a[r + j][j] = skip;
    for (int i = 0; i < r; ++i) a[r + j][c + i] = 0.0;
  }

  const std::vector<int> row_of_col = solve_square(a);
  std::vector<int> col_of_row(r, -1);
  std::vector<char> col_used(c, 0);
  for (int j = 0; j < c; ++j) {
    const int i = row_of_col[j];
    if (i >= 0 && i < r && !costs.is_forbidden(i, j) && a[i][j] < wall) {
      col_of_row[i] = j;
      col_used[j] = 1;
    }
  }
  canonicalize_ties(costs, col_of_row, col_used);

  for (int i = 0; i < r; ++i) {
    if (col_of_row[i] >= 0) {
      out.matches.emplace_back(i, col_of_row[i]);
    } else {
      out.unmatched_rows.push_back(i);
    }
  }
  for (int j = 0; j < c; ++j) {
    if (!col_used[j]) out.unmatched_cols.push_back(j);
  }
  return out;
}

std::vector<std::pair<int, int>> max_weight_matching(
    const std::vector<std::vector<double>>& weights) {
  const int r = static_cast<int>(weights.size());
  const int c = r > 0 ? static_cast<int>(weights[0].size()) : 0;
  std::vector<std::pair<int, int>> out;
  if (r == 0 || c == 0) return out;

  const double wall = 0x1p50;
  const int n = r + c;
  // Minimize -weight over a padded square; skipping a row or column is free.
  std::vector<std::vector<double>> a(n, std::vector<double>(n, wall));
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) {
      a[i][j] = weights[i][j] > 0.0 ? -weights[i][j] : wall;
    }
    a[i][c + i] = 0.0;
  }
  for (int j = 0; j < c; ++j) {
    a[r + j][j] = 0.0;
    for (int i = 0; i < r; ++i) a[r + j][c + i] = 0.0;
  }
  const std::vector<int> row_of_col = solve_square(a);
  for (int j = 0; j < c; ++j) {
    const int i = row_of_col[j];
    if (i >= 0 && i < r && weights[i][j] > 0.0) out.emplace_back(i, j);
  }
  std::sort(out.begin(), out.end());
  return out;
}

CostMatrix gate_by_riou(const std::vector<std::vector<double>>& similarity, double threshold) {
  CostMatrix out;
  out.values.resize(similarity.size());
  out.forbidden.resize(similarity.size());
  for (std::size_t i = 0; i < similarity.size(); ++i) {
    out.values[i].resize(similarity[i].size());
    out.forbidden[i].resize(similarity[i].size());
    for (std::size_t j = 0; j < similarity[i].size(); ++j) {
      out.values[i][j] = 1.0 - similarity[i][j];
      out.forbidden[i][j] = similarity[i][j] < threshold;
    }
  }
  return out;
}

}  // namespace obt
