#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace obt {

// Rectangular cost matrix with an explicit infeasibility mask. Gated pairs
// are excluded outright instead of being priced at a large sentinel.
struct CostMatrix {
  std::vector<std::vector<double>> values;       // row-major R x C
  std::vector<std::vector<bool>> forbidden;      // same shape; empty = all allowed
  std::size_t cols_when_empty = 0;               // column count of a 0 x C matrix

  std::size_t rows() const { return values.size(); }
  std::size_t cols() const { return values.empty() ? cols_when_empty : values[0].size(); }
  bool is_forbidden(std::size_t r, std::size_t c) const {
    return !forbidden.empty() && forbidden[r][c];
  }
};

struct Assignment {
  std::vector<std::pair<int, int>> matches;  // (row, col), sorted by row
  std::vector<int> unmatched_rows;
  std::vector<int> unmatched_cols;

  double total_cost(const CostMatrix& costs) const {
    double t = 0.0;
    for (auto [r, c] : matches) t += costs.values[r][c];
    return t;
  }
};

// Minimum-cost assignment among maximum-cardinality matchings that respect
// the forbidden mask. Shortest-augmenting-path solver, O(n^3). Ties between
// equal-cost optima break toward the lowest row index, then lowest column.
Assignment solve_lap(const CostMatrix& costs);

// Turns an rIoU similarity matrix into an association cost matrix:
// cost = 1 - similarity, forbidden where similarity < threshold.
CostMatrix gate_by_riou(const std::vector<std::vector<double>>& similarity, double threshold);

// Injective partial matching maximizing the sum of weights; pairs with
// weight <= 0 are never matched. Used by the identity-level metrics, where
// fewer, heavier matches can beat a larger matching.
std::vector<std::pair<int, int>> max_weight_matching(
    const std::vector<std::vector<double>>& weights);

}  // namespace obt
