#include <cmath>

#include "doctest.h"
#include "obt/assignment.hpp"
#include "obt/rng.hpp"
#include "oracles.hpp"

using namespace obt;

namespace {

CostMatrix make_costs(std::vector<std::vector<double>> values) {
  CostMatrix m;
  m.values = std::move(values);
  return m;
}

CostMatrix random_costs(Rng& rng, int r, int c, double forbid_fraction = 0.0) {
  CostMatrix m;
  m.values.assign(r, std::vector<double>(c, 0.0));
  if (forbid_fraction > 0.0) m.forbidden.assign(r, std::vector<bool>(c, false));
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) {
      m.values[i][j] = rng.uniform(0.0, 1.0);
      if (forbid_fraction > 0.0 && rng.uniform() < forbid_fraction) m.forbidden[i][j] = true;
    }
  }
  return m;
}

}  // namespace

TEST_CASE("solve_lap picks the diagonal on the classic 2x2") {
  const Assignment a = solve_lap(make_costs({{1, 2}, {2, 1}}));
  REQUIRE(a.matches.size() == 2);
  CHECK(a.matches[0] == std::pair<int, int>{0, 0});
  CHECK(a.matches[1] == std::pair<int, int>{1, 1});
  CHECK(a.total_cost(make_costs({{1, 2}, {2, 1}})) == 2.0);
  CHECK(a.unmatched_rows.empty());
  CHECK(a.unmatched_cols.empty());
}

TEST_CASE("solve_lap on empty shapes") {
  CostMatrix zero_by_three;
  zero_by_three.cols_when_empty = 3;
  const Assignment a = solve_lap(zero_by_three);
  CHECK(a.matches.empty());
  CHECK(a.unmatched_rows.empty());
  REQUIRE(a.unmatched_cols.size() == 3);
  CHECK(a.unmatched_cols[0] == 0);
  CHECK(a.unmatched_cols[2] == 2);

  // All-forbidden: everything unmatched.
  CostMatrix forbidden = make_costs({{1, 1, 1}});
  forbidden.forbidden = {{true, true, true}};
  const Assignment b = solve_lap(forbidden);
  CHECK(b.matches.empty());
  REQUIRE(b.unmatched_rows.size() == 1);
  REQUIRE(b.unmatched_cols.size() == 3);
}

TEST_CASE("solve_lap matches brute force on random rectangles") {
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const CostMatrix m = random_costs(rng, 5, 6);
    const Assignment fast = solve_lap(m);
    const auto slow = oracle::brute_force_lap(m);
    CHECK(fast.matches.size() == static_cast<std::size_t>(slow.cardinality));
    CHECK(fast.total_cost(m) == doctest::Approx(slow.total).epsilon(1e-12));
  }
}

TEST_CASE("solve_lap matches brute force with forbidden entries") {
  Rng rng(43);
  for (int trial = 0; trial < 120; ++trial) {
    const int r = rng.uniform_int(1, 6);
    const int c = rng.uniform_int(1, 6);
    const CostMatrix m = random_costs(rng, r, c, 0.35);
    const Assignment fast = solve_lap(m);
    const auto slow = oracle::brute_force_lap(m);
    CHECK(fast.matches.size() == static_cast<std::size_t>(slow.cardinality));
    CHECK(fast.total_cost(m) == doctest::Approx(slow.total).epsilon(1e-12));
    for (auto [i, j] : fast.matches) CHECK_FALSE(m.is_forbidden(i, j));
  }
}

TEST_CASE("solve_lap beats greedy row-wise assignment") {
  Rng rng(44);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = rng.uniform_int(2, 7);
    const CostMatrix m = random_costs(rng, n, n);
    const Assignment opt = solve_lap(m);

    std::vector<char> used(n, 0);
    double greedy = 0.0;
    for (int i = 0; i < n; ++i) {
      int best = -1;
      for (int j = 0; j < n; ++j) {
        if (!used[j] && (best < 0 || m.values[i][j] < m.values[i][best])) best = j;
      }
      used[best] = 1;
      greedy += m.values[i][best];
    }
    CHECK(opt.total_cost(m) <= greedy + 1e-12);
  }
}

TEST_CASE("solve_lap is equivariant under row permutation") {
  Rng rng(45);
  const CostMatrix m = random_costs(rng, 5, 5);
  const Assignment base = solve_lap(m);

  // Reverse the rows; matched columns must follow their rows.
  CostMatrix rev = m;
  std::reverse(rev.values.begin(), rev.values.end());
  const Assignment perm = solve_lap(rev);
  for (auto [i, j] : base.matches) {
    bool found = false;
    for (auto [pi, pj] : perm.matches) {
      if (pi == 4 - i && pj == j) found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("solve_lap canonical tie-break prefers low row then low col") {
  const Assignment a = solve_lap(make_costs({{1, 1}, {1, 1}}));
  REQUIRE(a.matches.size() == 2);
  CHECK(a.matches[0] == std::pair<int, int>{0, 0});
  CHECK(a.matches[1] == std::pair<int, int>{1, 1});
}

TEST_CASE("gate_by_riou builds costs and masks") {
  const auto m = gate_by_riou({{0.8, 0.1}, {0.05, 0.9}}, 0.3);
  CHECK(m.values[0][0] == doctest::Approx(0.2));
  CHECK(m.values[1][1] == doctest::Approx(0.1));
  CHECK_FALSE(m.forbidden[0][0]);
  CHECK(m.forbidden[0][1]);
  CHECK(m.forbidden[1][0]);
  CHECK_FALSE(m.forbidden[1][1]);

  const Assignment a = solve_lap(m);
  REQUIRE(a.matches.size() == 2);
  CHECK(a.matches[0] == std::pair<int, int>{0, 0});
  CHECK(a.matches[1] == std::pair<int, int>{1, 1});

  const auto open = gate_by_riou({{0.8, 0.1}}, 0.0);
  CHECK_FALSE(open.forbidden[0][0]);
  CHECK_FALSE(open.forbidden[0][1]);
}

TEST_CASE("max_weight_matching prefers heavy partial matchings") {
  // Cardinality-2 matching here weighs 2; the single heavy pair weighs 10.
  const auto picked = max_weight_matching({{10.0, 1.0}, {1.0, 0.0}});
  REQUIRE(picked.size() == 1);
  CHECK(picked[0] == std::pair<int, int>{0, 0});

  Rng rng(46);
  for (int trial = 0; trial < 60; ++trial) {
    const int r = rng.uniform_int(1, 5), c = rng.uniform_int(1, 5);
    std::vector<std::vector<double>> w(r, std::vector<double>(c, 0.0));
    for (auto& row : w) {
      for (double& v : row) v = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.0, 5.0);
    }
    const auto fast = max_weight_matching(w);
    double fast_total = 0.0;
    for (auto [i, j] : fast) fast_total += w[i][j];

    // Exhaustive maximum.
    double best = 0.0;
    std::vector<char> used(c, 0);
    auto rec = [&](auto&& self, int row, double acc) -> void {
      if (row == r) {
        best = std::max(best, acc);
        return;
      }
      self(self, row + 1, acc);
      for (int j = 0; j < c; ++j) {
        if (used[j] || w[row][j] <= 0.0) continue;
        used[j] = 1;
        self(self, row + 1, acc + w[row][j]);
        used[j] = 0;
      }
    };
    rec(rec, 0, 0.0);
    CHECK(fast_total == doctest::Approx(best).epsilon(1e-9));
  }
}
