// Test-only reference implementations, kept independent of the library's
// computational paths: grid counting instead of polygon clipping, exhaustive
// enumeration instead of augmenting paths, direct definition expansion
// instead of incremental accumulators.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "obt/assignment.hpp"
#include "obt/geometry.hpp"
#include "obt/metrics.hpp"
#include "obt/rng.hpp"

namespace oracle {

inline bool point_in_box(const obt::OrientedBox& b, double x, double y, double c, double s) {
  const double dx = x - b.cx, dy = y - b.cy;
  const double lx = c * dx + s * dy;
  const double ly = -s * dx + c * dy;
  return std::fabs(lx) <= 0.5 * b.w && std::fabs(ly) <= 0.5 * b.h;
}

// Counts cells of a grid x grid lattice covering the joint bounding region.
inline double rasterized_riou(const obt::OrientedBox& a, const obt::OrientedBox& b, int grid) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  for (const obt::OrientedBox* box : {&a, &b}) {
    for (const obt::Point2& p : obt::corners(*box)) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
  }
  const double dx = (x1 - x0) / grid, dy = (y1 - y0) / grid;
  const double ca = std::cos(a.angle.radians()), sa = std::sin(a.angle.radians());
  const double cb = std::cos(b.angle.radians()), sb = std::sin(b.angle.radians());
  long long in_a = 0, in_b = 0, in_both = 0;
  for (int iy = 0; iy < grid; ++iy) {
    const double y = y0 + (iy + 0.5) * dy;
    for (int ix = 0; ix < grid; ++ix) {
      const double x = x0 + (ix + 0.5) * dx;
      const bool pa = point_in_box(a, x, y, ca, sa);
      const bool pb = point_in_box(b, x, y, cb, sb);
      in_a += pa;
      in_b += pb;
      in_both += pa && pb;
    }
  }
  const long long uni = in_a + in_b - in_both;
  return uni > 0 ? static_cast<double>(in_both) / static_cast<double>(uni) : 0.0;
}

inline double rasterized_area_fraction(const obt::OrientedBox& probe, const obt::OrientedBox& ref,
                                       int grid) {
  // Fraction of ref's area covered by probe, sampled over ref's bounds.
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  for (const obt::Point2& p : obt::corners(ref)) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const double dx = (x1 - x0) / grid, dy = (y1 - y0) / grid;
  const double cp = std::cos(probe.angle.radians()), sp = std::sin(probe.angle.radians());
  const double cr = std::cos(ref.angle.radians()), sr = std::sin(ref.angle.radians());
  long long in_ref = 0, in_both = 0;
  for (int iy = 0; iy < grid; ++iy) {
    const double y = y0 + (iy + 0.5) * dy;
    for (int ix = 0; ix < grid; ++ix) {
      const double x = x0 + (ix + 0.5) * dx;
      if (!point_in_box(ref, x, y, cr, sr)) continue;
      ++in_ref;
      in_both += point_in_box(probe, x, y, cp, sp);
    }
  }
  return in_ref > 0 ? static_cast<double>(in_both) / static_cast<double>(in_ref) : 0.0;
}

struct BruteForceLap {
  std::vector<int> col_of_row;  // -1 = unmatched
  int cardinality = 0;
  double total = 0.0;
};

// Exhaustive search: maximize cardinality, then minimize total cost, then
// prefer the lexicographically smallest column vector.
inline BruteForceLap brute_force_lap(const obt::CostMatrix& costs) {
  const int r = static_cast<int>(costs.rows());
  const int c = static_cast<int>(costs.cols());
  BruteForceLap best;
  best.col_of_row.assign(r, -1);
  best.cardinality = -1;

  std::vector<int> current(r, -1);
  std::vector<char> used(c, 0);
  auto better = [&](int card, double total) {
    if (card != best.cardinality) return card > best.cardinality;
    if (total != best.total) return total < best.total;
    return current < best.col_of_row;
  };
  auto recurse = [&](auto&& self, int row, int card, double total) -> void {
    if (row == r) {
      if (better(card, total)) {
        best.cardinality = card;
        best.total = total;
        best.col_of_row = current;
      }
      return;
    }
    self(self, row + 1, card, total);  // leave row unmatched
    for (int j = 0; j < c; ++j) {
      if (used[j] || costs.is_forbidden(row, j)) continue;
      used[j] = 1;
      current[row] = j;
      self(self, row + 1, card + 1, total + costs.values[row][j]);
      current[row] = -1;
      used[j] = 0;
    }
  };
  recurse(recurse, 0, 0, 0.0);
  return best;
}

// ---- CLEAR / IDF1 by direct definition expansion (single class) ----------

struct BfFrameInstance {
  int id = 0;
  obt::OrientedBox box;
};

using BfFrames = std::vector<std::vector<BfFrameInstance>>;

inline BfFrames to_bf(const obt::LabeledFrameSet& set, int class_id) {
  BfFrames frames(set.frame_count());
  for (int f = 1; f <= set.frame_count(); ++f) {
    for (const auto& inst : set.frame(f)) {
      if (inst.class_id == class_id) frames[f - 1].push_back({inst.track_id, inst.box});
    }
  }
  return frames;
}

struct BfClearCounts {
  long long fp = 0, fn = 0, idsw = 0, gt = 0;
};

// Enumerates every feasible per-frame matching (after the continuity step)
// and keeps the max-cardinality, max-similarity one.
inline BfClearCounts brute_force_clear(const BfFrames& gt, const BfFrames& pred, double alpha) {
  BfClearCounts counts;
  std::map<int, int> carried, last;
  const std::size_t nframes = std::max(gt.size(), pred.size());
  for (std::size_t f = 0; f < nframes; ++f) {
    static const std::vector<BfFrameInstance> kEmpty;
    const auto& g = f < gt.size() ? gt[f] : kEmpty;
    const auto& p = f < pred.size() ? pred[f] : kEmpty;
    counts.gt += static_cast<long long>(g.size());

    std::vector<std::vector<double>> sim(g.size(), std::vector<double>(p.size(), 0.0));
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = 0; j < p.size(); ++j) sim[i][j] = obt::riou(g[i].box, p[j].box);
    }

    std::vector<int> match(g.size(), -1);
    std::vector<char> taken(p.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto it = carried.find(g[i].id);
      if (it == carried.end()) continue;
      for (std::size_t j = 0; j < p.size(); ++j) {
        if (!taken[j] && p[j].id == it->second && sim[i][j] >= alpha) {
          match[i] = static_cast<int>(j);
          taken[j] = 1;
          break;
        }
      }
    }

    // Exhaustive search over the remaining feasible pairs.
    std::vector<int> rows, cols;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (match[i] < 0) rows.push_back(static_cast<int>(i));
    }
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (!taken[j]) cols.push_back(static_cast<int>(j));
    }
    std::vector<int> cur(rows.size(), -1), best(rows.size(), -1);
    std::vector<char> used(cols.size(), 0);
    int best_card = -1;
    double best_sim = 0.0;
    auto rec = [&](auto&& self, std::size_t idx, int card, double s) -> void {
      if (idx == rows.size()) {
        if (card > best_card || (card == best_card && s > best_sim + 1e-15) ||
            (card == best_card && std::fabs(s - best_sim) <= 1e-15 && cur < best)) {
          best_card = card;
          best_sim = s;
          best = cur;
        }
        return;
      }
      self(self, idx + 1, card, s);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        if (used[k]) continue;
        const double v = sim[rows[idx]][cols[k]];
        if (v < alpha) continue;
        used[k] = 1;
        cur[idx] = static_cast<int>(k);
        self(self, idx + 1, card + 1, s + v);
        cur[idx] = -1;
        used[k] = 0;
      }
    };
    rec(rec, 0, 0, 0.0);
    for (std::size_t idx = 0; idx < rows.size(); ++idx) {
      if (best[idx] >= 0) {
        match[rows[idx]] = cols[best[idx]];
        taken[cols[best[idx]]] = 1;
      }
    }

    carried.clear();
    long long matched = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (match[i] < 0) continue;
      ++matched;
      const int gid = g[i].id, pid = p[match[i]].id;
      auto it = last.find(gid);
      if (it != last.end() && it->second != pid) ++counts.idsw;
      last[gid] = pid;
      carried[gid] = pid;
    }
    counts.fn += static_cast<long long>(g.size()) - matched;
    counts.fp += static_cast<long long>(p.size()) - matched;
  }
  return counts;
}

inline double brute_force_idf1(const BfFrames& gt, const BfFrames& pred, double alpha) {
  std::map<int, long long> gcount, pcount;
  std::map<std::pair<int, int>, long long> overlap;
  const std::size_t nframes = std::max(gt.size(), pred.size());
  for (std::size_t f = 0; f < nframes; ++f) {
    static const std::vector<BfFrameInstance> kEmpty;
    const auto& g = f < gt.size() ? gt[f] : kEmpty;
    const auto& p = f < pred.size() ? pred[f] : kEmpty;
    for (const auto& gi : g) ++gcount[gi.id];
    for (const auto& pi : p) ++pcount[pi.id];
    for (const auto& gi : g) {
      for (const auto& pi : p) {
        if (obt::riou(gi.box, pi.box) >= alpha) ++overlap[{gi.id, pi.id}];
      }
    }
  }
  long long total_gt = 0, total_pred = 0;
  for (auto& [id, n] : gcount) total_gt += n;
  for (auto& [id, n] : pcount) total_pred += n;
  if (total_gt + total_pred == 0) return 0.0;

  std::vector<int> gids, pids;
  for (auto& [id, n] : gcount) gids.push_back(id);
  for (auto& [id, n] : pcount) pids.push_back(id);

  // Exhaustive max-weight matching over identity pairs.
  long long best = 0;
  std::vector<char> used(pids.size(), 0);
  auto rec = [&](auto&& self, std::size_t gi, long long acc) -> void {
    if (gi == gids.size()) {
      best = std::max(best, acc);
      return;
    }
    self(self, gi + 1, acc);
    for (std::size_t pj = 0; pj < pids.size(); ++pj) {
      if (used[pj]) continue;
      auto it = overlap.find({gids[gi], pids[pj]});
      if (it == overlap.end()) continue;
      used[pj] = 1;
      self(self, gi + 1, acc + it->second);
      used[pj] = 0;
    }
  };
  rec(rec, 0, 0);
  return 2.0 * static_cast<double>(best) / static_cast<double>(total_gt + total_pred);
}

// Random canonical box within a field, sizes in [size_min, size_max].
inline obt::OrientedBox random_box(obt::Rng& rng, double field, double size_min,
                                   double size_max) {
  const double w = rng.uniform(size_min, size_max);
  const double h = rng.uniform(size_min, size_max);
  return obt::canonicalize_box(rng.uniform(0.0, field), rng.uniform(0.0, field), w, h,
                               rng.uniform(-2.0 * 3.14159265358979, 2.0 * 3.14159265358979));
}

}  // namespace oracle
