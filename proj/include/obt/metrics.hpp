#pragma once

#include <array>
#include <map>
#include <vector>

#include "obt/geometry.hpp"

namespace obt {

struct LabeledInstance {
  int track_id = 0;
  int class_id = 0;
  OrientedBox box;
  bool truncated = false;
  double confidence = 1.0;
};

// Frames 1..N, stored contiguously; empty frames are allowed.
struct LabeledFrameSet {
  std::vector<std::vector<LabeledInstance>> frames;

  int frame_count() const { return static_cast<int>(frames.size()); }
  std::vector<LabeledInstance>& frame(int f) { return frames[f - 1]; }
  const std::vector<LabeledInstance>& frame(int f) const { return frames[f - 1]; }
  void ensure_frame(int f) {
    if (f > frame_count()) frames.resize(f);
  }
};

// HOTA localization thresholds: 0.05, 0.10, ..., 0.95.
constexpr int kHotaAlphaCount = 19;
inline double hota_alpha(int index) { return 0.05 * (index + 1); }

struct ClearResult {
  double mota = 0.0;
  long long fp = 0;
  long long fn = 0;
  long long idsw = 0;
  long long gt_count = 0;
};

struct HotaResult {
  double hota = 0.0;
  double deta = 0.0;
  double assa = 0.0;
  std::array<long long, kHotaAlphaCount> tp_per_alpha{};
};

struct ClassMetrics {
  double hota = 0.0;
  double mota = 0.0;
  double idf1 = 0.0;
  double deta = 0.0;
  double assa = 0.0;
  long long fp = 0;
  long long fn = 0;
  long long idsw = 0;
  long long gt_count = 0;
  std::array<long long, kHotaAlphaCount> tp_per_alpha{};
};

struct AggregateMetrics {
  double hota = 0.0;
  double mota = 0.0;
  double idf1 = 0.0;
  double deta = 0.0;
  double assa = 0.0;
};

struct MetricsReport {
  std::map<int, ClassMetrics> per_class;
  AggregateMetrics class_averaged;
  AggregateMetrics detection_averaged;
};

// CLEAR counts per class. Per-frame bipartite matching maximizes rIoU above
// alpha, keeping previous-frame pairs that still overlap at alpha.
std::map<int, ClearResult> clear_metrics(const LabeledFrameSet& gt, const LabeledFrameSet& pred,
                                         double alpha);

// Identity F1 from the optimal global matching between gt and predicted ids.
std::map<int, double> idf1(const LabeledFrameSet& gt, const LabeledFrameSet& pred, double alpha);

std::map<int, HotaResult> hota(const LabeledFrameSet& gt, const LabeledFrameSet& pred);

struct AggregatePair {
  AggregateMetrics class_averaged;
  AggregateMetrics detection_averaged;
};

// class_averaged: unweighted mean over classes with >= 1 gt instance.
// detection_averaged: mean weighted by per-class gt instance counts.
AggregatePair aggregate(const std::map<int, ClassMetrics>& per_class);

// Full evaluation: CLEAR at clear_alpha, IDF1 at clear_alpha, HOTA over the
// standard grid, plus both aggregations.
MetricsReport evaluate(const LabeledFrameSet& gt, const LabeledFrameSet& pred,
                       double clear_alpha = 0.5);

}  // namespace obt
