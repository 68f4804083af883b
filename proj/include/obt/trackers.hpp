#pragma once

#include <optional>
#include <vector>

#include "obt/cmc.hpp"
#include "obt/geometry.hpp"
#include "obt/kalman.hpp"

namespace obt {

struct Detection {
  OrientedBox box;
  double confidence = 1.0;
  int class_id = 1;
};

enum class TrackerAlgorithm { SORT, BYTETRACK, OCSORT, BOTSORT };
enum class TrackStatus { TENTATIVE, CONFIRMED, LOST, REMOVED };

struct TrackerConfig {
  TrackerAlgorithm algorithm = TrackerAlgorithm::SORT;
  double det_threshold = 0.1;   // the uniform low-confidence floor
  double high_threshold = 0.6;  // ByteTrack-style split
  double riou_gate = 0.3;
  int max_age = 30;
  int min_hits = 3;
  double ocm_weight = 0.2;
  bool cmc_enabled = false;
  // Defaults to AREA_ASPECT for SORT/OC-SORT and WIDTH_HEIGHT for
  // ByteTrack/BoT-SORT, following the original parameterizations.
  std::optional<SizeParam> size_param;
  std::optional<FilterParams> filter;

  SizeParam effective_size_param() const;
  FilterParams effective_filter() const;
};

struct Track {
  int track_id = 0;
  MotionState state;
  int class_id = 0;
  int hits = 0;
  int age = 0;
  int time_since_update = 0;
  TrackStatus status = TrackStatus::TENTATIVE;
  std::optional<Detection> last_observation;
  std::optional<Point2> velocity_direction;  // unit vector between observations
  MotionState state_at_last_observation;     // replay anchor for OC-SORT
};

struct TrackOutput {
  int frame = 0;
  int track_id = 0;
  OrientedBox box;
  double confidence = 1.0;
  int class_id = 0;
};

class Tracker {
public:
  explicit Tracker(const TrackerConfig& config);

  // One frame of detections; `motion` maps the previous frame's coordinates
  // into this frame's (used by BoT-SORT when cmc is enabled).
  std::vector<TrackOutput> step(const std::vector<Detection>& detections,
                                const SimilarityTransform& motion = SimilarityTransform{});

  int frame_index() const { return frame_; }
  const std::vector<Track>& tracks() const { return tracks_; }

private:
  struct RoundResult {
    std::vector<std::pair<int, int>> matches;  // (track index, detection index)
    std::vector<int> unmatched_tracks;
    std::vector<int> unmatched_detections;
  };

  RoundResult associate(const std::vector<int>& track_indices,
                        const std::vector<Detection>& detections,
                        const std::vector<int>& det_indices) const;
  void apply_update(Track& track, const Detection& det);
  void spawn(const Detection& det);

  TrackerConfig config_;
  SizeParam size_param_;
  FilterParams filter_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  int frame_ = 0;
};

// Convenience wrapper: transforms are required iff BOTSORT with cmc enabled;
// element f maps frame f-1 into frame f (element 0 is ignored).
std::vector<TrackOutput> run_sequence(
    const TrackerConfig& config, const std::vector<std::vector<Detection>>& frames,
    const std::optional<std::vector<SimilarityTransform>>& transforms = std::nullopt);

}  // namespace obt
