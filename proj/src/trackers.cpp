#include "obt/trackers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "obt/assignment.hpp"

namespace obt {

SizeParam TrackerConfig::effective_size_param() const {
  if (size_param) return *size_param;
  switch (algorithm) {
    case TrackerAlgorithm::SORT:
    case TrackerAlgorithm::OCSORT:
      return SizeParam::AREA_ASPECT;
    case TrackerAlgorithm::BYTETRACK:
    case TrackerAlgorithm::BOTSORT:
      return SizeParam::WIDTH_HEIGHT;
  }
  return SizeParam::WIDTH_HEIGHT;
}

FilterParams TrackerConfig::effective_filter() const {
  return filter ? *filter : FilterParams::defaults(effective_size_param());
}

namespace {

void validate_config(const TrackerConfig& c) {
  if (!(c.det_threshold >= 0.0 && c.det_threshold <= c.high_threshold &&
        c.high_threshold <= 1.0)) {
    throw std::invalid_argument("tracker config: need 0 <= det <= high <= 1");
  }
  if (!(c.riou_gate >= 0.0 && c.riou_gate <= 1.0)) {
    throw std::invalid_argument("tracker config: riou_gate outside [0, 1]");
  }
  if (c.max_age < 0 || c.min_hits < 1 || c.ocm_weight < 0.0) {
    throw std::invalid_argument("tracker config: bad lifecycle parameter");
  }
}

// Transform a predicted state into the current frame (BoT-SORT cmc step).
void apply_motion_to_state(MotionState& state, const SimilarityTransform& t) {
  const double c = std::cos(t.rotation), s = std::sin(t.rotation);
  const double sc = t.scale;

  StateMatrix j = StateMatrix::Identity();
  j(0, 0) = sc * c;
  j(0, 1) = -sc * s;
  j(1, 0) = sc * s;
  j(1, 1) = sc * c;
  j(5, 5) = sc * c;
  j(5, 6) = -sc * s;
  j(6, 5) = sc * s;
  j(6, 6) = sc * c;
  const bool area = state.size_param == SizeParam::AREA_ASPECT;
  const double size_factor = area ? sc * sc : sc;
  const double aspect_factor = area ? 1.0 : sc;
  j(2, 2) = size_factor;
  j(3, 3) = aspect_factor;
  j(7, 7) = size_factor;
  j(8, 8) = aspect_factor;

  StateVector m = state.mean;
  const Point2 p = t.apply(Point2{m(0), m(1)});
  const double vx = m(5), vy = m(6);
  m(0) = p.x;
  m(1) = p.y;
  m(5) = sc * (c * vx - s * vy);
  m(6) = sc * (s * vx + c * vy);
  m(2) *= size_factor;
  m(3) *= aspect_factor;
  m(7) *= size_factor;
  m(8) *= aspect_factor;
  m(4) = canonicalize_angle(m(4) + t.rotation);
  state.mean = m;
  state.covariance = (j * state.covariance * j.transpose()).eval();
}

// Direction disagreement in [0, 1]: angle between unit vectors over pi.
double direction_inconsistency(const Point2& a, const Point2& b) {
  const double dot = std::clamp(a.x * b.x + a.y * b.y, -1.0, 1.0);
  return std::acos(dot) / std::numbers::pi;
}

OrientedBox interpolate_box(const OrientedBox& from, const OrientedBox& to, double frac) {
  const double theta =
      from.angle.radians() + angle_residual(to.angle, from.angle) * frac;
  return canonicalize_box(from.cx + (to.cx - from.cx) * frac, from.cy + (to.cy - from.cy) * frac,
                          from.w + (to.w - from.w) * frac, from.h + (to.h - from.h) * frac,
                          theta);
}

}  // namespace

Tracker::Tracker(const TrackerConfig& config)
    : config_(config),
      size_param_(config.effective_size_param()),
      filter_(config.effective_filter()) {
  validate_config(config_);
}

Tracker::RoundResult Tracker::associate(const std::vector<int>& track_indices,
                                        const std::vector<Detection>& detections,
                                        const std::vector<int>& det_indices) const {
  RoundResult result;
  // Class-pure association: split both sides by class id first.
  std::map<int, std::pair<std::vector<int>, std::vector<int>>> by_class;
  for (int ti : track_indices) by_class[tracks_[ti].class_id].first.push_back(ti);
  for (int di : det_indices) by_class[detections[di].class_id].second.push_back(di);

  for (auto& [cls, sides] : by_class) {
    auto& [cls_tracks, cls_dets] = sides;
    if (cls_tracks.empty() || cls_dets.empty()) {
      for (int ti : cls_tracks) result.unmatched_tracks.push_back(ti);
      for (int di : cls_dets) result.unmatched_detections.push_back(di);
      continue;
    }
    std::vector<OrientedBox> track_boxes, det_boxes;
    track_boxes.reserve(cls_tracks.size());
    for (int ti : cls_tracks) track_boxes.push_back(state_to_box(tracks_[ti].state));
    det_boxes.reserve(cls_dets.size());
    for (int di : cls_dets) det_boxes.push_back(detections[di].box);

    const auto sim = riou_matrix(track_boxes, det_boxes);
    CostMatrix costs = gate_by_riou(sim, config_.riou_gate);

    if (config_.algorithm == TrackerAlgorithm::OCSORT && config_.ocm_weight > 0.0) {
      // Observation-centric momentum: penalize candidates that disagree with
      // the track's observed heading.
      for (std::size_t r = 0; r < cls_tracks.size(); ++r) {
        const Track& track = tracks_[cls_tracks[r]];
        if (!track.velocity_direction || !track.last_observation) continue;
        const Point2 from{track.last_observation->box.cx, track.last_observation->box.cy};
        for (std::size_t c = 0; c < cls_dets.size(); ++c) {
          const Detection& det = detections[cls_dets[c]];
          const double dx = det.box.cx - from.x, dy = det.box.cy - from.y;
          const double norm = std::hypot(dx, dy);
          if (norm < 1e-9) continue;
          const Point2 dir{dx / norm, dy / norm};
          costs.values[r][c] +=
              config_.ocm_weight * direction_inconsistency(*track.velocity_direction, dir);
        }
      }
    }

    const Assignment assigned = solve_lap(costs);
    for (auto [r, c] : assigned.matches) {
      result.matches.emplace_back(cls_tracks[r], cls_dets[c]);
    }
    for (int r : assigned.unmatched_rows) result.unmatched_tracks.push_back(cls_tracks[r]);
    for (int c : assigned.unmatched_cols) result.unmatched_detections.push_back(cls_dets[c]);
  }
  std::sort(result.matches.begin(), result.matches.end());
  std::sort(result.unmatched_tracks.begin(), result.unmatched_tracks.end());
  std::sort(result.unmatched_detections.begin(), result.unmatched_detections.end());
  return result;
}

void Tracker::apply_update(Track& track, const Detection& det) {
  const bool gap = track.time_since_update >= 1;
  if (config_.algorithm == TrackerAlgorithm::OCSORT && gap && track.last_observation) {
    // Observation-centric re-update: replay the missed frames along a
    // straight virtual trajectory from the last observation.
    const OrientedBox& from = track.last_observation->box;
    const int missed = track.time_since_update;
    MotionState replay = track.state_at_last_observation;
    for (int i = 1; i <= missed; ++i) {
      const double frac = static_cast<double>(i) / static_cast<double>(missed + 1);
      replay = predict(replay, filter_);
      replay = update(replay, interpolate_box(from, det.box, frac), filter_);
    }
    replay = predict(replay, filter_);
    track.state = replay;
  }
  track.state = update(track.state, det.box, filter_);

  if (track.last_observation) {
    const double dx = det.box.cx - track.last_observation->box.cx;
    const double dy = det.box.cy - track.last_observation->box.cy;
    const double norm = std::hypot(dx, dy);
    if (norm > 1e-9) track.velocity_direction = Point2{dx / norm, dy / norm};
  }
  track.last_observation = det;
  track.state_at_last_observation = track.state;
  ++track.hits;
  track.time_since_update = 0;
  if (track.status == TrackStatus::LOST) {
    track.status = TrackStatus::CONFIRMED;
  } else if (track.status == TrackStatus::TENTATIVE && track.hits >= config_.min_hits) {
    track.status = TrackStatus::CONFIRMED;
  }
}

void Tracker::spawn(const Detection& det) {
  Track track;
  track.track_id = next_id_++;
  track.state = init_state(det.box, filter_, size_param_);
  track.class_id = det.class_id;
  track.hits = 1;
  track.age = 0;
  track.time_since_update = 0;
  // Cold start: confirm immediately during the first min_hits frames so the
  // sequence head is not silently dropped.
  track.status = (frame_ <= config_.min_hits || config_.min_hits <= 1)
                     ? TrackStatus::CONFIRMED
                     : TrackStatus::TENTATIVE;
  track.last_observation = det;
  track.state_at_last_observation = track.state;
  tracks_.push_back(std::move(track));
}

std::vector<TrackOutput> Tracker::step(const std::vector<Detection>& detections,
                                       const SimilarityTransform& motion) {
  ++frame_;

  std::vector<int> keep_dets;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    if (detections[i].confidence >= config_.det_threshold) {
      keep_dets.push_back(static_cast<int>(i));
    }
  }

  for (Track& track : tracks_) {
    track.state = predict(track.state, filter_);
    ++track.age;
  }
  if (config_.algorithm == TrackerAlgorithm::BOTSORT && config_.cmc_enabled) {
    for (Track& track : tracks_) apply_motion_to_state(track.state, motion);
  }

  std::vector<int> all_tracks(tracks_.size());
  for (std::size_t i = 0; i < tracks_.size(); ++i) all_tracks[i] = static_cast<int>(i);

  std::vector<int> matched_tracks;
  std::vector<int> spawn_candidates;
  std::vector<std::pair<int, int>> matches;

  const bool two_stage = config_.algorithm == TrackerAlgorithm::BYTETRACK ||
                         config_.algorithm == TrackerAlgorithm::BOTSORT;
  if (two_stage) {
    std::vector<int> high, low;
    for (int di : keep_dets) {
      (detections[di].confidence >= config_.high_threshold ? high : low).push_back(di);
    }
    const RoundResult first = associate(all_tracks, detections, high);
    const RoundResult second = associate(first.unmatched_tracks, detections, low);
    matches = first.matches;
    matches.insert(matches.end(), second.matches.begin(), second.matches.end());
    spawn_candidates = first.unmatched_detections;  // low-confidence leftovers never spawn
  } else {
    const RoundResult result = associate(all_tracks, detections, keep_dets);
    matches = result.matches;
    spawn_candidates = result.unmatched_detections;
  }

  std::vector<char> was_matched(tracks_.size(), 0);
  for (auto [ti, di] : matches) {
    apply_update(tracks_[ti], detections[di]);
    was_matched[ti] = 1;
  }

  std::vector<Track> survivors;
  survivors.reserve(tracks_.size());
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    Track& track = tracks_[i];
    if (!was_matched[i]) {
      ++track.time_since_update;
      if (track.status == TrackStatus::TENTATIVE) {
        continue;  // dropped before confirmation
      }
      if (track.status == TrackStatus::CONFIRMED) track.status = TrackStatus::LOST;
      if (track.time_since_update > config_.max_age) {
        track.status = TrackStatus::REMOVED;
        continue;
      }
    }
    survivors.push_back(std::move(track));
  }
  tracks_ = std::move(survivors);

  for (int di : spawn_candidates) spawn(detections[di]);

  std::vector<TrackOutput> outputs;
  for (const Track& track : tracks_) {
    if (track.status == TrackStatus::CONFIRMED && track.time_since_update == 0 &&
        track.last_observation) {
      TrackOutput o;
      o.frame = frame_;
      o.track_id = track.track_id;
      o.box = state_to_box(track.state);
      o.confidence = track.last_observation->confidence;
      o.class_id = track.class_id;
      outputs.push_back(o);
    }
  }
  return outputs;
}

std::vector<TrackOutput> run_sequence(
    const TrackerConfig& config, const std::vector<std::vector<Detection>>& frames,
    const std::optional<std::vector<SimilarityTransform>>& transforms) {
  if (config.algorithm == TrackerAlgorithm::BOTSORT && config.cmc_enabled && !transforms) {
    throw std::invalid_argument("run_sequence: BOTSORT with cmc requires transforms");
  }
  if (transforms && transforms->size() < frames.size()) {
    throw std::invalid_argument("run_sequence: transforms shorter than the sequence");
  }
  Tracker tracker(config);
  std::vector<TrackOutput> outputs;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const SimilarityTransform motion =
        transforms && f > 0 ? (*transforms)[f] : SimilarityTransform{};
    auto frame_out = tracker.step(frames[f], motion);
    outputs.insert(outputs.end(), frame_out.begin(), frame_out.end());
  }
  return outputs;
}

}  // namespace obt
