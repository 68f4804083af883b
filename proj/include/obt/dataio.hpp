#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "obt/cmc.hpp"
#include "obt/geometry.hpp"
#include "obt/metrics.hpp"

namespace obt {

// Class ids 1..8: pedestrian, car, van, truck, bus, tricycle, bike,
// awning-bike.
constexpr int kNumClasses = 8;
const char* class_name(int class_id);

enum class Superclass { HUMAN, VEHICLE, BICYCLE };
Superclass superclass_of(int class_id);

// One line of the OBB-MOT CSV:
// frame,id,cx,cy,w,h,theta,conf,class,truncated
struct ObbMotRecord {
  int frame = 1;        // 1-based
  int track_id = -1;    // -1 for raw detections
  OrientedBox box;
  double confidence = 1.0;
  int class_id = 1;
  bool truncated = false;
};

// Strict parse: rejects malformed lines, out-of-range classes, and duplicate
// (frame, id) pairs with id != -1. Lines starting with '#' are skipped.
LabeledFrameSet parse_obbmot(std::istream& in);

// Lenient variant for QA input: duplicates become findings for validate()
// instead of parse errors.
LabeledFrameSet parse_obbmot_qa(std::istream& in);

// Deterministic writer: rows sorted by (frame, track_id), fixed 6-decimal
// reals. write then parse is an identity on canonical data.
void write_obbmot(const LabeledFrameSet& set, std::ostream& out);

enum class DiscardReason { CENTER_OUTSIDE, IOF_BELOW_HALF, BEYOND_100PX };
const char* discard_reason_name(DiscardReason r);

struct DiscardedInstance {
  int frame = 0;
  int track_id = 0;
  DiscardReason reason = DiscardReason::CENTER_OUTSIDE;
};

struct PostprocessResult {
  LabeledFrameSet kept;  // boundary-crossing survivors flagged truncated
  std::vector<DiscardedInstance> discarded;
};

// Annotation post-processing: drop instances whose center leaves the image,
// whose IoF drops below 0.5, or whose box extends more than 100 px beyond
// the image; the surviving boundary-crossers are marked truncated.
PostprocessResult postprocess(const LabeledFrameSet& set, double image_width,
                              double image_height);

enum class FindingSeverity { ERROR, WARNING };
enum class FindingKind { DUPLICATE_ID, CLASS_MISMATCH, DISAPPEARED, NEW_ID };

struct Finding {
  FindingSeverity severity = FindingSeverity::WARNING;
  FindingKind kind = FindingKind::NEW_ID;
  int frame = 0;
  int track_id = 0;
};

const char* finding_kind_name(FindingKind k);

// Annotation QA: errors for duplicate ids within a frame and id-class
// mismatches across adjacent frames; warnings for ids that vanish from the
// previous frame or first appear after frame 1.
std::vector<Finding> validate(const LabeledFrameSet& set);

// Band-major multispectral cube.
struct SpectralCube {
  int bands = 0;
  int height = 0;
  int width = 0;
  std::vector<float> values;

  float at(int band, int y, int x) const {
    return values[(static_cast<std::size_t>(band) * height + y) * width + x];
  }
  float& at(int band, int y, int x) {
    return values[(static_cast<std::size_t>(band) * height + y) * width + x];
  }
};

// MSC1 container: magic "MSC1", little-endian u32 C, H, W, then C*H*W
// little-endian f32, band-major. Trailing bytes are an error.
SpectralCube read_cube(std::istream& in);
void write_cube(const SpectralCube& cube, std::ostream& out);

// Pseudo-RGB from 1-based bands (5, 3, 2) -> (R, G, B).
SpectralCube rgb_proxy(const SpectralCube& cube);

// Mean over bands, for optical-flow input.
GrayFrame band_mean(const SpectralCube& cube);

// Binary 8-bit PGM (P5, maxval 255) for grayscale fixtures.
GrayFrame read_pgm(std::istream& in);
void write_pgm(const GrayFrame& frame, std::ostream& out);

struct StatsReport {
  long long max_objects_per_frame = 0;
  double neighbors_at_300px = 0.0;  // mean count of same-frame neighbors
  long long instance_count = 0;
  long long track_count = 0;
  double mean_drone = 0.0;
  double mean_object = 0.0;
  double mean_total = 0.0;
  double mean_iou_object = 0.0;
  double mean_iou_total = 0.0;
  long long displacement_pairs = 0;
  std::array<long long, 10> riou_histogram{};        // inter-frame IoU, 0.1 bins
  std::map<int, long long> class_counts;             // class id -> instances
  std::map<int, long long> trajectory_length_hist;   // length -> tracks
};

// Inter-frame transform convention used across the toolkit: element f of a
// per-sequence vector maps frame f-1 coordinates into frame f (0-based), so
// element 0 is always the identity.
//
// Pass std::nullopt to treat the platform as static.
StatsReport dataset_stats(
    const std::vector<LabeledFrameSet>& sequences,
    const std::optional<std::vector<std::vector<SimilarityTransform>>>& transforms);

// CSV with header "section,key,value", one row per scalar or bin.
void write_stats_csv(const StatsReport& report, std::ostream& out);

// Transforms CSV: header frame,scale,rotation,tx,ty with 1-based frame;
// the row for frame t holds element t-1 of the vector above.
std::vector<SimilarityTransform> read_transforms_csv(std::istream& in);
void write_transforms_csv(const std::vector<SimilarityTransform>& transforms, std::ostream& out);

}  // namespace obt
