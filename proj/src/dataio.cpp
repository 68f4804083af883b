#include "obt/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <iomanip>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace obt {

const char* class_name(int class_id) {
  static constexpr const char* kNames[] = {"pedestrian", "car",      "van",  "truck",
                                           "bus",        "tricycle", "bike", "awning-bike"};
  if (class_id < 1 || class_id > kNumClasses) {
    throw std::domain_error("class_name: class id out of range");
  }
  return kNames[class_id - 1];
}

Superclass superclass_of(int class_id) {
  if (class_id == 1) return Superclass::HUMAN;
  if (class_id >= 2 && class_id <= 5) return Superclass::VEHICLE;
  if (class_id >= 6 && class_id <= 8) return Superclass::BICYCLE;
  throw std::domain_error("superclass_of: class id out of range");
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_real(const std::string& s, int line_no, const char* what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\r')) ++pos;
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
}

int parse_int(const std::string& s, int line_no, const char* what) {
  const double v = parse_real(s, line_no, what);
  if (v != std::floor(v)) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": non-integer " + what);
  }
  return static_cast<int>(v);
}

LabeledFrameSet parse_obbmot_impl(std::istream& in, bool strict) {
  LabeledFrameSet set;
  std::set<std::pair<int, int>> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;

    const auto fields = split_csv(line);
    if (fields.size() != 10) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected 10 fields, got " +
                               std::to_string(fields.size()));
    }
    const int frame = parse_int(fields[0], line_no, "frame");
    const int id = parse_int(fields[1], line_no, "id");
    const double cx = parse_real(fields[2], line_no, "cx");
    const double cy = parse_real(fields[3], line_no, "cy");
    const double w = parse_real(fields[4], line_no, "w");
    const double h = parse_real(fields[5], line_no, "h");
    const double theta = parse_real(fields[6], line_no, "theta");
    const double conf = parse_real(fields[7], line_no, "conf");
    const int cls = parse_int(fields[8], line_no, "class");
    const int truncated = parse_int(fields[9], line_no, "truncated");

    if (frame < 1) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": frame must be >= 1");
    }
    if (cls < 1 || cls > kNumClasses) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": class out of range 1..8");
    }
    if (truncated != 0 && truncated != 1) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": truncated must be 0 or 1");
    }
    if (strict && id != -1 && !seen.insert({frame, id}).second) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": duplicate id " +
                               std::to_string(id) + " in frame " + std::to_string(frame));
    }

    LabeledInstance inst;
    inst.track_id = id;
    inst.class_id = cls;
    inst.box = canonicalize_box(cx, cy, w, h, theta);
    inst.confidence = conf;
    inst.truncated = truncated == 1;
    set.ensure_frame(frame);
    set.frame(frame).push_back(inst);
  }
  return set;
}

}  // namespace

LabeledFrameSet parse_obbmot(std::istream& in) { return parse_obbmot_impl(in, true); }

LabeledFrameSet parse_obbmot_qa(std::istream& in) { return parse_obbmot_impl(in, false); }

void write_obbmot(const LabeledFrameSet& set, std::ostream& out) {
  out << std::fixed << std::setprecision(6);
  for (int f = 1; f <= set.frame_count(); ++f) {
    std::vector<const LabeledInstance*> rows;
    for (const auto& inst : set.frame(f)) rows.push_back(&inst);
    std::stable_sort(rows.begin(), rows.end(), [](const LabeledInstance* a,
                                                  const LabeledInstance* b) {
      return a->track_id < b->track_id;
    });
    for (const auto* inst : rows) {
      out << f << ',' << inst->track_id << ',' << inst->box.cx << ',' << inst->box.cy << ','
          << inst->box.w << ',' << inst->box.h << ',' << inst->box.angle.radians() << ','
          << inst->confidence << ',' << inst->class_id << ',' << (inst->truncated ? 1 : 0)
          << '\n';
    }
  }
}

const char* discard_reason_name(DiscardReason r) {
  switch (r) {
    case DiscardReason::CENTER_OUTSIDE: return "CENTER_OUTSIDE";
    case DiscardReason::IOF_BELOW_HALF: return "IOF_BELOW_HALF";
    case DiscardReason::BEYOND_100PX: return "BEYOND_100PX";
  }
  return "UNKNOWN";
}

PostprocessResult postprocess(const LabeledFrameSet& set, double image_width,
                              double image_height) {
  constexpr double kMaxOverflow = 100.0;  // px beyond the image boundary
  const Rect image{0.0, 0.0, image_width, image_height};

  PostprocessResult result;
  result.kept.frames.resize(set.frame_count());
  for (int f = 1; f <= set.frame_count(); ++f) {
    for (const auto& inst : set.frame(f)) {
      const auto& b = inst.box;
      if (!image.contains(Point2{b.cx, b.cy})) {
        result.discarded.push_back({f, inst.track_id, DiscardReason::CENTER_OUTSIDE});
        continue;
      }
      if (iof(b, image) < 0.5) {
        result.discarded.push_back({f, inst.track_id, DiscardReason::IOF_BELOW_HALF});
        continue;
      }
      double max_excess = 0.0;
      bool outside = false;
      for (const Point2& c : corners(b)) {
        const double ex = std::max({0.0 - c.x, c.x - image_width, 0.0});
        const double ey = std::max({0.0 - c.y, c.y - image_height, 0.0});
        max_excess = std::max({max_excess, ex, ey});
        if (c.x < 0.0 || c.x > image_width || c.y < 0.0 || c.y > image_height) outside = true;
      }
      if (max_excess > kMaxOverflow) {
        result.discarded.push_back({f, inst.track_id, DiscardReason::BEYOND_100PX});
        continue;
      }
      LabeledInstance kept = inst;
      if (outside) kept.truncated = true;
      result.kept.frame(f).push_back(kept);
    }
  }
  return result;
}

const char* finding_kind_name(FindingKind k) {
  switch (k) {
    case FindingKind::DUPLICATE_ID: return "DUPLICATE_ID";
    case FindingKind::CLASS_MISMATCH: return "CLASS_MISMATCH";
    case FindingKind::DISAPPEARED: return "DISAPPEARED";
    case FindingKind::NEW_ID: return "NEW_ID";
  }
  return "UNKNOWN";
}

std::vector<Finding> validate(const LabeledFrameSet& set) {
  std::vector<Finding> findings;
  std::map<int, int> prev_class;  // id -> class in previous frame
  for (int f = 1; f <= set.frame_count(); ++f) {
    std::map<int, int> cur_class;
    std::set<int> dup_reported;
    for (const auto& inst : set.frame(f)) {
      auto [it, fresh] = cur_class.emplace(inst.track_id, inst.class_id);
      if (!fresh && dup_reported.insert(inst.track_id).second) {
        findings.push_back(
            {FindingSeverity::ERROR, FindingKind::DUPLICATE_ID, f, inst.track_id});
      }
    }
    for (const auto& [id, cls] : cur_class) {
      auto it = prev_class.find(id);
      if (it == prev_class.end()) {
        if (f > 1) findings.push_back({FindingSeverity::WARNING, FindingKind::NEW_ID, f, id});
      } else if (it->second != cls) {
        findings.push_back({FindingSeverity::ERROR, FindingKind::CLASS_MISMATCH, f, id});
      }
    }
    for (const auto& [id, cls] : prev_class) {
      if (!cur_class.count(id)) {
        findings.push_back({FindingSeverity::WARNING, FindingKind::DISAPPEARED, f, id});
      }
    }
    prev_class = std::move(cur_class);
  }
  return findings;
}

namespace {

std::uint32_t read_u32le(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw std::runtime_error("cube: short read in header");
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32le(std::uint32_t v, std::ostream& out) {
  const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

float f32_from_le(const unsigned char* b) {
  std::uint32_t u = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                    (static_cast<std::uint32_t>(b[2]) << 16) |
                    (static_cast<std::uint32_t>(b[3]) << 24);
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

void f32_to_le(float f, unsigned char* b) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  b[0] = static_cast<unsigned char>(u & 0xff);
  b[1] = static_cast<unsigned char>((u >> 8) & 0xff);
  b[2] = static_cast<unsigned char>((u >> 16) & 0xff);
  b[3] = static_cast<unsigned char>((u >> 24) & 0xff);
}

}  // namespace

SpectralCube read_cube(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "MSC1", 4) != 0) {
    throw std::runtime_error("cube: bad magic, expected MSC1");
  }
  SpectralCube cube;
  cube.bands = static_cast<int>(read_u32le(in));
  cube.height = static_cast<int>(read_u32le(in));
  cube.width = static_cast<int>(read_u32le(in));
  if (cube.bands < 1 || cube.height < 1 || cube.width < 1) {
    throw std::runtime_error("cube: invalid dimensions");
  }
  const std::size_t count =
      static_cast<std::size_t>(cube.bands) * cube.height * cube.width;
  cube.values.resize(count);
  std::vector<unsigned char> raw(count * 4);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw std::runtime_error("cube: short read in payload");
  }
  for (std::size_t i = 0; i < count; ++i) {
    cube.values[i] = f32_from_le(raw.data() + i * 4);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("cube: trailing data after payload");
  }
  return cube;
}

void write_cube(const SpectralCube& cube, std::ostream& out) {
  out.write("MSC1", 4);
  write_u32le(static_cast<std::uint32_t>(cube.bands), out);
  write_u32le(static_cast<std::uint32_t>(cube.height), out);
  write_u32le(static_cast<std::uint32_t>(cube.width), out);
  std::vector<unsigned char> raw(cube.values.size() * 4);
  for (std::size_t i = 0; i < cube.values.size(); ++i) {
    f32_to_le(cube.values[i], raw.data() + i * 4);
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

SpectralCube rgb_proxy(const SpectralCube& cube) {
  if (cube.bands < 5) {
    throw std::domain_error("rgb_proxy: need at least 5 bands");
  }
  SpectralCube out;
  out.bands = 3;
  out.height = cube.height;
  out.width = cube.width;
  out.values.resize(static_cast<std::size_t>(3) * cube.height * cube.width);
  const int sources[3] = {4, 2, 1};  // bands 5, 3, 2 in 1-based numbering
  const std::size_t plane = static_cast<std::size_t>(cube.height) * cube.width;
  for (int b = 0; b < 3; ++b) {
    std::copy_n(cube.values.begin() + sources[b] * plane, plane, out.values.begin() + b * plane);
  }
  return out;
}

GrayFrame band_mean(const SpectralCube& cube) {
  GrayFrame frame;
  frame.width = cube.width;
  frame.height = cube.height;
  frame.values.assign(static_cast<std::size_t>(cube.width) * cube.height, 0.0);
  const std::size_t plane = static_cast<std::size_t>(cube.height) * cube.width;
  for (int b = 0; b < cube.bands; ++b) {
    for (std::size_t i = 0; i < plane; ++i) {
      frame.values[i] += cube.values[b * plane + i];
    }
  }
  for (double& v : frame.values) v /= cube.bands;
  return frame;
}

GrayFrame read_pgm(std::istream& in) {
  std::string magic;
  in >> magic;
  if (magic != "P5") throw std::runtime_error("pgm: expected P5 magic");
  auto next_token = [&]() {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw std::runtime_error("pgm: truncated header");
  };
  const int width = std::stoi(next_token());
  const int height = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (width < 1 || height < 1 || maxval != 255) {
    throw std::runtime_error("pgm: unsupported dimensions or maxval");
  }
  in.get();  // single whitespace after maxval
  std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw std::runtime_error("pgm: short pixel data");
  }
  GrayFrame frame;
  frame.width = width;
  frame.height = height;
  frame.values.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) frame.values[i] = raw[i];
  return frame;
}

void write_pgm(const GrayFrame& frame, std::ostream& out) {
  out << "P5\n" << frame.width << ' ' << frame.height << "\n255\n";
  std::vector<unsigned char> raw(frame.values.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double v = std::clamp(frame.values[i], 0.0, 255.0);
    raw[i] = static_cast<unsigned char>(std::lround(v));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

StatsReport dataset_stats(
    const std::vector<LabeledFrameSet>& sequences,
    const std::optional<std::vector<std::vector<SimilarityTransform>>>& transforms) {
  StatsReport report;
  long long neighbor_sum = 0;
  double drone_sum = 0.0, object_sum = 0.0, total_sum = 0.0;
  double iou_obj_sum = 0.0, iou_tot_sum = 0.0;

  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const LabeledFrameSet& seq = sequences[s];
    std::map<int, long long> track_frames;
    std::map<int, const LabeledInstance*> prev_by_id;
    for (int f = 1; f <= seq.frame_count(); ++f) {
      const auto& insts = seq.frame(f);
      report.max_objects_per_frame =
          std::max(report.max_objects_per_frame, static_cast<long long>(insts.size()));
      report.instance_count += static_cast<long long>(insts.size());
      for (const auto& inst : insts) {
        ++report.class_counts[inst.class_id];
        ++track_frames[inst.track_id];
      }
      // Neighbor density: same frame, any class, anchor excluded.
      for (std::size_t i = 0; i < insts.size(); ++i) {
        for (std::size_t j = 0; j < insts.size(); ++j) {
          if (i == j) continue;
          const double dx = insts[i].box.cx - insts[j].box.cx;
          const double dy = insts[i].box.cy - insts[j].box.cy;
          if (dx * dx + dy * dy <= 300.0 * 300.0) ++neighbor_sum;
        }
      }
      // Consecutive-frame displacement decomposition.
      std::map<int, const LabeledInstance*> cur_by_id;
      for (const auto& inst : insts) cur_by_id[inst.track_id] = &inst;
      SimilarityTransform t;  // identity when no transforms supplied
      if (transforms && s < transforms->size() &&
          f - 1 < static_cast<int>((*transforms)[s].size())) {
        t = (*transforms)[s][f - 1];
      }
      for (const auto& [id, inst] : cur_by_id) {
        auto it = prev_by_id.find(id);
        if (it == prev_by_id.end()) continue;
        const DisplacementStats d = decompose_displacement(it->second->box, inst->box, t);
        drone_sum += d.drone;
        object_sum += d.object;
        total_sum += d.total;
        iou_obj_sum += d.iou_object;
        iou_tot_sum += d.iou_total;
        ++report.displacement_pairs;
        int bin = static_cast<int>(d.iou_total * 10.0);
        if (bin > 9) bin = 9;
        if (bin < 0) bin = 0;
        ++report.riou_histogram[bin];
      }
      prev_by_id = std::move(cur_by_id);
    }
    for (const auto& [id, frames] : track_frames) {
      ++report.trajectory_length_hist[static_cast<int>(frames)];
      ++report.track_count;
    }
  }
  if (report.instance_count > 0) {
    report.neighbors_at_300px =
        static_cast<double>(neighbor_sum) / static_cast<double>(report.instance_count);
  }
  if (report.displacement_pairs > 0) {
    const double inv = 1.0 / static_cast<double>(report.displacement_pairs);
    report.mean_drone = drone_sum * inv;
    report.mean_object = object_sum * inv;
    report.mean_total = total_sum * inv;
    report.mean_iou_object = iou_obj_sum * inv;
    report.mean_iou_total = iou_tot_sum * inv;
  }
  return report;
}

void write_stats_csv(const StatsReport& report, std::ostream& out) {
  out << "section,key,value\n";
  out << std::fixed << std::setprecision(6);
  out << "density,max_objects_per_frame," << report.max_objects_per_frame << '\n';
  out << "density,neighbors_at_300px," << report.neighbors_at_300px << '\n';
  out << "counts,instances," << report.instance_count << '\n';
  out << "counts,tracks," << report.track_count << '\n';
  out << "displacement,drone," << report.mean_drone << '\n';
  out << "displacement,object," << report.mean_object << '\n';
  out << "displacement,total," << report.mean_total << '\n';
  out << "displacement,iou_object," << report.mean_iou_object << '\n';
  out << "displacement,iou_total," << report.mean_iou_total << '\n';
  out << "displacement,pairs," << report.displacement_pairs << '\n';
  for (int b = 0; b < 10; ++b) {
    std::ostringstream label;
    label << "0." << b << (b == 9 ? "-1.0" : "-0." + std::to_string(b + 1));
    out << "riou_hist," << label.str() << ',' << report.riou_histogram[b] << '\n';
  }
  for (const auto& [cls, n] : report.class_counts) {
    out << "class_count," << class_name(cls) << ',' << n << '\n';
  }
  for (const auto& [len, n] : report.trajectory_length_hist) {
    out << "trajectory_length," << len << ',' << n << '\n';
  }
}

std::vector<SimilarityTransform> read_transforms_csv(std::istream& in) {
  std::vector<SimilarityTransform> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("frame,", 0) == 0) continue;  // header
    const auto fields = split_csv(line);
    if (fields.size() != 5) {
      throw std::runtime_error("transforms line " + std::to_string(line_no) +
                               ": expected 5 fields");
    }
    const int frame = parse_int(fields[0], line_no, "frame");
    SimilarityTransform t;
    t.scale = parse_real(fields[1], line_no, "scale");
    t.rotation = parse_real(fields[2], line_no, "rotation");
    t.tx = parse_real(fields[3], line_no, "tx");
    t.ty = parse_real(fields[4], line_no, "ty");
    if (frame < 1) {
      throw std::runtime_error("transforms line " + std::to_string(line_no) + ": bad frame");
    }
    if (static_cast<int>(out.size()) < frame) out.resize(frame);
    out[frame - 1] = t;
  }
  return out;
}

void write_transforms_csv(const std::vector<SimilarityTransform>& transforms,
                          std::ostream& out) {
  out << "frame,scale,rotation,tx,ty\n";
  out << std::fixed << std::setprecision(9);
  for (std::size_t i = 0; i < transforms.size(); ++i) {
    const auto& t = transforms[i];
    out << (i + 1) << ',' << t.scale << ',' << t.rotation << ',' << t.tx << ',' << t.ty << '\n';
  }
}

}  // namespace obt
