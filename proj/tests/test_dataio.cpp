#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "obt/dataio.hpp"
#include "obt/rng.hpp"
#include "obt/synth.hpp"
#include "oracles.hpp"

using namespace obt;

TEST_CASE("parse_obbmot reads records and canonicalizes") {
  std::istringstream in(
      "# header comment\n"
      "1,7,100,50,20,10,0.0,1.0,2,0\n"
      "1,8,10,20,6,12,0.0,0.9,1,1\n"
      "2,7,102,50,20,10,3.14159,1.0,2,0\n");
  const LabeledFrameSet set = parse_obbmot(in);
  REQUIRE(set.frame_count() == 2);
  REQUIRE(set.frame(1).size() == 2);
  const LabeledInstance& car = set.frame(1)[0];
  CHECK(car.track_id == 7);
  CHECK(car.class_id == 2);
  CHECK(car.box.cx == 100);
  CHECK(car.box.w == 20);
  CHECK(car.box.h == 10);
  CHECK(car.box.angle.radians() == 0.0);
  // 6x12 swaps to 12x6 at +pi/2.
  const LabeledInstance& tall = set.frame(1)[1];
  CHECK(tall.box.w == 12);
  CHECK(tall.box.h == 6);
  CHECK(tall.truncated);
  // Angle period: 3.14159 wraps to ~0.
  CHECK(std::fabs(set.frame(2)[0].box.angle.radians()) < 1e-5);
}

TEST_CASE("parse_obbmot rejects malformed input") {
  std::istringstream dup("1,7,1,1,2,1,0,1,2,0\n1,7,5,5,2,1,0,1,2,0\n");
  CHECK_THROWS_AS(parse_obbmot(dup), std::runtime_error);

  std::istringstream bad_class("1,7,1,1,2,1,0,1,9,0\n");
  CHECK_THROWS_AS(parse_obbmot(bad_class), std::runtime_error);

  std::istringstream short_line("1,7,1,1,2,1,0,1,2\n");
  CHECK_THROWS_AS(parse_obbmot(short_line), std::runtime_error);

  std::istringstream bad_number("1,7,x,1,2,1,0,1,2,0\n");
  CHECK_THROWS_AS(parse_obbmot(bad_number), std::runtime_error);

  // Raw detections (id -1) may repeat within a frame.
  std::istringstream dets("1,-1,1,1,2,1,0,0.5,2,0\n1,-1,5,5,2,1,0,0.4,2,0\n");
  CHECK(parse_obbmot(dets).frame(1).size() == 2);

  // The QA parser admits duplicates for validate().
  std::istringstream qa("1,7,1,1,2,1,0,1,2,0\n1,7,5,5,2,1,0,1,2,0\n");
  CHECK(parse_obbmot_qa(qa).frame(1).size() == 2);
}

TEST_CASE("write then parse is an identity on canonical data") {
  Rng rng(91);
  LabeledFrameSet set;
  set.frames.assign(6, {});
  for (int f = 1; f <= 6; ++f) {
    const int n = rng.uniform_int(0, 5);
    for (int i = 0; i < n; ++i) {
      LabeledInstance inst;
      inst.track_id = 10 * f + i;
      inst.class_id = rng.uniform_int(1, 8);
      // Quantized to the writer's 6-decimal grid so round-trips are exact.
      auto q = [&](double v) { return std::round(v * 1e6) / 1e6; };
      inst.box = canonicalize_box(q(rng.uniform(0, 1000)), q(rng.uniform(0, 800)),
                                  q(rng.uniform(5, 40)), q(rng.uniform(2, 4)),
                                  q(rng.uniform(-0.7, 2.3)));
      inst.confidence = q(rng.uniform(0, 1));
      inst.truncated = rng.bernoulli(0.2);
      set.frame(f).push_back(inst);
    }
  }
  std::ostringstream out;
  write_obbmot(set, out);
  std::istringstream in(out.str());
  const LabeledFrameSet back = parse_obbmot(in);
  REQUIRE(back.frame_count() == set.frame_count());
  for (int f = 1; f <= set.frame_count(); ++f) {
    REQUIRE(back.frame(f).size() == set.frame(f).size());
    // Writer sorts by id; compare as sorted.
    auto sorted = set.frame(f);
    std::sort(sorted.begin(), sorted.end(),
              [](const LabeledInstance& a, const LabeledInstance& b) {
                return a.track_id < b.track_id;
              });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      const auto& a = sorted[i];
      const auto& b = back.frame(f)[i];
      CHECK(a.track_id == b.track_id);
      CHECK(a.class_id == b.class_id);
      CHECK(a.box.cx == b.box.cx);
      CHECK(a.box.cy == b.box.cy);
      CHECK(a.box.w == b.box.w);
      CHECK(a.box.h == b.box.h);
      CHECK(a.box.angle.radians() == b.box.angle.radians());
      CHECK(a.confidence == b.confidence);
      CHECK(a.truncated == b.truncated);
    }
  }

  // Determinism: two writes are byte-identical; empty set writes nothing.
  std::ostringstream out2;
  write_obbmot(set, out2);
  CHECK(out.str() == out2.str());
  std::ostringstream empty;
  write_obbmot(LabeledFrameSet{}, empty);
  CHECK(empty.str().empty());
}

TEST_CASE("postprocess applies the three discard rules") {
  const double w = 1200, h = 900;
  LabeledFrameSet set;
  set.frames.assign(1, {});
  auto add = [&](int id, OrientedBox box) {
    LabeledInstance i;
    i.track_id = id;
    i.class_id = 1;
    i.box = box;
    set.frames[0].push_back(i);
  };
  add(1, canonicalize_box(600, 450, 40, 20, 0.3));     // fully inside
  add(2, canonicalize_box(1200.0, 450, 40, 20, 0.0));  // center on right edge: outside
  add(3, canonicalize_box(1199, 450, 400, 20, 0.0));   // IoF just over 0.5, sticks out 201px
  add(4, canonicalize_box(1190, 450, 40, 20, 0.0));    // IoF = 0.75, overflow 10px
  add(5, canonicalize_box(1180, 450, 40, 39.9, 0.0));  // exactly half out? no: center inside
  // A box whose far edge is 150 px past the right border (axis-aligned).
  add(6, canonicalize_box(1150, 450, 400, 20, 0.0));   // spans 950..1350 -> excess 150
  // IoF exactly 0.5: half in, half out across the right edge.
  add(7, canonicalize_box(1200.0 - 1e-9, 450, 100, 20, 0.0));

  const PostprocessResult res = postprocess(set, w, h);

  auto kept_ids = [&]() {
    std::vector<int> ids;
    for (const auto& i : res.kept.frame(1)) ids.push_back(i.track_id);
    return ids;
  }();

  CHECK(std::count(kept_ids.begin(), kept_ids.end(), 1) == 1);
  CHECK(std::count(kept_ids.begin(), kept_ids.end(), 2) == 0);  // center outside
  CHECK(std::count(kept_ids.begin(), kept_ids.end(), 3) == 0);  // 201 px overflow
  CHECK(std::count(kept_ids.begin(), kept_ids.end(), 4) == 1);  // kept + truncated
  CHECK(std::count(kept_ids.begin(), kept_ids.end(), 6) == 0);  // 150 px overflow
  CHECK(std::count(kept_ids.begin(), kept_ids.end(), 7) == 1);  // IoF 0.5 boundary kept

  for (const auto& i : res.kept.frame(1)) {
    if (i.track_id == 1) CHECK_FALSE(i.truncated);
    if (i.track_id == 4) CHECK(i.truncated);
    if (i.track_id == 7) CHECK(i.truncated);
  }
  for (const auto& d : res.discarded) {
    if (d.track_id == 2) CHECK(d.reason == DiscardReason::CENTER_OUTSIDE);
    if (d.track_id == 6) CHECK(d.reason == DiscardReason::BEYOND_100PX);
  }

  // Idempotence.
  const PostprocessResult twice = postprocess(res.kept, w, h);
  CHECK(twice.discarded.empty());
  REQUIRE(twice.kept.frame(1).size() == res.kept.frame(1).size());
  for (std::size_t i = 0; i < twice.kept.frame(1).size(); ++i) {
    CHECK(twice.kept.frame(1)[i].truncated == res.kept.frame(1)[i].truncated);
  }
}

TEST_CASE("validate flags the four annotation findings") {
  LabeledFrameSet set;
  set.frames.assign(5, {});
  auto add = [&](int f, int id, int cls) {
    LabeledInstance i;
    i.track_id = id;
    i.class_id = cls;
    i.box = canonicalize_box(10.0 * id, 10, 8, 4, 0);
    set.frame(f).push_back(i);
  };
  // id 3: appears twice in frame 5.
  add(5, 3, 2);
  add(5, 3, 2);
  // id 3 lives in frames 1-2 then disappears at 3 (warning), back at 5 (new id warning).
  add(1, 3, 2);
  add(2, 3, 2);
  // id 4: class 2 in frame 1, class 4 in frame 2 -> error.
  add(1, 4, 2);
  add(2, 4, 4);
  add(3, 4, 4);
  add(4, 4, 4);
  add(5, 4, 4);

  const auto findings = validate(set);
  int dup = 0, mismatch = 0, disappeared = 0, fresh = 0;
  for (const auto& f : findings) {
    switch (f.kind) {
      case FindingKind::DUPLICATE_ID:
        ++dup;
        CHECK(f.severity == FindingSeverity::ERROR);
        CHECK(f.frame == 5);
        CHECK(f.track_id == 3);
        break;
      case FindingKind::CLASS_MISMATCH:
        ++mismatch;
        CHECK(f.severity == FindingSeverity::ERROR);
        CHECK(f.frame == 2);
        CHECK(f.track_id == 4);
        break;
      case FindingKind::DISAPPEARED:
        ++disappeared;
        CHECK(f.severity == FindingSeverity::WARNING);
        break;
      case FindingKind::NEW_ID:
        ++fresh;
        CHECK(f.severity == FindingSeverity::WARNING);
        break;
    }
  }
  CHECK(dup == 1);
  CHECK(mismatch == 1);
  CHECK(disappeared == 1);  // id 3 vanished at frame 3
  CHECK(fresh == 1);        // id 3 reappears at frame 5
}

TEST_CASE("validate is clean on generator output") {
  ScenarioConfig cfg;
  cfg.seed = 5;
  cfg.n_objects = 6;
  cfg.frames = 30;
  const Scenario scenario = generate(cfg);
  for (const auto& finding : validate(scenario.gt)) {
    CHECK(finding.severity == FindingSeverity::WARNING);
  }
}

TEST_CASE("MSC1 cubes round-trip and reject malformed streams") {
  SpectralCube cube;
  cube.bands = 1;
  cube.height = 2;
  cube.width = 2;
  cube.values = {1, 2, 3, 4};
  std::ostringstream out;
  write_cube(cube, out);
  std::istringstream in(out.str());
  const SpectralCube back = read_cube(in);
  CHECK(back.at(0, 0, 0) == 1);
  CHECK(back.at(0, 0, 1) == 2);
  CHECK(back.at(0, 1, 0) == 3);
  CHECK(back.at(0, 1, 1) == 4);

  Rng rng(17);
  SpectralCube random_cube;
  random_cube.bands = 5;
  random_cube.height = 7;
  random_cube.width = 3;
  random_cube.values.resize(5 * 7 * 3);
  for (float& v : random_cube.values) v = static_cast<float>(rng.uniform(-10, 10));
  std::ostringstream out2;
  write_cube(random_cube, out2);
  std::istringstream in2(out2.str());
  const SpectralCube back2 = read_cube(in2);
  CHECK(back2.values == random_cube.values);

  std::istringstream bad_magic("XXXX....");
  CHECK_THROWS_AS(read_cube(bad_magic), std::runtime_error);

  std::istringstream trailing(out.str() + "z");
  CHECK_THROWS_AS(read_cube(trailing), std::runtime_error);

  std::istringstream truncated(out.str().substr(0, out.str().size() - 2));
  CHECK_THROWS_AS(read_cube(truncated), std::runtime_error);
}

TEST_CASE("rgb_proxy selects bands 5, 3, 2") {
  SpectralCube cube;
  cube.bands = 8;
  cube.height = 2;
  cube.width = 2;
  cube.values.resize(8 * 4);
  for (int b = 0; b < 8; ++b) {
    for (int i = 0; i < 4; ++i) cube.values[b * 4 + i] = static_cast<float>(b + 1);
  }
  const SpectralCube rgb = rgb_proxy(cube);
  REQUIRE(rgb.bands == 3);
  CHECK(rgb.at(0, 0, 0) == 5.0f);
  CHECK(rgb.at(1, 0, 0) == 3.0f);
  CHECK(rgb.at(2, 0, 0) == 2.0f);

  SpectralCube small;
  small.bands = 4;
  small.height = 1;
  small.width = 1;
  small.values = {1, 2, 3, 4};
  CHECK_THROWS_AS(rgb_proxy(small), std::domain_error);
}

TEST_CASE("superclass grouping follows the category tree") {
  CHECK(superclass_of(1) == Superclass::HUMAN);
  for (int c : {2, 3, 4, 5}) CHECK(superclass_of(c) == Superclass::VEHICLE);
  for (int c : {6, 7, 8}) CHECK(superclass_of(c) == Superclass::BICYCLE);
  CHECK_THROWS_AS(superclass_of(0), std::domain_error);
  CHECK(std::string(class_name(1)) == "pedestrian");
  CHECK(std::string(class_name(8)) == "awning-bike");
}

TEST_CASE("dataset_stats neighbor counting") {
  LabeledFrameSet seq;
  seq.frames.assign(1, {});
  auto add = [&](int id, double cx) {
    LabeledInstance i;
    i.track_id = id;
    i.class_id = 1;
    i.box = canonicalize_box(cx, 100, 10, 5, 0);
    seq.frames[0].push_back(i);
  };
  SUBCASE("single object has no neighbors") {
    add(1, 100);
    const StatsReport r = dataset_stats({seq}, std::nullopt);
    CHECK(r.neighbors_at_300px == 0.0);
    CHECK(r.max_objects_per_frame == 1);
  }
  SUBCASE("three collinear objects spaced 200 px average 4/3") {
    add(1, 100);
    add(2, 300);
    add(3, 500);
    const StatsReport r = dataset_stats({seq}, std::nullopt);
    CHECK(r.neighbors_at_300px == doctest::Approx(4.0 / 3.0));
  }
}

TEST_CASE("dataset_stats displacement decomposition closes the loop") {
  ScenarioConfig cfg;
  cfg.seed = 9;
  cfg.n_objects = 5;
  cfg.frames = 40;
  cfg.speed_min = 2.0;
  cfg.speed_max = 2.0;
  cfg.turn_rate_max = 0.0;
  cfg.platform.translation_x = 8.0;
  const Scenario scenario = generate(cfg);
  const StatsReport r =
      dataset_stats({scenario.gt}, std::vector<std::vector<SimilarityTransform>>{
                                       scenario.platform_transforms});
  CHECK(r.mean_drone == doctest::Approx(8.0).epsilon(0.02));
  CHECK(r.mean_object == doctest::Approx(2.0).epsilon(0.02));
  CHECK(r.displacement_pairs > 0);

  // Trajectory-length histogram covers each (sequence, track) pair once.
  long long tracks = 0;
  for (const auto& [len, n] : r.trajectory_length_hist) tracks += n;
  CHECK(tracks == r.track_count);
  CHECK(tracks == 5);
}

TEST_CASE("parse then write reproduces a written file byte for byte") {
  std::string canonical;
  {
    LabeledFrameSet set;
    set.frames.assign(2, {});
    LabeledInstance a;
    a.track_id = 4;
    a.class_id = 3;
    a.box = canonicalize_box(10.5, 20.25, 12, 6, 0.125);
    a.confidence = 0.875;
    set.frames[0].push_back(a);
    a.track_id = 9;
    set.frames[1].push_back(a);
    std::ostringstream out;
    write_obbmot(set, out);
    canonical = out.str();
  }
  std::istringstream in(canonical);
  const LabeledFrameSet parsed = parse_obbmot(in);
  std::ostringstream again;
  write_obbmot(parsed, again);
  CHECK(again.str() == canonical);
}

TEST_CASE("PGM fixtures round-trip") {
  GrayFrame frame;
  frame.width = 5;
  frame.height = 3;
  frame.values = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120, 200, 255};
  std::ostringstream out;
  write_pgm(frame, out);
  std::istringstream in(out.str());
  const GrayFrame back = read_pgm(in);
  REQUIRE(back.width == 5);
  REQUIRE(back.height == 3);
  for (std::size_t i = 0; i < frame.values.size(); ++i) {
    CHECK(back.values[i] == frame.values[i]);
  }
  std::istringstream bad("P2\n1 1\n255\n0");
  CHECK_THROWS_AS(read_pgm(bad), std::runtime_error);
}

TEST_CASE("transforms CSV round-trips") {
  std::vector<SimilarityTransform> ts(4);
  ts[1] = SimilarityTransform{1.01, 0.02, 5.0, -2.0};
  ts[2] = SimilarityTransform{0.99, -0.01, 0.0, 3.5};
  std::ostringstream out;
  write_transforms_csv(ts, out);
  std::istringstream in(out.str());
  const auto back = read_transforms_csv(in);
  REQUIRE(back.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(back[i].scale == doctest::Approx(ts[i].scale).epsilon(1e-9));
    CHECK(back[i].rotation == doctest::Approx(ts[i].rotation).epsilon(1e-9));
    CHECK(back[i].tx == doctest::Approx(ts[i].tx).epsilon(1e-9));
    CHECK(back[i].ty == doctest::Approx(ts[i].ty).epsilon(1e-9));
  }
}
