#include "obt/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "obt/dataio.hpp"
#include "obt/rng.hpp"
#include "obt/stem.hpp"

namespace obt {

namespace {

// A usage-level problem (unknown key, malformed config): exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using KeyHandler = std::function<void(const std::string&)>;

double to_real(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    while (pos < value.size() && std::isspace(static_cast<unsigned char>(value[pos]))) ++pos;
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw UsageError("config: bad numeric value for key '" + key + "': '" + value + "'");
  }
}

long long to_int(const std::string& key, const std::string& value) {
  const double v = to_real(key, value);
  if (v != std::floor(v)) throw UsageError("config: key '" + key + "' expects an integer");
  return static_cast<long long>(v);
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw UsageError("config: key '" + key + "' expects a boolean");
}

void parse_flat_config(std::istream& in, const std::map<std::string, KeyHandler>& handlers) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t") != std::string::npos) {
        throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
      }
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto it = handlers.find(key);
    if (it == handlers.end()) {
      throw UsageError("config line " + std::to_string(line_no) + ": unknown key '" + key +
                       "'");
    }
    it->second(value);
  }
}

}  // namespace

ScenarioConfig parse_scenario_config(std::istream& in) {
  ScenarioConfig cfg;
  const std::map<std::string, KeyHandler> handlers{
      {"seed", [&](const std::string& v) { cfg.seed = static_cast<std::uint64_t>(to_int("seed", v)); }},
      {"n_objects", [&](const std::string& v) { cfg.n_objects = static_cast<int>(to_int("n_objects", v)); }},
      {"frames", [&](const std::string& v) { cfg.frames = static_cast<int>(to_int("frames", v)); }},
      {"image_width", [&](const std::string& v) { cfg.image_width = to_real("image_width", v); }},
      {"image_height", [&](const std::string& v) { cfg.image_height = to_real("image_height", v); }},
      {"speed_min", [&](const std::string& v) { cfg.speed_min = to_real("speed_min", v); }},
      {"speed_max", [&](const std::string& v) { cfg.speed_max = to_real("speed_max", v); }},
      {"turn_rate_max", [&](const std::string& v) { cfg.turn_rate_max = to_real("turn_rate_max", v); }},
      {"box_size_min", [&](const std::string& v) { cfg.box_size_min = to_real("box_size_min", v); }},
      {"box_size_max", [&](const std::string& v) { cfg.box_size_max = to_real("box_size_max", v); }},
      {"platform_translation_x",
       [&](const std::string& v) { cfg.platform.translation_x = to_real("platform_translation_x", v); }},
      {"platform_translation_y",
       [&](const std::string& v) { cfg.platform.translation_y = to_real("platform_translation_y", v); }},
      {"platform_rotation",
       [&](const std::string& v) { cfg.platform.rotation = to_real("platform_rotation", v); }},
      {"platform_jitter_std",
       [&](const std::string& v) { cfg.platform.jitter_std = to_real("platform_jitter_std", v); }},
      {"min_separation", [&](const std::string& v) { cfg.min_separation = to_real("min_separation", v); }},
      {"render_cubes", [&](const std::string& v) { cfg.render_cubes = to_bool("render_cubes", v); }},
      {"cube_bands", [&](const std::string& v) { cfg.cube_bands = static_cast<int>(to_int("cube_bands", v)); }},
      {"class_weights",
       [&](const std::string& v) {
         std::istringstream ws(v);
         std::string field;
         int i = 0;
         while (std::getline(ws, field, ',')) {
           if (i >= kNumClasses) throw UsageError("config: class_weights expects 8 values");
           cfg.class_distribution[i++] = to_real("class_weights", field);
         }
         if (i != kNumClasses) throw UsageError("config: class_weights expects 8 values");
       }},
  };
  parse_flat_config(in, handlers);
  return cfg;
}

PerturbConfig parse_perturb_config(std::istream& in) {
  PerturbConfig cfg;
  const std::map<std::string, KeyHandler> handlers{
      {"miss_rate", [&](const std::string& v) { cfg.miss_rate = to_real("miss_rate", v); }},
      {"fp_rate", [&](const std::string& v) { cfg.fp_rate = to_real("fp_rate", v); }},
      {"center_noise_std",
       [&](const std::string& v) { cfg.center_noise_std = to_real("center_noise_std", v); }},
      {"size_noise_std",
       [&](const std::string& v) { cfg.size_noise_std = to_real("size_noise_std", v); }},
      {"angle_noise_std",
       [&](const std::string& v) { cfg.angle_noise_std = to_real("angle_noise_std", v); }},
      {"matched_conf_mean",
       [&](const std::string& v) { cfg.matched_conf_mean = to_real("matched_conf_mean", v); }},
      {"matched_conf_std",
       [&](const std::string& v) { cfg.matched_conf_std = to_real("matched_conf_std", v); }},
      {"fp_conf_mean", [&](const std::string& v) { cfg.fp_conf_mean = to_real("fp_conf_mean", v); }},
      {"fp_conf_std", [&](const std::string& v) { cfg.fp_conf_std = to_real("fp_conf_std", v); }},
      {"image_width", [&](const std::string& v) { cfg.image_width = to_real("image_width", v); }},
      {"image_height", [&](const std::string& v) { cfg.image_height = to_real("image_height", v); }},
  };
  parse_flat_config(in, handlers);
  return cfg;
}

TrackerConfig parse_tracker_config(std::istream& in) {
  TrackerConfig cfg;
  const std::map<std::string, KeyHandler> handlers{
      {"algorithm",
       [&](const std::string& v) {
         if (v == "sort") cfg.algorithm = TrackerAlgorithm::SORT;
         else if (v == "bytetrack") cfg.algorithm = TrackerAlgorithm::BYTETRACK;
         else if (v == "ocsort") cfg.algorithm = TrackerAlgorithm::OCSORT;
         else if (v == "botsort") cfg.algorithm = TrackerAlgorithm::BOTSORT;
         else throw UsageError("config: unknown algorithm '" + v + "'");
       }},
      {"det_threshold", [&](const std::string& v) { cfg.det_threshold = to_real("det_threshold", v); }},
      {"high_threshold", [&](const std::string& v) { cfg.high_threshold = to_real("high_threshold", v); }},
      {"riou_gate", [&](const std::string& v) { cfg.riou_gate = to_real("riou_gate", v); }},
      {"max_age", [&](const std::string& v) { cfg.max_age = static_cast<int>(to_int("max_age", v)); }},
      {"min_hits", [&](const std::string& v) { cfg.min_hits = static_cast<int>(to_int("min_hits", v)); }},
      {"ocm_weight", [&](const std::string& v) { cfg.ocm_weight = to_real("ocm_weight", v); }},
      {"cmc_enabled", [&](const std::string& v) { cfg.cmc_enabled = to_bool("cmc_enabled", v); }},
      {"size_param",
       [&](const std::string& v) {
         if (v == "area_aspect") cfg.size_param = SizeParam::AREA_ASPECT;
         else if (v == "width_height") cfg.size_param = SizeParam::WIDTH_HEIGHT;
         else throw UsageError("config: unknown size_param '" + v + "'");
       }},
  };
  parse_flat_config(in, handlers);
  return cfg;
}

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) throw std::runtime_error("cannot open input file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out.is_open()) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

std::vector<std::vector<Detection>> frameset_to_detections(const LabeledFrameSet& set) {
  std::vector<std::vector<Detection>> frames(set.frame_count());
  for (int f = 1; f <= set.frame_count(); ++f) {
    for (const auto& inst : set.frame(f)) {
      Detection d;
      d.box = inst.box;
      d.confidence = inst.confidence;
      d.class_id = inst.class_id;
      frames[f - 1].push_back(d);
    }
  }
  return frames;
}

LabeledFrameSet outputs_to_frameset(const std::vector<TrackOutput>& outputs) {
  LabeledFrameSet set;
  for (const TrackOutput& o : outputs) {
    set.ensure_frame(o.frame);
    LabeledInstance inst;
    inst.track_id = o.track_id;
    inst.class_id = o.class_id;
    inst.box = o.box;
    inst.confidence = o.confidence;
    set.frame(o.frame).push_back(inst);
  }
  return set;
}

std::string cube_path(const std::string& prefix, int frame) {
  std::ostringstream name;
  name << prefix << '_' << std::setw(6) << std::setfill('0') << frame << ".msc";
  return name.str();
}

TrackerAlgorithm algo_from_name(const std::string& name) {
  if (name == "sort") return TrackerAlgorithm::SORT;
  if (name == "bytetrack") return TrackerAlgorithm::BYTETRACK;
  if (name == "ocsort") return TrackerAlgorithm::OCSORT;
  if (name == "botsort") return TrackerAlgorithm::BOTSORT;
  throw UsageError("unknown algorithm '" + name + "'");
}

int cmd_synth(const std::string& config_path, const std::string& gt_path,
              const std::string& transforms_path, const std::string& cubes_prefix) {
  ScenarioConfig cfg;
  {
    auto in = open_input(config_path);
    cfg = parse_scenario_config(in);
  }
  if (!cubes_prefix.empty()) cfg.render_cubes = true;
  const Scenario scenario = generate(cfg);
  {
    auto out = open_output(gt_path);
    write_obbmot(scenario.gt, out);
  }
  if (!transforms_path.empty()) {
    auto out = open_output(transforms_path);
    write_transforms_csv(scenario.platform_transforms, out);
  }
  if (!cubes_prefix.empty()) {
    for (std::size_t f = 0; f < scenario.cubes.size(); ++f) {
      auto out = open_output(cube_path(cubes_prefix, static_cast<int>(f) + 1));
      write_cube(scenario.cubes[f], out);
    }
  }
  return 0;
}

int cmd_perturb(const std::string& config_path, const std::string& gt_path,
                const std::string& out_path, std::uint64_t seed) {
  PerturbConfig cfg;
  if (!config_path.empty()) {
    auto in = open_input(config_path);
    cfg = parse_perturb_config(in);
  }
  LabeledFrameSet gt;
  {
    auto in = open_input(gt_path);
    gt = parse_obbmot(in);
  }
  const auto detections = perturb(gt, cfg, seed);
  LabeledFrameSet det_set;
  det_set.frames.resize(detections.size());
  for (std::size_t f = 0; f < detections.size(); ++f) {
    for (const Detection& d : detections[f]) {
      LabeledInstance inst;
      inst.track_id = -1;
      inst.class_id = d.class_id;
      inst.box = d.box;
      inst.confidence = d.confidence;
      det_set.frames[f].push_back(inst);
    }
  }
  auto out = open_output(out_path);
  write_obbmot(det_set, out);
  return 0;
}

int cmd_track(const std::string& algo, const std::string& config_path,
              const std::string& dets_path, const std::string& transforms_path,
              const std::string& out_path) {
  TrackerConfig cfg;
  if (!config_path.empty()) {
    auto in = open_input(config_path);
    cfg = parse_tracker_config(in);
  }
  if (!algo.empty()) cfg.algorithm = algo_from_name(algo);

  LabeledFrameSet det_set;
  {
    auto in = open_input(dets_path);
    det_set = parse_obbmot(in);
  }
  std::optional<std::vector<SimilarityTransform>> transforms;
  if (!transforms_path.empty()) {
    auto in = open_input(transforms_path);
    transforms = read_transforms_csv(in);
    if (transforms->size() < static_cast<std::size_t>(det_set.frame_count())) {
      transforms->resize(det_set.frame_count());
    }
  }
  const auto outputs = run_sequence(cfg, frameset_to_detections(det_set), transforms);
  auto out = open_output(out_path);
  write_obbmot(outputs_to_frameset(outputs), out);
  return 0;
}

int cmd_eval(const std::string& gt_path, const std::string& pred_path, double alpha,
             const std::string& out_path, const std::string& format, std::ostream& stdout_like) {
  LabeledFrameSet gt, pred;
  {
    auto in = open_input(gt_path);
    gt = parse_obbmot(in);
  }
  {
    auto in = open_input(pred_path);
    pred = parse_obbmot(in);
  }
  const MetricsReport report = evaluate(gt, pred, alpha);
  auto emit = [&](std::ostream& os) {
    if (format == "text") {
      write_metrics_text(report, os);
    } else {
      write_metrics_csv(report, os);
    }
  };
  if (out_path.empty() || out_path == "-") {
    emit(stdout_like);
  } else {
    auto out = open_output(out_path);
    emit(out);
  }
  return 0;
}

int cmd_stats(const std::vector<std::string>& gt_paths,
              const std::vector<std::string>& transform_paths, const std::string& out_path,
              std::ostream& stdout_like) {
  if (!transform_paths.empty() && transform_paths.size() != gt_paths.size()) {
    throw UsageError("stats: need one --transforms per --gt (or none)");
  }
  std::vector<LabeledFrameSet> sequences;
  for (const auto& path : gt_paths) {
    auto in = open_input(path);
    sequences.push_back(parse_obbmot(in));
  }
  std::optional<std::vector<std::vector<SimilarityTransform>>> transforms;
  if (!transform_paths.empty()) {
    transforms.emplace();
    for (const auto& path : transform_paths) {
      auto in = open_input(path);
      transforms->push_back(read_transforms_csv(in));
    }
  }
  const StatsReport report = dataset_stats(sequences, transforms);
  if (out_path.empty() || out_path == "-") {
    write_stats_csv(report, stdout_like);
  } else {
    auto out = open_output(out_path);
    write_stats_csv(report, out);
  }
  return 0;
}

int cmd_postprocess(const std::string& in_path, double width, double height,
                    const std::string& out_path, const std::string& discarded_path,
                    std::ostream& stdout_like) {
  LabeledFrameSet set;
  {
    auto in = open_input(in_path);
    set = parse_obbmot(in);
  }
  const PostprocessResult result = postprocess(set, width, height);
  {
    auto out = open_output(out_path);
    write_obbmot(result.kept, out);
  }
  if (!discarded_path.empty()) {
    auto out = open_output(discarded_path);
    out << "frame,track_id,reason\n";
    for (const auto& d : result.discarded) {
      out << d.frame << ',' << d.track_id << ',' << discard_reason_name(d.reason) << '\n';
    }
  }
  stdout_like << "kept " << [&] {
    long long n = 0;
    for (const auto& f : result.kept.frames) n += static_cast<long long>(f.size());
    return n;
  }() << " instances, discarded " << result.discarded.size() << "\n";
  return 0;
}

int cmd_validate(const std::string& in_path, std::ostream& stdout_like) {
  LabeledFrameSet set;
  {
    auto in = open_input(in_path);
    set = parse_obbmot_qa(in);
  }
  const auto findings = validate(set);
  bool any_error = false;
  for (const auto& f : findings) {
    const bool is_error = f.severity == FindingSeverity::ERROR;
    any_error = any_error || is_error;
    stdout_like << (is_error ? "ERROR" : "WARNING") << ',' << finding_kind_name(f.kind) << ','
                << f.frame << ',' << f.track_id << '\n';
  }
  stdout_like << "findings: " << findings.size() << "\n";
  return any_error ? 3 : 0;
}

int cmd_stem_check(std::uint64_t grad_seed, std::ostream& stdout_like) {
  StemConfig spectral;  // 8 bands, k_s 3, k 7, D 64
  const StemParamCount counts = param_count(spectral);
  const long long rgb2d = param_count_2d(3, 64, 7);
  const long long msi2d = param_count_2d(8, 64, 7);
  stdout_like << "param_count rgb_2d_stem: " << rgb2d << "\n";
  stdout_like << "param_count msi_2d_stem: " << msi2d << "\n";
  stdout_like << "param_count spectral_3d_stem: " << counts.total << " (conv3d "
              << counts.conv3d << " + fold " << counts.fold << ")\n";

  bool ok = rgb2d == 9408 && msi2d == 25088 && counts.total == 9920;

  // Shape contract on a 1 x 8 x 64 x 64 input.
  SpectralCube cube;
  cube.bands = 8;
  cube.height = 64;
  cube.width = 64;
  cube.values.assign(8 * 64 * 64, 0.0f);
  Rng rng(grad_seed);
  for (float& v : cube.values) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  const StemWeights weights = random_weights(spectral, grad_seed + 1);
  const FeatureVolume vol = forward_conv3d(cube, weights, spectral);
  const FeatureMap out = forward(cube, weights, spectral);
  stdout_like << "forward 1x8x64x64 -> intermediate " << vol.channels << 'x' << vol.depth << 'x'
              << vol.height << 'x' << vol.width << " -> output " << out.channels << 'x'
              << out.height << 'x' << out.width << "\n";
  ok = ok && vol.channels == 64 && vol.depth == 8 && vol.height == 32 && vol.width == 32;
  ok = ok && out.channels == 64 && out.height == 16 && out.width == 16;

  // Gradient check on a reduced configuration (full finite differences).
  StemConfig small;
  small.bands = 8;
  small.spectral_kernel = 3;
  small.spatial_kernel = 5;
  small.out_channels = 4;
  const double err = grad_check_seeded(small, grad_seed);
  stdout_like << "grad_check (bands 8, k_s 3, k 5, D 4, seed " << grad_seed
              << "): max rel err = " << std::scientific << std::setprecision(3) << err
              << std::defaultfloat << (err < 1e-4 ? " [ok]" : " [FAIL]") << "\n";
  ok = ok && err < 1e-4;
  return ok ? 0 : 2;
}

int cmd_rgbproxy(const std::string& in_path, const std::string& out_path) {
  SpectralCube cube;
  {
    auto in = open_input(in_path);
    cube = read_cube(in);
  }
  const SpectralCube rgb = rgb_proxy(cube);
  auto out = open_output(out_path);
  write_cube(rgb, out);
  return 0;
}

}  // namespace

void write_metrics_csv(const MetricsReport& report, std::ostream& out) {
  out << "class,HOTA,MOTA,IDF1,DetA,AssA,FP,FN,IDSW\n";
  out << std::fixed << std::setprecision(6);
  long long fp = 0, fn = 0, idsw = 0;
  for (const auto& [cls, m] : report.per_class) {
    out << class_name(cls) << ',' << m.hota << ',' << m.mota << ',' << m.idf1 << ',' << m.deta
        << ',' << m.assa << ',' << m.fp << ',' << m.fn << ',' << m.idsw << '\n';
    fp += m.fp;
    fn += m.fn;
    idsw += m.idsw;
  }
  const auto& ca = report.class_averaged;
  const auto& da = report.detection_averaged;
  out << "class_averaged," << ca.hota << ',' << ca.mota << ',' << ca.idf1 << ',' << ca.deta
      << ',' << ca.assa << ',' << fp << ',' << fn << ',' << idsw << '\n';
  out << "detection_averaged," << da.hota << ',' << da.mota << ',' << da.idf1 << ',' << da.deta
      << ',' << da.assa << ',' << fp << ',' << fn << ',' << idsw << '\n';
}

void write_metrics_text(const MetricsReport& report, std::ostream& out) {
  out << std::left << std::setw(20) << "class" << std::right << std::setw(8) << "HOTA"
      << std::setw(8) << "MOTA" << std::setw(8) << "IDF1" << std::setw(8) << "DetA"
      << std::setw(8) << "AssA" << std::setw(8) << "FP" << std::setw(8) << "FN" << std::setw(8)
      << "IDSW" << '\n';
  out << std::fixed << std::setprecision(3);
  auto row = [&](const std::string& name, double hota, double mota, double idf1, double deta,
                 double assa, long long fp, long long fn, long long idsw) {
    out << std::left << std::setw(20) << name << std::right << std::setw(8) << hota
        << std::setw(8) << mota << std::setw(8) << idf1 << std::setw(8) << deta << std::setw(8)
        << assa << std::setw(8) << fp << std::setw(8) << fn << std::setw(8) << idsw << '\n';
  };
  long long fp = 0, fn = 0, idsw = 0;
  for (const auto& [cls, m] : report.per_class) {
    row(class_name(cls), m.hota, m.mota, m.idf1, m.deta, m.assa, m.fp, m.fn, m.idsw);
    fp += m.fp;
    fn += m.fn;
    idsw += m.idsw;
  }
  const auto& ca = report.class_averaged;
  const auto& da = report.detection_averaged;
  row("class_averaged", ca.hota, ca.mota, ca.idf1, ca.deta, ca.assa, fp, fn, idsw);
  row("detection_averaged", da.hota, da.mota, da.idf1, da.deta, da.assa, fp, fn, idsw);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"oriented-box multi-object tracking toolkit"};
  app.require_subcommand(1);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic scenario");
  std::string synth_config, synth_gt, synth_transforms, synth_cubes;
  synth_cmd->add_option("--config", synth_config, "scenario config file")->required();
  synth_cmd->add_option("--gt", synth_gt, "output ground-truth CSV")->required();
  synth_cmd->add_option("--transforms", synth_transforms, "output transforms CSV");
  synth_cmd->add_option("--cubes", synth_cubes, "output cube file prefix");

  // perturb
  auto* perturb_cmd = app.add_subcommand("perturb", "detections from ground truth");
  std::string perturb_config, perturb_gt, perturb_out;
  std::uint64_t perturb_seed = 1;
  perturb_cmd->add_option("--config", perturb_config, "perturbation config file");
  perturb_cmd->add_option("--gt", perturb_gt, "ground-truth CSV")->required();
  perturb_cmd->add_option("--out", perturb_out, "output detections CSV")->required();
  perturb_cmd->add_option("--seed", perturb_seed, "perturbation seed");

  // track
  auto* track_cmd = app.add_subcommand("track", "run a tracker over detections");
  std::string track_algo, track_config, track_dets, track_transforms, track_out;
  track_cmd->add_option("--algo", track_algo, "sort|bytetrack|ocsort|botsort");
  track_cmd->add_option("--config", track_config, "tracker config file");
  track_cmd->add_option("--dets", track_dets, "detections CSV")->required();
  track_cmd->add_option("--transforms", track_transforms, "camera-motion CSV");
  track_cmd->add_option("--out", track_out, "output results CSV")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate tracking results");
  std::string eval_gt, eval_pred, eval_out, eval_format = "csv";
  double eval_alpha = 0.5;
  eval_cmd->add_option("--gt", eval_gt, "ground-truth CSV")->required();
  eval_cmd->add_option("--pred", eval_pred, "predictions CSV")->required();
  eval_cmd->add_option("--alpha", eval_alpha, "CLEAR/IDF1 rIoU threshold");
  eval_cmd->add_option("--out", eval_out, "metrics CSV path (default stdout)");
  eval_cmd->add_option("--format", eval_format, "csv|text")
      ->check(CLI::IsMember({"csv", "text"}));

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "dataset statistics");
  std::vector<std::string> stats_gt, stats_transforms;
  std::string stats_out;
  stats_cmd->add_option("--gt", stats_gt, "sequence CSV (repeatable)")->required();
  stats_cmd->add_option("--transforms", stats_transforms, "transforms CSV (repeatable)");
  stats_cmd->add_option("--out", stats_out, "stats CSV path (default stdout)");

  // postprocess
  auto* post_cmd = app.add_subcommand("postprocess", "annotation post-processing");
  std::string post_in, post_out, post_discarded;
  double post_w = 1200.0, post_h = 900.0;
  post_cmd->add_option("--in", post_in, "annotations CSV")->required();
  post_cmd->add_option("--out", post_out, "kept annotations CSV")->required();
  post_cmd->add_option("--discarded", post_discarded, "discarded rows CSV");
  post_cmd->add_option("--width", post_w, "image width in px");
  post_cmd->add_option("--height", post_h, "image height in px");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "annotation QA checks");
  std::string validate_in;
  validate_cmd->add_option("--in", validate_in, "annotations CSV")->required();

  // stem-check
  auto* stem_cmd = app.add_subcommand("stem-check", "stem parameter/shape/gradient report");
  std::uint64_t stem_seed = 0;
  stem_cmd->add_option("--grad-seed", stem_seed, "gradient check seed");

  // rgbproxy
  auto* rgb_cmd = app.add_subcommand("rgbproxy", "extract pseudo-RGB bands 5,3,2");
  std::string rgb_in, rgb_out;
  rgb_cmd->add_option("--in", rgb_in, "input MSC1 cube")->required();
  rgb_cmd->add_option("--out", rgb_out, "output MSC1 cube")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth_config, synth_gt, synth_transforms, synth_cubes);
    if (*perturb_cmd) return cmd_perturb(perturb_config, perturb_gt, perturb_out, perturb_seed);
    if (*track_cmd)
      return cmd_track(track_algo, track_config, track_dets, track_transforms, track_out);
    if (*eval_cmd) return cmd_eval(eval_gt, eval_pred, eval_alpha, eval_out, eval_format, out);
    if (*stats_cmd) return cmd_stats(stats_gt, stats_transforms, stats_out, out);
    if (*post_cmd)
      return cmd_postprocess(post_in, post_w, post_h, post_out, post_discarded, out);
    if (*validate_cmd) return cmd_validate(validate_in, out);
    if (*stem_cmd) return cmd_stem_check(stem_seed, out);
    if (*rgb_cmd) return cmd_rgbproxy(rgb_in, rgb_out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  err << "error: no subcommand\n" << app.help();
  return 1;
}

}  // namespace obt
