#include "core/trials.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace fs = std::filesystem;

namespace grasplab::trials {

namespace {

float snap255(float v) {
  float x = v <= 0.0f ? 0.0f : (v >= 1.0f ? 1.0f : v);
  return float(std::lround(x * 255.0f)) / 255.0f;
}

float snap_depth(float mm) {
  double x = double(mm) * sensors::kDepthScale;
  if (x < 0.0) x = 0.0;
  if (x > 65535.0) x = 65535.0;
  return float(double(std::lround(x)) / sensors::kDepthScale);
}

void quantize(sensors::SensorFrame& f) {
  if (f.kind == sensors::FrameKind::depth) {
    for (auto& v : f.data) v = snap_depth(v);
  } else {
    for (auto& v : f.data) v = snap255(v);
  }
}

sensors::SensorFrame retag(sensors::SensorFrame f, sensors::SnapTag tag) {
  f.tag = tag;
  return f;
}

std::string frame_filename(int64_t trial_id, const std::string& slot) {
  // slot "rgb_a" -> "trial_000042_rgb_a.ppm"
  char buf[64];
  std::snprintf(buf, sizeof(buf), "trial_%06lld_%s", static_cast<long long>(trial_id),
                slot.c_str());
  const bool depth = slot.rfind("depth", 0) == 0;
  return std::string("images/") + buf + (depth ? ".pgm" : ".ppm");
}

const sensors::SensorFrame& frame_by_slot(const TrialFrames& f, const std::string& slot) {
  if (slot == "rgb_a") return f.rgb_a;
  if (slot == "rgb_b") return f.rgb_b;
  if (slot == "depth_b") return f.depth_b;
  if (slot == "tacL_a") return f.tac_left_a;
  if (slot == "tacL_b") return f.tac_left_b;
  if (slot == "tacL_c") return f.tac_left_c;
  if (slot == "tacR_a") return f.tac_right_a;
  if (slot == "tacR_b") return f.tac_right_b;
  if (slot == "tacR_c") return f.tac_right_c;
  throw std::invalid_argument("unknown frame slot " + slot);
}

sensors::SensorFrame& mutable_frame_by_slot(TrialFrames& f, const std::string& slot) {
  return const_cast<sensors::SensorFrame&>(frame_by_slot(f, slot));
}

sensors::SnapTag tag_of_slot(const std::string& slot) {
  switch (slot.back()) {
    case 'a': return sensors::SnapTag::Ta;
    case 'b': return sensors::SnapTag::Tb;
    default: return sensors::SnapTag::Tc;
  }
}

}  // namespace

bool AutoLabeler::label(const sensors::SensorFrame& tac_left_c,
                        const sensors::SensorFrame& tac_right_c) const {
  return sensors::mean_abs_diff(tac_left_c, base_left) > threshold ||
         sensors::mean_abs_diff(tac_right_c, base_right) > threshold;
}

AutoLabeler calibrate_labeler(const sensors::SensorConfig& cfg, uint64_t seed,
                              double force_lo, double force_hi, int batch) {
  AutoLabeler lab;
  lab.base_left = sensors::unloaded_gel(cfg.gel_left, sensors::SnapTag::Tc);
  lab.base_right = sensors::unloaded_gel(cfg.gel_right, sensors::SnapTag::Tc);
  quantize(lab.base_left);
  quantize(lab.base_right);

  constexpr world::ObjectFamily fams[] = {
      world::ObjectFamily::box, world::ObjectFamily::prism_convex,
      world::ObjectFamily::prism_concave, world::ObjectFamily::cylinder_like};

  // Loaded-cluster mean over policy-like contacts; the unloaded cluster sits
  // at exactly zero, so the midpoint is half the loaded mean.
  double loaded_sum = 0.0;
  int loaded_n = 0;
  for (int i = 0; loaded_n < batch && i < batch * 8; ++i) {
    world::ObjectModel obj = world::generate_object(hash_u64(seed, uint64_t(i)), fams[i % 4]);
    world::Scene scene;
    scene.object = obj;
    scene.table_extent = {-150, -150, 150, 150};

    oracle::CylinderEstimate cyl;
    cyl.center = {0.0, 0.0};
    cyl.radius = obj.footprint_diameter() / 2.0;
    cyl.top_z = obj.height;
    world::GraspParams g =
        oracle::collection_policy(cyl, hash_u64(seed, 0x1000 + uint64_t(i)), force_lo, force_hi);
    auto contacts = oracle::compute_contacts(scene, g, cfg.physics);
    if (!contacts.left || contacts.total_length() < cfg.physics.patch_min) continue;

    auto probe = [&](oracle::Jaw side, const sensors::GelConfig& gel,
                     const sensors::SensorFrame& base) {
      auto f = sensors::render_tactile(scene, g, contacts, side, gel, sensors::SnapTag::Tc);
      quantize(f);
      loaded_sum += sensors::mean_abs_diff(f, base);
      ++loaded_n;
    };
    probe(oracle::Jaw::left, cfg.gel_left, lab.base_left);
    probe(oracle::Jaw::right, cfg.gel_right, lab.base_right);
  }
  if (loaded_n == 0) throw ConfigError("labeler calibration produced no contacts");
  lab.threshold = loaded_sum / loaded_n / 2.0;
  return lab;
}

TrialContext make_trial_context(uint64_t sensor_seed, double force_lo, double force_hi,
                                bool noise) {
  TrialContext ctx;
  ctx.sensors = sensors::make_sensor_config(sensor_seed);
  if (!noise) ctx.sensors.physics.noise_sigma = 0.0;
  ctx.force_lo = force_lo;
  ctx.force_hi = force_hi;
  ctx.labeler = calibrate_labeler(ctx.sensors, hash_u64(sensor_seed, 0xca1), force_lo, force_hi);
  return ctx;
}

void quantize_frames(TrialFrames& f) {
  for (const char* slot : kFrameSlots) quantize(mutable_frame_by_slot(f, slot));
}

TrialRecord run_trial(const world::Scene& scene, int64_t trial_id, uint64_t seed,
                      const TrialContext& ctx) {
  using sensors::SnapTag;
  const auto& cfg = ctx.sensors;

  TrialRecord rec;
  rec.trial_id = trial_id;
  rec.object_id = scene.object.object_id;

  rec.frames.rgb_a = sensors::render_camera(scene, nullptr, cfg, SnapTag::Ta);
  auto depth_a = sensors::render_depth(scene, nullptr, cfg, SnapTag::Ta);
  rec.frames.tac_left_a = sensors::unloaded_gel(cfg.gel_left, SnapTag::Ta);
  rec.frames.tac_right_a = sensors::unloaded_gel(cfg.gel_right, SnapTag::Ta);

  const auto cyl = oracle::fit_cylinder(depth_a, cfg.topdown);
  rec.params = oracle::collection_policy(cyl, seed, ctx.force_lo, ctx.force_hi);

  const auto contacts = oracle::compute_contacts(scene, rec.params, cfg.physics);
  rec.frames.rgb_b = sensors::render_camera(scene, &rec.params, cfg, SnapTag::Tb);
  rec.frames.depth_b = sensors::render_depth(scene, &rec.params, cfg, SnapTag::Tb);
  rec.frames.tac_left_b = sensors::render_tactile(scene, rec.params, contacts,
                                                  oracle::Jaw::left, cfg.gel_left, SnapTag::Tb);
  rec.frames.tac_right_b = sensors::render_tactile(
      scene, rec.params, contacts, oracle::Jaw::right, cfg.gel_right, SnapTag::Tb);

  rec.oracle_outcome = oracle::lift_outcome(scene, rec.params, contacts, seed, cfg.physics);

  if (rec.oracle_outcome.success) {
    // The object settled in the gripper: gels still loaded as at T_b.
    rec.frames.tac_left_c = retag(rec.frames.tac_left_b, SnapTag::Tc);
    rec.frames.tac_right_c = retag(rec.frames.tac_right_b, SnapTag::Tc);
  } else {
    rec.frames.tac_left_c = sensors::unloaded_gel(cfg.gel_left, SnapTag::Tc);
    rec.frames.tac_right_c = sensors::unloaded_gel(cfg.gel_right, SnapTag::Tc);
  }

  quantize_frames(rec.frames);
  rec.label = ctx.labeler.label(rec.frames.tac_left_c, rec.frames.tac_right_c);
  return rec;
}

DatasetManifest write_dataset(const std::vector<TrialRecord>& records,
                              const std::vector<world::ObjectModel>& objects,
                              const DatasetSetup& setup, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "images", ec);
  if (ec) throw IoError("write_dataset: cannot create " + dir + ": " + ec.message());

  DatasetManifest manifest;
  manifest.root = dir;
  manifest.setup = setup;
  manifest.objects = objects;

  nlohmann::ordered_json objs_j;
  objs_j["format_version"] = manifest.format_version;
  objs_j["setup"] = {{"sensor_seed", setup.sensor_seed},
                     {"force_lo", setup.force_lo},
                     {"force_hi", setup.force_hi},
                     {"noise", setup.noise},
                     {"label_threshold", setup.label_threshold}};
  objs_j["objects"] = nlohmann::ordered_json::array();
  for (const auto& o : objects) objs_j["objects"].push_back(world::object_to_json(o));
  {
    std::ofstream out(fs::path(dir) / "objects.json", std::ios::binary);
    if (!out) throw IoError("write_dataset: cannot open objects.json");
    out << objs_j.dump(2) << "\n";
  }

  std::ofstream mout(fs::path(dir) / "manifest.jsonl", std::ios::binary);
  if (!mout) throw IoError("write_dataset: cannot open manifest.jsonl");

  for (const auto& rec : records) {
    TrialMeta meta;
    meta.trial_id = rec.trial_id;
    meta.object_id = rec.object_id;
    meta.params = rec.params;
    meta.label = rec.label;
    meta.success = rec.oracle_outcome.success;
    meta.failure_mode = oracle::failure_mode_name(rec.oracle_outcome.failure_mode);
    meta.margin = rec.oracle_outcome.margin;

    nlohmann::ordered_json line;
    line["trial_id"] = rec.trial_id;
    line["object_id"] = rec.object_id;
    line["theta"] = {rec.params.ee_x, rec.params.ee_y, rec.params.ee_z, rec.params.phi,
                     rec.params.force};
    line["label"] = rec.label;
    line["success"] = rec.oracle_outcome.success;
    line["failure_mode"] = meta.failure_mode;
    line["margin"] = rec.oracle_outcome.margin;
    line["auto_label_source"] = rec.auto_label_source;
    nlohmann::ordered_json frames_j;
    for (const char* slot : kFrameSlots) {
      const std::string rel = frame_filename(rec.trial_id, slot);
      const auto& frame = frame_by_slot(rec.frames, slot);
      const fs::path full = fs::path(dir) / rel;
      if (frame.kind == sensors::FrameKind::depth)
        sensors::write_pgm(frame, full.string());
      else
        sensors::write_ppm(frame, full.string());
      frames_j[slot] = rel;
      meta.frame_paths[slot] = rel;
    }
    line["frames"] = frames_j;
    mout << line.dump() << "\n";
    manifest.records.push_back(std::move(meta));
  }
  if (!mout) throw IoError("write_dataset: short write to manifest.jsonl");
  return manifest;
}

DatasetManifest read_dataset(const std::string& dir) {
  DatasetManifest manifest;
  manifest.root = dir;

  const fs::path objs_path = fs::path(dir) / "objects.json";
  std::ifstream oin(objs_path, std::ios::binary);
  if (!oin) throw IoError("read_dataset: cannot open " + objs_path.string());
  nlohmann::json objs_j;
  try {
    oin >> objs_j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("objects.json: " + std::string(e.what()));
  }
  try {
    manifest.format_version = objs_j.at("format_version").get<int>();
    const auto& s = objs_j.at("setup");
    manifest.setup.sensor_seed = s.at("sensor_seed").get<uint64_t>();
    manifest.setup.force_lo = s.at("force_lo").get<double>();
    manifest.setup.force_hi = s.at("force_hi").get<double>();
    manifest.setup.noise = s.at("noise").get<bool>();
    manifest.setup.label_threshold = s.at("label_threshold").get<double>();
    for (const auto& jo : objs_j.at("objects")) {
      manifest.objects.push_back(world::object_from_json(jo));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("objects.json: " + std::string(e.what()));
  }

  std::set<std::string> ids;
  for (const auto& o : manifest.objects) {
    if (!ids.insert(o.object_id).second)
      throw FormatError("objects.json: duplicate object_id " + o.object_id);
  }

  const fs::path man_path = fs::path(dir) / "manifest.jsonl";
  std::ifstream min(man_path, std::ios::binary);
  if (!min) throw IoError("read_dataset: cannot open " + man_path.string());
  std::string lineno_prefix;
  std::string text;
  int lineno = 0;
  while (std::getline(min, text)) {
    ++lineno;
    if (text.empty()) continue;
    lineno_prefix = "manifest.jsonl:" + std::to_string(lineno) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(lineno_prefix + e.what());
    }
    try {
      TrialMeta meta;
      meta.trial_id = j.at("trial_id").get<int64_t>();
      meta.object_id = j.at("object_id").get<std::string>();
      const auto& th = j.at("theta");
      if (!th.is_array() || th.size() != 5)
        throw FormatError(lineno_prefix + "theta must have 5 entries");
      meta.params.ee_x = th[0].get<double>();
      meta.params.ee_y = th[1].get<double>();
      meta.params.ee_z = th[2].get<double>();
      meta.params.phi = th[3].get<double>();
      meta.params.force = th[4].get<double>();
      meta.label = j.at("label").get<bool>();
      meta.success = j.at("success").get<bool>();
      meta.failure_mode = j.at("failure_mode").get<std::string>();
      oracle::failure_mode_from_name(meta.failure_mode);  // validates
      meta.margin = j.at("margin").get<double>();
      for (const char* slot : kFrameSlots) {
        meta.frame_paths[slot] = j.at("frames").at(slot).get<std::string>();
      }
      if (!ids.count(meta.object_id))
        throw FormatError(lineno_prefix + "unknown object_id " + meta.object_id);
      manifest.records.push_back(std::move(meta));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(lineno_prefix + e.what());
    }
  }

  for (const auto& meta : manifest.records) {
    for (const auto& [slot, rel] : meta.frame_paths) {
      const fs::path p = fs::path(dir) / rel;
      if (!fs::exists(p)) throw FormatError("missing frame file: " + p.string());
    }
  }
  return manifest;
}

TrialFrames load_frames(const DatasetManifest& manifest, const TrialMeta& meta) {
  TrialFrames frames;
  for (const char* slot : kFrameSlots) {
    const std::string path = (fs::path(manifest.root) / meta.frame_paths.at(slot)).string();
    const sensors::SnapTag tag = tag_of_slot(slot);
    auto& dst = mutable_frame_by_slot(frames, slot);
    if (std::string(slot).rfind("depth", 0) == 0) {
      dst = sensors::read_pgm(path, tag);
    } else if (std::string(slot).rfind("rgb", 0) == 0) {
      dst = sensors::read_ppm(path, sensors::FrameKind::rgb, tag);
    } else {
      dst = sensors::read_ppm(path, sensors::FrameKind::tactile, tag);
    }
  }
  return frames;
}

SplitSpec split_by_object(const DatasetManifest& manifest, uint64_t seed,
                          double test_fraction) {
  if (manifest.objects.size() < 2)
    throw TooFewObjects("split_by_object: need at least 2 objects, have " +
                        std::to_string(manifest.objects.size()));

  std::vector<std::string> ids;
  for (const auto& o : manifest.objects) ids.push_back(o.object_id);
  std::sort(ids.begin(), ids.end());

  RngStream rng(seed, "split", 0);
  for (size_t i = ids.size(); i > 1; --i) {
    size_t j = size_t(rng.uniform_int(0, int64_t(i) - 1));
    std::swap(ids[i - 1], ids[j]);
  }

  size_t n_test = size_t(std::lround(test_fraction * double(ids.size())));
  n_test = std::max<size_t>(1, std::min(n_test, ids.size() - 1));

  SplitSpec split;
  split.seed = seed;
  split.test_object_ids.assign(ids.begin(), ids.begin() + n_test);
  split.train_object_ids.assign(ids.begin() + n_test, ids.end());
  std::sort(split.test_object_ids.begin(), split.test_object_ids.end());
  std::sort(split.train_object_ids.begin(), split.train_object_ids.end());
  return split;
}

}  // namespace grasplab::trials
