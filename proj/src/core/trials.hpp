#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/frame.hpp"
#include "core/oracle.hpp"
#include "core/sensors.hpp"
#include "core/world.hpp"

#include "json.hpp"

namespace grasplab::trials {

// Contact detector for T_c gel images: fires when the image departs from the
// sensor's resting state by more than a calibrated threshold.
struct AutoLabeler {
  sensors::SensorFrame base_left;
  sensors::SensorFrame base_right;
  double threshold = 0.0;

  bool label(const sensors::SensorFrame& tac_left_c,
             const sensors::SensorFrame& tac_right_c) const;
};

// Threshold = midpoint between the loaded and unloaded cluster means over a
// seeded calibration batch of policy-like contacts.
AutoLabeler calibrate_labeler(const sensors::SensorConfig& cfg, uint64_t seed,
                              double force_lo, double force_hi, int batch = 64);

struct TrialContext {
  sensors::SensorConfig sensors;
  AutoLabeler labeler;
  double force_lo = 0.5;
  double force_hi = 8.0;
};

TrialContext make_trial_context(uint64_t sensor_seed, double force_lo, double force_hi,
                                bool noise);

struct TrialFrames {
  sensors::SensorFrame rgb_a, rgb_b;
  sensors::SensorFrame depth_b;
  sensors::SensorFrame tac_left_a, tac_left_b, tac_left_c;
  sensors::SensorFrame tac_right_a, tac_right_b, tac_right_c;
};

struct TrialRecord {
  int64_t trial_id = 0;
  std::string object_id;
  world::GraspParams params;
  TrialFrames frames;
  bool label = false;
  oracle::GraspOutcome oracle_outcome;
  std::string auto_label_source = "contact_at_Tc";
};

// One full collection trial: T_a capture, policy, closure, T_b capture, lift,
// T_c capture, auto-label. Deterministic in (scene, trial_id, seed, ctx).
TrialRecord run_trial(const world::Scene& scene, int64_t trial_id, uint64_t seed,
                      const TrialContext& ctx);

// Frame values snapped to their on-disk precision (PPM/PGM quantization), so
// a written-then-read record is identical to the in-memory one.
void quantize_frames(TrialFrames& frames);

struct TrialMeta {
  int64_t trial_id = 0;
  std::string object_id;
  world::GraspParams params;
  bool label = false;
  bool success = false;
  std::string failure_mode;
  double margin = 0.0;
  std::map<std::string, std::string> frame_paths;  // slot -> path relative to root
};

struct DatasetSetup {
  uint64_t sensor_seed = 0;
  double force_lo = 0.5;
  double force_hi = 8.0;
  bool noise = true;
  double label_threshold = 0.0;
};

struct DatasetManifest {
  std::string root;
  int format_version = 1;
  DatasetSetup setup;
  std::vector<world::ObjectModel> objects;
  std::vector<TrialMeta> records;
};

inline constexpr const char* kFrameSlots[9] = {"rgb_a",  "rgb_b",  "depth_b",
                                               "tacL_a", "tacL_b", "tacL_c",
                                               "tacR_a", "tacR_b", "tacR_c"};

DatasetManifest write_dataset(const std::vector<TrialRecord>& records,
                              const std::vector<world::ObjectModel>& objects,
                              const DatasetSetup& setup, const std::string& dir);

// Parses manifest.jsonl + objects.json and verifies every referenced frame
// file exists. FormatError messages carry the manifest line number.
DatasetManifest read_dataset(const std::string& dir);

// Loads the nine frames of one record back from disk.
TrialFrames load_frames(const DatasetManifest& manifest, const TrialMeta& meta);

struct SplitSpec {
  std::vector<std::string> train_object_ids;
  std::vector<std::string> test_object_ids;
  uint64_t seed = 0;
};

SplitSpec split_by_object(const DatasetManifest& manifest, uint64_t seed,
                          double test_fraction);

}  // namespace grasplab::trials
