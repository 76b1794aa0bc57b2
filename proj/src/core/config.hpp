#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace grasplab::config {

// One JSON file governs every stage; commands take only path/seed overrides.
struct RunConfig {
  uint64_t seed = 1;
  std::string out_dir = "runs/default";

  // collect
  int object_count = 40;
  int trial_count = 2000;
  double force_lo = 0.5;
  double force_hi = 8.0;
  bool noise = true;

  // images
  int camera_px = 72;   // front + top-down views, square
  int gel_width = 72;   // tactile frames
  int gel_height = 54;

  // train
  int epochs = 20;
  double lr = 1e-4;
  double lr_late = 1e-5;
  int batch = 32;

  // eval
  std::array<uint64_t, 3> split_seeds{101, 202, 303};
  double test_fraction = 0.25;

  // select
  double threshold = 0.9;
  int max_attempts = 50;
  int bench_objects = 12;
  int bench_trials = 10;
};

// Throws ConfigError naming the offending field path.
void validate(const RunConfig& cfg);

// Parse/serialize. Unknown keys and type mismatches are rejected with the
// field path; missing keys keep their defaults. parse_config validates.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string config_json(const RunConfig& cfg);

}  // namespace grasplab::config
