#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/learn.hpp"
#include "core/oracle.hpp"
#include "core/sensors.hpp"
#include "core/world.hpp"

namespace grasplab::select {

// Proposal-and-rejection loop settings. The proposal sampler reuses the
// collection policy's distributions so the model is queried in-distribution;
// `blind` widens the placement for stress tests.
struct SelectionConfig {
  double threshold = 0.9;
  int max_attempts = 50;
  double force_lo = 0.5;
  double force_hi = 8.0;
  bool blind = false;
  geom::Rect table{-100, -100, 100, 100};
  sensors::SensorConfig sensors;
};

SelectionConfig make_selection_config(uint64_t sensor_seed, bool noise);

struct Attempt {
  world::GraspParams params;
  double probability = 0.0;
};

struct SelectionResult {
  bool accepted = false;
  int attempts = 0;
  std::optional<world::GraspParams> chosen_params;
  std::optional<bool> lift_success;
  std::vector<Attempt> attempt_log;
};

// Propose random closures, query the model after each simulated closure, and
// accept the first whose predicted success probability clears the threshold.
// One lift is evaluated on acceptance. Deterministic in (scene, seed).
SelectionResult select_grasp(const world::Scene& scene, const learn::Model& model,
                             const SelectionConfig& config, uint64_t seed);

// Closures displaced sideways so the jaws shut on air next to the object;
// returns how many of `n` such closures the model accepts. Probes where the
// displacement still produced contact are redrawn, so all `n` are genuinely
// contact-free.
int count_empty_closure_acceptances(const world::Scene& scene, const learn::Model& model,
                                    const SelectionConfig& config, int n, uint64_t seed);

struct BenchmarkRow {
  std::string model;      // "baseline" or a modality name
  std::string object_id;  // per-object rows plus one "TOTAL" row per model
  int trials = 0;
  int successes = 0;
  double mean_attempts = 0.0;
  double success_rate() const { return trials == 0 ? 0.0 : double(successes) / trials; }
};

struct BenchmarkTable {
  std::vector<std::string> model_names;  // row-group order, "baseline" first
  std::vector<std::string> object_ids;
  std::vector<BenchmarkRow> rows;
  const BenchmarkRow* find(const std::string& model, const std::string& object_id) const;
};

// Grasp each object `trials_per_object` times per model, scoring a trial as a
// success when the selector accepts and the lift holds. The unfiltered
// collection policy is always measured alongside as "baseline".
BenchmarkTable grasp_benchmark(const std::vector<world::ObjectModel>& objects,
                               const std::vector<std::pair<std::string, const learn::Model*>>& models,
                               int trials_per_object, const SelectionConfig& config,
                               uint64_t seed);

std::string benchmark_csv(const BenchmarkTable& table);
std::string benchmark_markdown(const BenchmarkTable& table);

}  // namespace grasplab::select
