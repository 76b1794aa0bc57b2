#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/learn.hpp"
#include "core/select.hpp"
#include "core/trials.hpp"

namespace grasplab::pipeline {

// Directory layout under cfg.out_dir.
std::string dataset_dir(const config::RunConfig& cfg);
std::string checkpoint_dir(const config::RunConfig& cfg);
std::string reports_dir(const config::RunConfig& cfg);
std::string checkpoint_path(const std::string& ckpt_dir, learn::Modality modality,
                            int split_index);

// Sensor rig and trial context implied by the config (shared by collection
// and grasp selection so the model sees the cameras it was trained on).
sensors::SensorConfig sensors_for(const config::RunConfig& cfg);
trials::TrialContext context_for(const config::RunConfig& cfg);

// The seven learned rows of the modality comparison, best-first.
extern const std::array<learn::Modality, 7> kComparedModalities;

struct CollectSummary {
  std::string dir;
  int trials = 0;
  int objects = 0;
  int positives = 0;
  double positive_rate = 0.0;
  std::map<std::string, int> failure_modes;
  std::string text() const;
};
CollectSummary cmd_collect(const config::RunConfig& cfg);

struct TrainOutcome {
  std::string checkpoint_path;
  std::string metrics_path;
  int train_count = 0;
  int test_count = 0;
  double first_epoch_loss = 0.0;
  double last_epoch_loss = 0.0;
  double test_accuracy = 0.0;
  std::string text() const;
};
TrainOutcome cmd_train(const config::RunConfig& cfg, const std::string& dataset,
                       learn::Modality modality, int split_index);

struct EvalRow {
  std::string name;
  double mean = 0.0;      // accuracy fraction averaged over the three splits
  double std_err = 0.0;   // sample std / sqrt(3)
  std::array<double, 3> per_split{};
};
struct EvalReport {
  std::vector<EvalRow> rows;  // fixed 9-row order, learned + indentation + chance
  std::string csv;
  std::string markdown;
  std::string csv_path, md_path;
  const EvalRow* find(const std::string& name) const;
};
EvalReport cmd_eval(const config::RunConfig& cfg, const std::string& dataset,
                    const std::string& checkpoints);

struct GraspReport {
  select::BenchmarkTable table;
  std::string csv;
  std::string markdown;
  std::string csv_path, md_path;
};
GraspReport cmd_grasp(const config::RunConfig& cfg, const std::string& dataset,
                      const std::string& checkpoints);

// Aggregates the dataset summary and any emitted tables into one page.
std::string cmd_report(const config::RunConfig& cfg, const std::string& dataset);

}  // namespace grasplab::pipeline
