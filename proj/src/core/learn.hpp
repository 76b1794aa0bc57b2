#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "core/network.hpp"
#include "core/trials.hpp"

namespace grasplab::learn {

// One trial as the networks see it: prediction-time inputs only (nothing from
// T_c) plus the training label. Tensors are [C,H,W]; tactile inputs are the
// temporal-difference images; depth is replicated to three channels.
struct Example {
  Tensor rgb_a, rgb_b;      // [3,72,72]
  Tensor tdiff_l, tdiff_r;  // [3,54,72]
  Tensor depth_b;           // [3,72,72]
  std::array<double, 5> theta{};
  std::array<double, 2> indentation{};  // mean |tac@T_b - tac@T_a| per sensor
  bool label = false;
};

Example make_example(const trials::TrialFrames& frames, const world::GraspParams& params,
                     bool label);

// Loads records whose object_id is in `object_filter` (empty filter = all),
// materializing only the streams in `needed` to keep memory proportional to
// the modality being trained. Indentation features are filled whenever the
// tactile streams are loaded.
std::vector<Example> load_examples(const trials::DatasetManifest& manifest,
                                   const std::vector<std::string>& object_filter,
                                   const ModalityUses& needed);

// ---- input preparation (exposed for tests) ----

Tensor frame_to_chw(const sensors::SensorFrame& frame);  // 3-channel frames
Tensor depth_to_chw3(const sensors::SensorFrame& frame);
Tensor crop_chw(const Tensor& t, int dy, int dx, int oh, int ow);
Tensor hflip_chw(const Tensor& t);
// Fused crop (+ optional horizontal flip) + per-channel standardization.
Tensor prep_input(const Tensor& t, int dy, int dx, int oh, int ow, bool flip,
                  const ChannelStats& cs);
// Center-crop evaluation inputs for the model's modality.
NetInput eval_input(const Model& m, const Example& ex);

NormStats compute_stats(const std::vector<Example>& examples, const ModalityUses& uses);

// ---- training and prediction ----

struct TrainStats {
  double first_epoch_loss = 0.0;
  double last_epoch_loss = 0.0;
  std::vector<double> epoch_loss;
};

Model train(const std::vector<Example>& train_set, Modality modality, const TrainConfig& config,
            TrainStats* stats_out = nullptr);

double predict(const Model& m, const Example& ex);

// ---- evaluation ----

struct Metrics {
  double accuracy = 0.0;
  double positive_rate = 0.0;  // fraction of true-positive labels in the set
  int total = 0;
  int tp = 0, tn = 0, fp = 0, fn = 0;
};

Metrics evaluate_model(const Model& m, const std::vector<Example>& test);
// Majority-class predictor fit on the training labels, scored on test.
double chance_accuracy(const std::vector<Example>& train, const std::vector<Example>& test);

// ---- baselines ----

std::pair<double, double> indentation_features(const trials::TrialFrames& frames);

struct SvmConfig {
  double lambda = 1e-3;
  int epochs = 200;
  double lr = 1e-2;  // decays as lr/t
};

struct SvmModel {
  std::vector<double> w;
  double bias = 0.0;
  std::vector<double> feat_mean, feat_std;
};

SvmModel train_linear_svm(const std::vector<std::vector<double>>& features,
                          const std::vector<bool>& labels, const SvmConfig& config = {});
bool predict_svm(const SvmModel& model, const std::vector<double>& feature);

}  // namespace grasplab::learn
