#include "core/learn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace grasplab::learn {


Tensor frame_to_chw(const sensors::SensorFrame& frame) {
  if (frame.channels != 3) throw ShapeMismatch("expected a 3-channel frame");
  Tensor t({3, frame.height, frame.width});
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < frame.height; ++y)
      for (int x = 0; x < frame.width; ++x) t.at(c, y, x) = frame.at(y, x, c);
  return t;
}

Tensor depth_to_chw3(const sensors::SensorFrame& frame) {
  if (frame.channels != 1) throw ShapeMismatch("expected a 1-channel frame");
  Tensor t({3, frame.height, frame.width});
  for (int y = 0; y < frame.height; ++y)
    for (int x = 0; x < frame.width; ++x) {
      float v = frame.at(y, x, 0);
      t.at(0, y, x) = v;
      t.at(1, y, x) = v;
      t.at(2, y, x) = v;
    }
  return t;
}

Example make_example(const trials::TrialFrames& frames, const world::GraspParams& params,
                     bool label) {
  Example ex;
  ex.rgb_a = frame_to_chw(frames.rgb_a);
  ex.rgb_b = frame_to_chw(frames.rgb_b);
  ex.tdiff_l = frame_to_chw(sensors::temporal_difference(frames.tac_left_b, frames.tac_left_a));
  ex.tdiff_r = frame_to_chw(sensors::temporal_difference(frames.tac_right_b, frames.tac_right_a));
  ex.depth_b = depth_to_chw3(frames.depth_b);
  ex.theta = {params.ee_x, params.ee_y, params.ee_z, params.phi, params.force};
  ex.indentation = {sensors::mean_abs_diff(frames.tac_left_b, frames.tac_left_a),
                    sensors::mean_abs_diff(frames.tac_right_b, frames.tac_right_a)};
  ex.label = label;
  return ex;
}

std::vector<Example> load_examples(const trials::DatasetManifest& manifest,
                                   const std::vector<std::string>& object_filter,
                                   const ModalityUses& needed) {
  std::unordered_set<std::string> keep(object_filter.begin(), object_filter.end());
  auto path_of = [&](const trials::TrialMeta& meta, const char* slot) {
    auto it = meta.frame_paths.find(slot);
    if (it == meta.frame_paths.end())
      throw FormatError("trial " + std::to_string(meta.trial_id) + " is missing frame slot " +
                        slot);
    return manifest.root + "/" + it->second;
  };
  using sensors::FrameKind;
  using sensors::SnapTag;
  std::vector<Example> out;
  for (const trials::TrialMeta& meta : manifest.records) {
    if (!keep.empty() && keep.find(meta.object_id) == keep.end()) continue;
    Example ex;
    if (needed.rgb) {
      ex.rgb_a = frame_to_chw(
          sensors::read_ppm(path_of(meta, "rgb_a"), FrameKind::rgb, SnapTag::Ta));
      ex.rgb_b = frame_to_chw(
          sensors::read_ppm(path_of(meta, "rgb_b"), FrameKind::rgb, SnapTag::Tb));
    }
    if (needed.tactile_l) {
      auto a = sensors::read_ppm(path_of(meta, "tacL_a"), FrameKind::tactile, SnapTag::Ta);
      auto b = sensors::read_ppm(path_of(meta, "tacL_b"), FrameKind::tactile, SnapTag::Tb);
      ex.tdiff_l = frame_to_chw(sensors::temporal_difference(b, a));
      ex.indentation[0] = sensors::mean_abs_diff(b, a);
    }
    if (needed.tactile_r) {
      auto a = sensors::read_ppm(path_of(meta, "tacR_a"), FrameKind::tactile, SnapTag::Ta);
      auto b = sensors::read_ppm(path_of(meta, "tacR_b"), FrameKind::tactile, SnapTag::Tb);
      ex.tdiff_r = frame_to_chw(sensors::temporal_difference(b, a));
      ex.indentation[1] = sensors::mean_abs_diff(b, a);
    }
    if (needed.depth)
      ex.depth_b = depth_to_chw3(sensors::read_pgm(path_of(meta, "depth_b"), SnapTag::Tb));
    ex.theta = {meta.params.ee_x, meta.params.ee_y, meta.params.ee_z, meta.params.phi,
                meta.params.force};
    ex.label = meta.label;
    out.push_back(std::move(ex));
  }
  return out;
}

Tensor crop_chw(const Tensor& t, int dy, int dx, int oh, int ow) {
  if (t.shape.size() != 3 || dy < 0 || dx < 0 || dy + oh > t.shape[1] || dx + ow > t.shape[2])
    throw ShapeMismatch("crop window outside the image");
  Tensor out({t.shape[0], oh, ow});
  for (int c = 0; c < t.shape[0]; ++c)
    for (int y = 0; y < oh; ++y) {
      const float* src = &t.at(c, y + dy, dx);
      float* dst = &out.at(c, y, 0);
      std::copy(src, src + ow, dst);
    }
  return out;
}

Tensor hflip_chw(const Tensor& t) {
  Tensor out(t.shape);
  for (int c = 0; c < t.shape[0]; ++c)
    for (int y = 0; y < t.shape[1]; ++y)
      for (int x = 0; x < t.shape[2]; ++x) out.at(c, y, x) = t.at(c, y, t.shape[2] - 1 - x);
  return out;
}

Tensor prep_input(const Tensor& t, int dy, int dx, int oh, int ow, bool flip,
                  const ChannelStats& cs) {
  if (t.shape.size() != 3 || t.shape[0] != 3 || dy < 0 || dx < 0 || dy + oh > t.shape[1] ||
      dx + ow > t.shape[2])
    throw ShapeMismatch("crop window outside the image");
  Tensor out({3, oh, ow});
  for (int c = 0; c < 3; ++c) {
    const float mean = static_cast<float>(cs.mean[c]);
    const float inv = static_cast<float>(1.0 / cs.stdev[c]);
    for (int y = 0; y < oh; ++y) {
      const float* src = &t.at(c, y + dy, dx);
      float* dst = &out.at(c, y, 0);
      if (flip) {
        for (int x = 0; x < ow; ++x) dst[x] = (src[ow - 1 - x] - mean) * inv;
      } else {
        for (int x = 0; x < ow; ++x) dst[x] = (src[x] - mean) * inv;
      }
    }
  }
  return out;
}

namespace {

Tensor theta_input(const std::array<double, 5>& theta, const NormStats& stats) {
  Tensor t({5});
  for (int i = 0; i < 5; ++i)
    t[i] = static_cast<float>((theta[i] - stats.theta_mean[i]) / stats.theta_std[i]);
  return t;
}

// One record's worth of augmentation decisions; the draw order is fixed so
// training is a pure function of (dataset, config).
struct AugmentDraw {
  int dy_a = 0, dx_a = 0, dy_b = 0, dx_b = 0;
  bool flip_v = false;
  int dy_l = 0, dx_l = 0;
  bool flip_l = false;
  int dy_r = 0, dx_r = 0;
  bool flip_r = false;
  int dy_d = 0, dx_d = 0;
  bool flip_d = false;
};

AugmentDraw draw_augment(RngStream& rng, const ModalityUses& u) {
  AugmentDraw d;
  const int cam = kCamMargin;
  const int tac_y = kTacMarginY;
  const int tac_x = kTacMarginX;
  if (u.rgb) {
    d.dy_a = static_cast<int>(rng.uniform_int(0, cam));
    d.dx_a = static_cast<int>(rng.uniform_int(0, cam));
    d.dy_b = static_cast<int>(rng.uniform_int(0, cam));
    d.dx_b = static_cast<int>(rng.uniform_int(0, cam));
    d.flip_v = rng.uniform() < 0.5;
  }
  if (u.tactile_l) {
    d.dy_l = static_cast<int>(rng.uniform_int(0, tac_y));
    d.dx_l = static_cast<int>(rng.uniform_int(0, tac_x));
    d.flip_l = rng.uniform() < 0.5;
  }
  if (u.tactile_r) {
    d.dy_r = static_cast<int>(rng.uniform_int(0, tac_y));
    d.dx_r = static_cast<int>(rng.uniform_int(0, tac_x));
    d.flip_r = rng.uniform() < 0.5;
  }
  if (u.depth) {
    d.dy_d = static_cast<int>(rng.uniform_int(0, cam));
    d.dx_d = static_cast<int>(rng.uniform_int(0, cam));
    d.flip_d = rng.uniform() < 0.5;
  }
  return d;
}

NetInput make_input(const Model& m, const Example& ex, const AugmentDraw& d) {
  ModalityUses u = modality_uses(m.modality);
  const int cam_crop = m.config.cam_px - kCamMargin;
  const int tac_crop_h = m.config.tac_h - kTacMarginY;
  const int tac_crop_w = m.config.tac_w - kTacMarginX;
  NetInput in;
  if (u.rgb) {
    in.rgb_a = prep_input(ex.rgb_a, d.dy_a, d.dx_a, cam_crop, cam_crop, d.flip_v, m.stats.rgb);
    in.rgb_b = prep_input(ex.rgb_b, d.dy_b, d.dx_b, cam_crop, cam_crop, d.flip_v, m.stats.rgb);
  }
  if (u.tactile_l)
    in.tdiff_l =
        prep_input(ex.tdiff_l, d.dy_l, d.dx_l, tac_crop_h, tac_crop_w, d.flip_l, m.stats.tdiff);
  if (u.tactile_r)
    in.tdiff_r =
        prep_input(ex.tdiff_r, d.dy_r, d.dx_r, tac_crop_h, tac_crop_w, d.flip_r, m.stats.tdiff);
  if (u.depth)
    in.depth =
        prep_input(ex.depth_b, d.dy_d, d.dx_d, cam_crop, cam_crop, d.flip_d, m.stats.depth);
  if (u.pose) in.theta = theta_input(ex.theta, m.stats);
  return in;
}

}  // namespace

NetInput eval_input(const Model& m, const Example& ex) {
  AugmentDraw center;  // no flips
  center.dy_a = center.dy_b = center.dy_d = kCamMargin / 2;
  center.dx_a = center.dx_b = center.dx_d = kCamMargin / 2;
  center.dy_l = center.dy_r = kTacMarginY / 2;
  center.dx_l = center.dx_r = kTacMarginX / 2;
  return make_input(m, ex, center);
}

NormStats compute_stats(const std::vector<Example>& examples, const ModalityUses& uses) {
  NormStats s;
  struct Acc {
    double sum[3] = {0, 0, 0}, sq[3] = {0, 0, 0};
    int64_t n = 0;
    void add(const Tensor& t) {
      const int64_t hw = static_cast<int64_t>(t.shape[1]) * t.shape[2];
      for (int c = 0; c < 3; ++c) {
        const float* p = &t.at(c, 0, 0);
        double a = 0, b = 0;
        for (int64_t i = 0; i < hw; ++i) {
          a += p[i];
          b += static_cast<double>(p[i]) * p[i];
        }
        sum[c] += a;
        sq[c] += b;
      }
      n += hw;
    }
    ChannelStats stats() const {
      ChannelStats c;
      for (int i = 0; i < 3; ++i) {
        double mean = n ? sum[i] / static_cast<double>(n) : 0.0;
        double var = n ? sq[i] / static_cast<double>(n) - mean * mean : 1.0;
        c.mean[i] = mean;
        c.stdev[i] = std::max(std::sqrt(std::max(var, 0.0)), 1e-3);
      }
      return c;
    }
  };
  Acc rgb, tdiff, depth;
  double tsum[5] = {0}, tsq[5] = {0};
  for (const Example& ex : examples) {
    if (uses.rgb) {
      rgb.add(ex.rgb_a);
      rgb.add(ex.rgb_b);
    }
    if (uses.tactile_l) tdiff.add(ex.tdiff_l);
    if (uses.tactile_r) tdiff.add(ex.tdiff_r);
    if (uses.depth) depth.add(ex.depth_b);
    for (int i = 0; i < 5; ++i) {
      tsum[i] += ex.theta[i];
      tsq[i] += ex.theta[i] * ex.theta[i];
    }
  }
  if (uses.rgb) s.rgb = rgb.stats();
  if (uses.tactile_l || uses.tactile_r) s.tdiff = tdiff.stats();
  if (uses.depth) s.depth = depth.stats();
  if (uses.pose && !examples.empty()) {
    const double n = static_cast<double>(examples.size());
    for (int i = 0; i < 5; ++i) {
      s.theta_mean[i] = tsum[i] / n;
      double var = tsq[i] / n - s.theta_mean[i] * s.theta_mean[i];
      s.theta_std[i] = std::max(std::sqrt(std::max(var, 0.0)), 1e-6);
    }
  }
  return s;
}

Model train(const std::vector<Example>& train_set, Modality modality, const TrainConfig& config,
            TrainStats* stats_out) {
  bool has_pos = false, has_neg = false;
  for (const Example& ex : train_set) (ex.label ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw DegenerateLabels("training set must contain both outcome classes");
  // Three pooling halvings need at least 8 px after the crop.
  if (config.cam_px < kCamMargin + 8 || config.tac_w < kTacMarginX + 8 ||
      config.tac_h < kTacMarginY + 8)
    throw ConfigError("source image sizes too small for crop and pooling");

  const ModalityUses uses = modality_uses(modality);
  Model m = build_model<float>(modality, config.seed);
  m.config = config;
  m.stats = compute_stats(train_set, uses);

  Model grads = model_like(m), adam_m = model_like(m), adam_v = model_like(m);
  std::vector<Tensor*> ps, gs, ms, vs;
  visit_params(m, [&](const std::string&, Tensor& t) { ps.push_back(&t); });
  visit_params(grads, [&](const std::string&, Tensor& t) { gs.push_back(&t); });
  visit_params(adam_m, [&](const std::string&, Tensor& t) { ms.push_back(&t); });
  visit_params(adam_v, [&](const std::string&, Tensor& t) { vs.push_back(&t); });

  const int n = static_cast<int>(train_set.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  int64_t t_step = 0;
  if (stats_out) *stats_out = TrainStats{};

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const double lr = epoch <= (config.epochs + 1) / 2 ? config.lr : config.lr_late;
    RngStream rng(config.seed, "train", static_cast<uint64_t>(epoch));
    for (int i = n - 1; i >= 1; --i) {
      int j = static_cast<int>(rng.uniform_int(0, i));
      std::swap(order[i], order[j]);
    }
    double epoch_loss = 0.0;
    for (int start = 0; start < n; start += config.batch) {
      const int bsz = std::min(config.batch, n - start);
      for (Tensor* g : gs) g->fill(0.0f);
      for (int k = 0; k < bsz; ++k) {
        const Example& ex = train_set[order[start + k]];
        AugmentDraw d = draw_augment(rng, uses);
        NetInput in = make_input(m, ex, d);
        ForwardCacheT<float> cache;
        float z = model_logit(m, in, cache);
        float y = ex.label ? 1.0f : 0.0f;
        epoch_loss += bce_with_logit(static_cast<double>(z), static_cast<double>(y));
        float dz = (sigmoid(z) - y) / static_cast<float>(bsz);
        model_backward(m, cache, dz, grads);
      }
      ++t_step;
      const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(t_step));
      const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(t_step));
      for (size_t pi = 0; pi < ps.size(); ++pi) {
        Tensor &p = *ps[pi], &g = *gs[pi], &mm = *ms[pi], &vv = *vs[pi];
        for (int64_t i = 0; i < p.numel(); ++i) {
          mm[i] = static_cast<float>(config.beta1 * mm[i] + (1.0 - config.beta1) * g[i]);
          vv[i] = static_cast<float>(config.beta2 * vv[i] +
                                     (1.0 - config.beta2) * static_cast<double>(g[i]) * g[i]);
          const double mhat = mm[i] / bc1;
          const double vhat = vv[i] / bc2;
          p[i] -= static_cast<float>(lr * mhat / (std::sqrt(vhat) + config.eps));
        }
      }
    }
    epoch_loss /= std::max(n, 1);
    if (stats_out) {
      if (epoch == 1) stats_out->first_epoch_loss = epoch_loss;
      stats_out->last_epoch_loss = epoch_loss;
      stats_out->epoch_loss.push_back(epoch_loss);
    }
  }
  return m;
}

double predict(const Model& m, const Example& ex) {
  const ModalityUses u = modality_uses(m.modality);
  auto need = [](const Tensor& t, int c, int h, int w, const char* what) {
    if (t.shape != std::vector<int>{c, h, w})
      throw ShapeMismatch(std::string("predict: missing or misshapen input ") + what);
  };
  if (u.rgb) {
    need(ex.rgb_a, 3, m.config.cam_px, m.config.cam_px, "rgb@T_a");
    need(ex.rgb_b, 3, m.config.cam_px, m.config.cam_px, "rgb@T_b");
  }
  if (u.tactile_l) need(ex.tdiff_l, 3, m.config.tac_h, m.config.tac_w, "tdiff left");
  if (u.tactile_r) need(ex.tdiff_r, 3, m.config.tac_h, m.config.tac_w, "tdiff right");
  if (u.depth) need(ex.depth_b, 3, m.config.cam_px, m.config.cam_px, "depth@T_b");
  NetInput in = eval_input(m, ex);
  ForwardCacheT<float> cache;
  float z = model_logit(m, in, cache);
  return sigmoid(static_cast<double>(z));
}

Metrics evaluate_model(const Model& m, const std::vector<Example>& test) {
  if (test.empty()) throw EmptySplit("evaluation requires a non-empty test set");
  Metrics out;
  out.total = static_cast<int>(test.size());
  for (const Example& ex : test) {
    bool pred = predict(m, ex) > 0.5;
    if (ex.label) {
      ++(pred ? out.tp : out.fn);
    } else {
      ++(pred ? out.fp : out.tn);
    }
  }
  out.accuracy = static_cast<double>(out.tp + out.tn) / out.total;
  out.positive_rate = static_cast<double>(out.tp + out.fn) / out.total;
  return out;
}

double chance_accuracy(const std::vector<Example>& train, const std::vector<Example>& test) {
  if (train.empty() || test.empty()) throw EmptySplit("chance baseline requires non-empty sets");
  int64_t pos = 0;
  for (const Example& ex : train) pos += ex.label ? 1 : 0;
  const bool majority = pos > static_cast<int64_t>(train.size()) - pos;
  int64_t match = 0;
  for (const Example& ex : test) match += ex.label == majority ? 1 : 0;
  return static_cast<double>(match) / static_cast<double>(test.size());
}

std::pair<double, double> indentation_features(const trials::TrialFrames& frames) {
  return {sensors::mean_abs_diff(frames.tac_left_b, frames.tac_left_a),
          sensors::mean_abs_diff(frames.tac_right_b, frames.tac_right_a)};
}

SvmModel train_linear_svm(const std::vector<std::vector<double>>& features,
                          const std::vector<bool>& labels, const SvmConfig& config) {
  if (features.empty() || features.size() != labels.size())
    throw DegenerateLabels("svm needs one label per feature row");
  bool has_pos = false, has_neg = false;
  for (bool b : labels) (b ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) throw DegenerateLabels("svm training labels are single-class");

  const size_t n = features.size(), dim = features[0].size();
  for (const auto& f : features)
    if (f.size() != dim) throw ShapeMismatch("svm feature rows differ in width");

  SvmModel model;
  model.feat_mean.assign(dim, 0.0);
  model.feat_std.assign(dim, 0.0);
  for (const auto& f : features)
    for (size_t j = 0; j < dim; ++j) model.feat_mean[j] += f[j];
  for (size_t j = 0; j < dim; ++j) model.feat_mean[j] /= static_cast<double>(n);
  for (const auto& f : features)
    for (size_t j = 0; j < dim; ++j) {
      double d = f[j] - model.feat_mean[j];
      model.feat_std[j] += d * d;
    }
  for (size_t j = 0; j < dim; ++j) {
    model.feat_std[j] = std::sqrt(model.feat_std[j] / static_cast<double>(n));
    if (model.feat_std[j] < 1e-12) model.feat_std[j] = 1.0;
  }

  std::vector<std::vector<double>> xs(n, std::vector<double>(dim));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < dim; ++j)
      xs[i][j] = (features[i][j] - model.feat_mean[j]) / model.feat_std[j];

  model.w.assign(dim, 0.0);
  std::vector<double> gw(dim);
  for (int t = 1; t <= config.epochs; ++t) {
    const double eta = config.lr / t;
    for (size_t j = 0; j < dim; ++j) gw[j] = 2.0 * config.lambda * model.w[j];
    double gb = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double y = labels[i] ? 1.0 : -1.0;
      double score = model.bias;
      for (size_t j = 0; j < dim; ++j) score += model.w[j] * xs[i][j];
      if (y * score < 1.0) {
        const double scale = y / static_cast<double>(n);
        for (size_t j = 0; j < dim; ++j) gw[j] -= scale * xs[i][j];
        gb -= scale;
      }
    }
    for (size_t j = 0; j < dim; ++j) model.w[j] -= eta * gw[j];
    model.bias -= eta * gb;
  }
  return model;
}

bool predict_svm(const SvmModel& model, const std::vector<double>& feature) {
  if (feature.size() != model.w.size()) throw ShapeMismatch("svm feature width mismatch");
  double score = model.bias;
  for (size_t j = 0; j < feature.size(); ++j)
    score += model.w[j] * (feature[j] - model.feat_mean[j]) / model.feat_std[j];
  return score > 0.0;
}

}  // namespace grasplab::learn
