#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "core/layers.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace grasplab::learn {

enum class Modality {
  fusion,
  vision,
  vision_pose,
  depth,
  tactile_both,
  tactile_left,
  tactile_right,
};

const char* modality_name(Modality m);
Modality modality_from_name(std::string_view name);
inline constexpr std::array<Modality, 7> kAllModalities = {
    Modality::fusion,       Modality::vision,       Modality::vision_pose, Modality::depth,
    Modality::tactile_both, Modality::tactile_left, Modality::tactile_right};

// Which input streams a modality consumes.
struct ModalityUses {
  bool rgb = false;
  bool tactile_l = false;
  bool tactile_r = false;
  bool depth = false;
  bool pose = false;
};
ModalityUses modality_uses(Modality m);
int feature_width(Modality m);

// Three conv-relu-pool blocks ending in global average pooling; one parameter
// set may be applied to several images (the weight-sharing contract).
template <class T>
struct TowerT {
  TensorT<T> w1, b1, w2, b2, w3, b3;
  bool allocated() const { return !w1.data.empty(); }
};

template <class T>
struct HeadT {
  TensorT<T> w1, b1, w2, b2;
};

// Three-layer fully-connected embedding of the 5-d grasp parameters.
template <class T>
struct PoseT {
  TensorT<T> w1, b1, w2, b2, w3, b3;
  bool allocated() const { return !w1.data.empty(); }
};

struct ChannelStats {
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  std::array<double, 3> stdev{1.0, 1.0, 1.0};
};

struct NormStats {
  ChannelStats rgb, tdiff, depth;
  std::array<double, 5> theta_mean{};
  std::array<double, 5> theta_std{1.0, 1.0, 1.0, 1.0, 1.0};
};

struct TrainConfig {
  int epochs = 20;
  double lr = 1e-4;
  double lr_late = 1e-5;  // second half of the schedule
  int batch = 32;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  uint64_t seed = 0;
  int cam_px = 72;             // camera/depth source frames are cam_px x cam_px
  int tac_w = 72, tac_h = 54;  // tactile source frame size
};

template <class T>
struct ModelT {
  Modality modality = Modality::fusion;
  uint64_t seed = 0;
  TowerT<T> vision_tower;   // applied to rgb@T_a and rgb@T_b (shared)
  TowerT<T> tactile_tower;  // applied to both temporal-difference images (shared)
  TowerT<T> depth_tower;
  PoseT<T> pose_branch;
  HeadT<T> head;
  NormStats stats;
  TrainConfig config;
};
using Model = ModelT<float>;

inline constexpr int kTowerC1 = 8, kTowerC2 = 16, kTowerC3 = 32;
inline constexpr int kTowerFeat = 32;
inline constexpr int kHeadHidden = 64;
inline constexpr int kPoseHidden = 16;
// Random-crop slack taken off each source frame; the network itself is
// size-agnostic (global average pooling), so crops follow the frame size.
inline constexpr int kCamMargin = 8;                  // 72x72 -> 64x64 at defaults
inline constexpr int kTacMarginX = 8, kTacMarginY = 6;  // 72x54 -> 64x48 at defaults

// ---- construction ----

template <class T>
TowerT<T> make_tower() {
  TowerT<T> t;
  t.w1 = TensorT<T>({kTowerC1, 3, 3, 3});
  t.b1 = TensorT<T>({kTowerC1});
  t.w2 = TensorT<T>({kTowerC2, kTowerC1, 3, 3});
  t.b2 = TensorT<T>({kTowerC2});
  t.w3 = TensorT<T>({kTowerC3, kTowerC2, 3, 3});
  t.b3 = TensorT<T>({kTowerC3});
  return t;
}

template <class T, class F>
void visit_params(ModelT<T>& m, F&& f) {
  auto tower = [&](const char* base, TowerT<T>& t) {
    std::string b(base);
    f(b + ".w1", t.w1);
    f(b + ".b1", t.b1);
    f(b + ".w2", t.w2);
    f(b + ".b2", t.b2);
    f(b + ".w3", t.w3);
    f(b + ".b3", t.b3);
  };
  ModalityUses u = modality_uses(m.modality);
  if (u.rgb) tower("vision_tower", m.vision_tower);
  if (u.tactile_l || u.tactile_r) tower("tactile_tower", m.tactile_tower);
  if (u.depth) tower("depth_tower", m.depth_tower);
  if (u.pose) {
    f("pose_branch.w1", m.pose_branch.w1);
    f("pose_branch.b1", m.pose_branch.b1);
    f("pose_branch.w2", m.pose_branch.w2);
    f("pose_branch.b2", m.pose_branch.b2);
    f("pose_branch.w3", m.pose_branch.w3);
    f("pose_branch.b3", m.pose_branch.b3);
  }
  f("head.w1", m.head.w1);
  f("head.b1", m.head.b1);
  f("head.w2", m.head.w2);
  f("head.b2", m.head.b2);
}

template <class T>
ModelT<T> make_model(Modality modality) {
  ModelT<T> m;
  m.modality = modality;
  ModalityUses u = modality_uses(modality);
  if (u.rgb) m.vision_tower = make_tower<T>();
  if (u.tactile_l || u.tactile_r) m.tactile_tower = make_tower<T>();
  if (u.depth) m.depth_tower = make_tower<T>();
  if (u.pose) {
    m.pose_branch.w1 = TensorT<T>({kPoseHidden, 5});
    m.pose_branch.b1 = TensorT<T>({kPoseHidden});
    m.pose_branch.w2 = TensorT<T>({kPoseHidden, kPoseHidden});
    m.pose_branch.b2 = TensorT<T>({kPoseHidden});
    m.pose_branch.w3 = TensorT<T>({kPoseHidden, kPoseHidden});
    m.pose_branch.b3 = TensorT<T>({kPoseHidden});
  }
  int fw = feature_width(modality);
  m.head.w1 = TensorT<T>({kHeadHidden, fw});
  m.head.b1 = TensorT<T>({kHeadHidden});
  m.head.w2 = TensorT<T>({1, kHeadHidden});
  m.head.b2 = TensorT<T>({1});
  return m;
}

// Fan-in-scaled uniform weights, zero biases. The output layer uses a 1/fan_in
// bound (instead of 1/sqrt(fan_in)) so untrained logits sit near zero.
template <class T>
void init_params(ModelT<T>& m, uint64_t seed) {
  m.seed = seed;
  RngStream rng(seed, "init", 0);
  visit_params(m, [&](const std::string& name, TensorT<T>& t) {
    bool is_bias = t.shape.size() == 1;
    if (is_bias) {
      t.fill(T(0));
      return;
    }
    int64_t fan_in = 1;
    for (size_t i = 1; i < t.shape.size(); ++i) fan_in *= t.shape[i];
    double bound = name == "head.w2" ? 1.0 / static_cast<double>(fan_in)
                                     : 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<T>(rng.uniform(-bound, bound));
  });
}

template <class T>
ModelT<T> build_model(Modality modality, uint64_t seed) {
  ModelT<T> m = make_model<T>(modality);
  init_params(m, seed);
  return m;
}

// Same structure and shapes, all values zero (gradient / Adam buffers).
template <class T>
ModelT<T> model_like(const ModelT<T>& m) {
  ModelT<T> z = make_model<T>(m.modality);
  z.seed = m.seed;
  z.stats = m.stats;
  z.config = m.config;
  return z;
}

// ---- forward / backward ----

// Cropped, normalized inputs for one sample; only streams used by the
// modality need to be populated.
template <class T>
struct NetInputT {
  TensorT<T> rgb_a, rgb_b;      // [3,64,64]
  TensorT<T> tdiff_l, tdiff_r;  // [3,48,64]
  TensorT<T> depth;             // [3,64,64]
  TensorT<T> theta;             // [5], standardized
};
using NetInput = NetInputT<float>;

template <class T>
struct TowerCacheT {
  TensorT<T> in, c1, r1, p1, c2, r2, p2, c3, r3, p3, feat;
  std::vector<int32_t> am1, am2, am3;
};

template <class T>
struct PoseCacheT {
  TensorT<T> in, l1, r1, l2, r2, l3;
};

template <class T>
struct ForwardCacheT {
  TowerCacheT<T> va, vb, tl, tr, dp;
  PoseCacheT<T> pose;
  TensorT<T> feat, h1, hr;
  T logit = T(0);
};

template <class T>
void tower_forward(const TowerT<T>& p, const TensorT<T>& x, TowerCacheT<T>& c) {
  c.in = x;
  c.c1 = conv2d_forward(c.in, p.w1, p.b1);
  c.r1 = relu_forward(c.c1);
  c.p1 = maxpool2_forward(c.r1, c.am1);
  c.c2 = conv2d_forward(c.p1, p.w2, p.b2);
  c.r2 = relu_forward(c.c2);
  c.p2 = maxpool2_forward(c.r2, c.am2);
  c.c3 = conv2d_forward(c.p2, p.w3, p.b3);
  c.r3 = relu_forward(c.c3);
  c.p3 = maxpool2_forward(c.r3, c.am3);
  c.feat = gap_forward(c.p3);
}

template <class T>
void tower_backward(const TowerT<T>& p, const TowerCacheT<T>& c, const TensorT<T>& gfeat,
                    TowerT<T>& gp) {
  TensorT<T> g = gap_backward(c.p3.shape, gfeat);
  g = maxpool2_backward(c.r3.shape, c.am3, g);
  g = relu_backward(c.c3, g);
  TensorT<T> gprev;
  conv2d_backward(c.p2, p.w3, g, &gprev, gp.w3, gp.b3);
  g = maxpool2_backward(c.r2.shape, c.am2, gprev);
  g = relu_backward(c.c2, g);
  conv2d_backward(c.p1, p.w2, g, &gprev, gp.w2, gp.b2);
  g = maxpool2_backward(c.r1.shape, c.am1, gprev);
  g = relu_backward(c.c1, g);
  conv2d_backward(c.in, p.w1, g, static_cast<TensorT<T>*>(nullptr), gp.w1, gp.b1);
}

template <class T>
void pose_forward(const PoseT<T>& p, const TensorT<T>& theta, PoseCacheT<T>& c) {
  c.in = theta;
  c.l1 = linear_forward(c.in, p.w1, p.b1);
  c.r1 = relu_forward(c.l1);
  c.l2 = linear_forward(c.r1, p.w2, p.b2);
  c.r2 = relu_forward(c.l2);
  c.l3 = linear_forward(c.r2, p.w3, p.b3);
}

template <class T>
void pose_backward(const PoseT<T>& p, const PoseCacheT<T>& c, const TensorT<T>& gout,
                   PoseT<T>& gp) {
  TensorT<T> g;
  linear_backward(c.r2, p.w3, gout, &g, gp.w3, gp.b3);
  g = relu_backward(c.l2, g);
  TensorT<T> g2;
  linear_backward(c.r1, p.w2, g, &g2, gp.w2, gp.b2);
  g2 = relu_backward(c.l1, g2);
  linear_backward(c.in, p.w1, g2, static_cast<TensorT<T>*>(nullptr), gp.w1, gp.b1);
}

template <class T>
T model_logit(const ModelT<T>& m, const NetInputT<T>& in, ForwardCacheT<T>& c) {
  ModalityUses u = modality_uses(m.modality);
  c.feat = TensorT<T>({feature_width(m.modality)});
  int off = 0;
  auto append = [&](const TensorT<T>& v) {
    for (int64_t i = 0; i < v.numel(); ++i) c.feat[off + i] = v[i];
    off += static_cast<int>(v.numel());
  };
  if (u.rgb) {
    tower_forward(m.vision_tower, in.rgb_a, c.va);
    tower_forward(m.vision_tower, in.rgb_b, c.vb);
    append(c.va.feat);
    append(c.vb.feat);
  }
  if (u.tactile_l) {
    tower_forward(m.tactile_tower, in.tdiff_l, c.tl);
    append(c.tl.feat);
  }
  if (u.tactile_r) {
    tower_forward(m.tactile_tower, in.tdiff_r, c.tr);
    append(c.tr.feat);
  }
  if (u.depth) {
    tower_forward(m.depth_tower, in.depth, c.dp);
    append(c.dp.feat);
  }
  if (u.pose) {
    pose_forward(m.pose_branch, in.theta, c.pose);
    append(c.pose.l3);
  }
  c.h1 = linear_forward(c.feat, m.head.w1, m.head.b1);
  c.hr = relu_forward(c.h1);
  TensorT<T> z = linear_forward(c.hr, m.head.w2, m.head.b2);
  c.logit = z[0];
  return c.logit;
}

template <class T>
void model_backward(const ModelT<T>& m, const ForwardCacheT<T>& c, T dlogit, ModelT<T>& g) {
  ModalityUses u = modality_uses(m.modality);
  TensorT<T> gz({1});
  gz[0] = dlogit;
  TensorT<T> ghr;
  linear_backward(c.hr, m.head.w2, gz, &ghr, g.head.w2, g.head.b2);
  ghr = relu_backward(c.h1, ghr);
  TensorT<T> gfeat;
  linear_backward(c.feat, m.head.w1, ghr, &gfeat, g.head.w1, g.head.b1);
  int off = 0;
  auto slice = [&](int n) {
    TensorT<T> s({n});
    for (int i = 0; i < n; ++i) s[i] = gfeat[off + i];
    off += n;
    return s;
  };
  if (u.rgb) {
    tower_backward(m.vision_tower, c.va, slice(kTowerFeat), g.vision_tower);
    tower_backward(m.vision_tower, c.vb, slice(kTowerFeat), g.vision_tower);
  }
  if (u.tactile_l) tower_backward(m.tactile_tower, c.tl, slice(kTowerFeat), g.tactile_tower);
  if (u.tactile_r) tower_backward(m.tactile_tower, c.tr, slice(kTowerFeat), g.tactile_tower);
  if (u.depth) tower_backward(m.depth_tower, c.dp, slice(kTowerFeat), g.depth_tower);
  if (u.pose) pose_backward(m.pose_branch, c.pose, slice(kPoseHidden), g.pose_branch);
}

// ---- checkpoint io (float models) ----

void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

}  // namespace grasplab::learn
