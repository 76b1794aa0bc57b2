#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "core/errors.hpp"
#include "core/learn.hpp"
#include "core/rng.hpp"
#include "core/trials.hpp"
#include "core/world.hpp"
#include "doctest.h"
#include "gradcheck.hpp"

using namespace grasplab;
using learn::TensorT;
namespace fs = std::filesystem;

namespace {

using DTensor = TensorT<double>;

void fill_rand(DTensor& t, RngStream& rng, double lo = -1.0, double hi = 1.0) {
  for (auto& v : t.data) v = rng.uniform(lo, hi);
}

double weighted_sum(const DTensor& out, const DTensor& r) {
  double s = 0.0;
  for (int64_t i = 0; i < out.numel(); ++i) s += out[i] * r[i];
  return s;
}

double rel_err(double analytic, double numeric) {
  double denom = std::max(1e-6, std::fabs(analytic) + std::fabs(numeric));
  return std::fabs(analytic - numeric) / denom;
}

// Central finite difference of `loss` in entry `idx` of `t`.
template <class Loss>
double numeric_grad(DTensor& t, int64_t idx, Loss&& loss, double h = 1e-4) {
  const double keep = t[idx];
  t[idx] = keep + h;
  const double up = loss();
  t[idx] = keep - h;
  const double down = loss();
  t[idx] = keep;
  return (up - down) / (2.0 * h);
}

template <class Loss>
void check_tensor_grad(const char* label, DTensor& t, const DTensor& analytic, Loss&& loss,
                       RngStream& rng, int probes = 6) {
  REQUIRE(analytic.shape == t.shape);
  for (int k = 0; k < probes; ++k) {
    const int64_t idx = rng.uniform_int(0, t.numel() - 1);
    const double num = numeric_grad(t, idx, loss);
    CAPTURE(label);
    CAPTURE(idx);
    CAPTURE(analytic[idx]);
    CAPTURE(num);
    CHECK(rel_err(analytic[idx], num) < 1e-4);
  }
}

learn::Example synth_example(uint64_t seed, bool label) {
  RngStream rng(seed, "synth", 0);
  learn::Example e;
  e.rgb_a = learn::Tensor({3, 72, 72});
  e.rgb_b = learn::Tensor({3, 72, 72});
  e.tdiff_l = learn::Tensor({3, 54, 72});
  e.tdiff_r = learn::Tensor({3, 54, 72});
  e.depth_b = learn::Tensor({3, 72, 72});
  for (auto& v : e.rgb_a.data) v = float(rng.uniform());
  for (auto& v : e.rgb_b.data) v = float(rng.uniform());
  for (auto& v : e.tdiff_l.data) v = float(0.5 + rng.uniform(-0.15, 0.15));
  for (auto& v : e.tdiff_r.data) v = float(0.5 + rng.uniform(-0.15, 0.15));
  for (auto& v : e.depth_b.data) v = float(rng.uniform(0.0, 40.0));
  e.theta = {rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(5, 60),
             rng.uniform(0, 3.1), rng.uniform(0.5, 8)};
  e.indentation = {rng.uniform(0, 0.1), rng.uniform(0, 0.1)};
  e.label = label;
  return e;
}

std::vector<learn::Example> synth_set(int n, uint64_t seed) {
  std::vector<learn::Example> out;
  for (int i = 0; i < n; ++i) out.push_back(synth_example(hash_u64(seed, uint64_t(i)), i % 2 == 0));
  return out;
}

// Labels encoded in the left gel brightness; everything else is noise.
std::vector<learn::Example> separable_set(int n, uint64_t seed) {
  auto out = synth_set(n, seed);
  for (int i = 0; i < n; ++i) {
    RngStream rng(seed, "sep", uint64_t(i));
    const float base = out[i].label ? 0.62f : 0.38f;
    for (auto& v : out[i].tdiff_l.data) v = base + float(rng.uniform(-0.05, 0.05));
  }
  return out;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE_BEGIN("learn");

// ---- individual layers ----

TEST_CASE("conv2d matches a direct summation reference") {
  RngStream rng(301);
  DTensor in({2, 5, 6}), w({4, 2, 3, 3}), b({4});
  fill_rand(in, rng);
  fill_rand(w, rng);
  fill_rand(b, rng);
  DTensor out = learn::conv2d_forward(in, w, b);
  REQUIRE(out.shape == std::vector<int>{4, 5, 6});
  for (int co = 0; co < 4; ++co)
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 6; ++x) {
        double s = b[co];
        for (int ci = 0; ci < 2; ++ci)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int sy = y + ky - 1, sx = x + kx - 1;
              if (sy < 0 || sy >= 5 || sx < 0 || sx >= 6) continue;
              s += w[((int64_t(co) * 2 + ci) * 3 + ky) * 3 + kx] * in.at(ci, sy, sx);
            }
        REQUIRE(out.at(co, y, x) == doctest::Approx(s).epsilon(1e-12));
      }
}

TEST_CASE("conv2d with an identity kernel reproduces its input") {
  RngStream rng(302);
  DTensor in({2, 6, 7}), w({2, 2, 3, 3}), b({2});
  fill_rand(in, rng);
  for (int c = 0; c < 2; ++c) w[((int64_t(c) * 2 + c) * 3 + 1) * 3 + 1] = 1.0;
  b[0] = 0.25;
  DTensor out = learn::conv2d_forward(in, w, b);
  for (int c = 0; c < 2; ++c)
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 7; ++x)
        REQUIRE(out.at(c, y, x) == doctest::Approx(in.at(c, y, x) + (c == 0 ? 0.25 : 0.0)));
}

TEST_CASE("conv2d gradients agree with finite differences") {
  RngStream rng(303);
  DTensor in({2, 6, 7}), w({3, 2, 3, 3}), b({3}), r({3, 6, 7});
  fill_rand(in, rng);
  fill_rand(w, rng);
  fill_rand(b, rng);
  fill_rand(r, rng);
  auto loss = [&] { return weighted_sum(learn::conv2d_forward(in, w, b), r); };

  DTensor gin, gw(w.shape), gb(b.shape);
  learn::conv2d_backward(in, w, r, &gin, gw, gb);
  check_tensor_grad("conv.in", in, gin, loss, rng);
  check_tensor_grad("conv.w", w, gw, loss, rng);
  check_tensor_grad("conv.b", b, gb, loss, rng);
}

TEST_CASE("relu forward, gradient, and zero subgradient") {
  RngStream rng(304);
  DTensor in({2, 4, 5}), r({2, 4, 5});
  // Keep probes away from the kink so central differences are valid.
  for (auto& v : in.data) v = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.1, 1.0);
  fill_rand(r, rng);
  auto loss = [&] { return weighted_sum(learn::relu_forward(in), r); };
  DTensor gin = learn::relu_backward(in, r);
  check_tensor_grad("relu.in", in, gin, loss, rng);

  DTensor z({3});
  z[0] = -2.0;
  z[1] = 0.0;
  z[2] = 2.0;
  DTensor gz({3});
  gz.fill(1.0);
  DTensor back = learn::relu_backward(z, gz);
  CHECK(back[0] == 0.0);
  CHECK(back[1] == 0.0);  // subgradient at the kink
  CHECK(back[2] == 1.0);
}

TEST_CASE("maxpool picks block maxima and routes gradients to them") {
  // Distinct values with gaps far larger than the probe step.
  DTensor in({2, 6, 8});
  std::vector<double> vals(size_t(in.numel()));
  for (size_t i = 0; i < vals.size(); ++i) vals[i] = 0.013 * double(i);
  RngStream rng(305);
  for (size_t i = vals.size(); i > 1; --i) std::swap(vals[i - 1], vals[size_t(rng.uniform_int(0, int64_t(i) - 1))]);
  for (int64_t i = 0; i < in.numel(); ++i) in[i] = vals[size_t(i)];

  std::vector<int32_t> argmax;
  DTensor out = learn::maxpool2_forward(in, argmax);
  REQUIRE(out.shape == std::vector<int>{2, 3, 4});
  for (int c = 0; c < 2; ++c)
    for (int y = 0; y < 3; ++y)
      for (int x = 0; x < 4; ++x) {
        double best = std::max(std::max(in.at(c, 2 * y, 2 * x), in.at(c, 2 * y, 2 * x + 1)),
                               std::max(in.at(c, 2 * y + 1, 2 * x), in.at(c, 2 * y + 1, 2 * x + 1)));
        REQUIRE(out.at(c, y, x) == best);
      }

  DTensor r(out.shape);
  fill_rand(r, rng);
  auto loss = [&] {
    std::vector<int32_t> am;
    return weighted_sum(learn::maxpool2_forward(in, am), r);
  };
  DTensor gin = learn::maxpool2_backward(in.shape, argmax, r);
  check_tensor_grad("maxpool.in", in, gin, loss, rng);

  // Odd trailing rows and columns are dropped.
  DTensor odd({1, 5, 5});
  for (int64_t i = 0; i < odd.numel(); ++i) odd[i] = double(i);
  std::vector<int32_t> am2;
  DTensor pooled = learn::maxpool2_forward(odd, am2);
  CHECK(pooled.shape == std::vector<int>{1, 2, 2});
  CHECK(pooled.at(0, 1, 1) == odd.at(0, 3, 3));
}

TEST_CASE("global average pool and its gradient") {
  RngStream rng(306);
  DTensor in({3, 4, 5}), r({3});
  fill_rand(in, rng);
  fill_rand(r, rng);
  DTensor out = learn::gap_forward(in);
  for (int c = 0; c < 3; ++c) {
    double s = 0.0;
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 5; ++x) s += in.at(c, y, x);
    REQUIRE(out[c] == doctest::Approx(s / 20.0).epsilon(1e-12));
  }
  auto loss = [&] { return weighted_sum(learn::gap_forward(in), r); };
  DTensor gin = learn::gap_backward(in.shape, r);
  check_tensor_grad("gap.in", in, gin, loss, rng);
}

TEST_CASE("linear layer gradients agree with finite differences") {
  RngStream rng(307);
  DTensor in({7}), w({4, 7}), b({4}), r({4});
  fill_rand(in, rng);
  fill_rand(w, rng);
  fill_rand(b, rng);
  fill_rand(r, rng);
  auto loss = [&] { return weighted_sum(learn::linear_forward(in, w, b), r); };
  DTensor gin, gw(w.shape), gb(b.shape);
  learn::linear_backward(in, w, r, &gin, gw, gb);
  check_tensor_grad("linear.in", in, gin, loss, rng);
  check_tensor_grad("linear.w", w, gw, loss, rng);
  check_tensor_grad("linear.b", b, gb, loss, rng);

  DTensor bad({6});
  CHECK_THROWS_AS(learn::linear_forward(bad, w, b), ShapeMismatch);
}

TEST_CASE("sigmoid is stable at extreme inputs and differentiates cleanly") {
  CHECK(learn::sigmoid(0.0) == 0.5);
  CHECK(learn::sigmoid(800.0) == 1.0);
  CHECK(learn::sigmoid(-800.0) == 0.0);
  for (double z : {-4.0, -1.3, 0.0, 0.9, 3.7}) {
    const double ref = 1.0 / (1.0 + std::exp(-z));
    CHECK(learn::sigmoid(z) == doctest::Approx(ref).epsilon(1e-12));
  }

  RngStream rng(308);
  DTensor in({5}), r({5});
  fill_rand(in, rng, -3.0, 3.0);
  fill_rand(r, rng);
  auto loss = [&] { return weighted_sum(learn::sigmoid_forward(in), r); };
  DTensor out = learn::sigmoid_forward(in);
  DTensor gin = learn::sigmoid_backward(out, r);
  check_tensor_grad("sigmoid.in", in, gin, loss, rng);
}

TEST_CASE("logit-space cross entropy matches the textbook form") {
  for (double z : {-4.0, -0.7, 0.0, 1.2, 4.0}) {
    for (double y : {0.0, 1.0}) {
      const double p = 1.0 / (1.0 + std::exp(-z));
      const double ref = -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
      CHECK(learn::bce_with_logit(z, y) == doctest::Approx(ref).epsilon(1e-10));
      const double h = 1e-6;
      const double num =
          (learn::bce_with_logit(z + h, y) - learn::bce_with_logit(z - h, y)) / (2.0 * h);
      CHECK(learn::bce_with_logit_grad(z, y) == doctest::Approx(num).epsilon(1e-6));
    }
  }
  CHECK(learn::bce_with_logit(0.0, 1.0) == doctest::Approx(std::log(2.0)));
  CHECK(learn::bce_with_logit(800.0, 0.0) == doctest::Approx(800.0));
  CHECK(learn::bce_with_logit(-800.0, 1.0) == doctest::Approx(800.0));
  CHECK(std::isfinite(learn::bce_with_logit(700.0, 1.0)));
}

// ---- whole networks ----

TEST_CASE("modality names round-trip and feature widths add up") {
  for (auto m : learn::kAllModalities) {
    CHECK(learn::modality_from_name(learn::modality_name(m)) == m);
  }
  CHECK_THROWS_AS(learn::modality_from_name("holograph"), ConfigError);
  CHECK(learn::feature_width(learn::Modality::fusion) == 128);
  CHECK(learn::feature_width(learn::Modality::vision) == 64);
  CHECK(learn::feature_width(learn::Modality::vision_pose) == 80);
  CHECK(learn::feature_width(learn::Modality::depth) == 32);
  CHECK(learn::feature_width(learn::Modality::tactile_both) == 64);
  CHECK(learn::feature_width(learn::Modality::tactile_left) == 32);
  CHECK(learn::feature_width(learn::Modality::tactile_right) == 32);
}

TEST_CASE("every modality network passes a finite-difference gradient check") {
  int mi = 0;
  for (auto modality : learn::kAllModalities) {
    ++mi;
    CAPTURE(learn::modality_name(modality));
    auto rep = gltest::check_network_gradients(modality, 700 + uint64_t(mi));
    CAPTURE(rep.worst_param);
    CAPTURE(rep.skipped);
    CHECK(rep.complete);
    CHECK(rep.probes >= 5 * 10);  // at least head + one tower, five probes each
    CHECK(rep.worst_rel < 1e-4);
  }
}

TEST_CASE("initialization is seeded, bounded, and bias-free") {
  auto a = learn::build_model<float>(learn::Modality::fusion, 11);
  auto b = learn::build_model<float>(learn::Modality::fusion, 11);
  auto c = learn::build_model<float>(learn::Modality::fusion, 12);

  auto collect = [](learn::Model& m) {
    std::vector<std::pair<std::string, learn::Tensor*>> out;
    learn::visit_params(m, [&](const std::string& n, learn::Tensor& t) { out.emplace_back(n, &t); });
    return out;
  };
  auto pa = collect(a), pb = collect(b), pc = collect(c);
  bool any_diff = false;
  for (size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].second->data == pb[i].second->data);
    if (pa[i].second->data != pc[i].second->data) any_diff = true;
    if (pa[i].second->shape.size() == 1) {
      for (float v : pa[i].second->data) CHECK(v == 0.0f);
    } else {
      int64_t fan_in = 1;
      for (size_t d = 1; d < pa[i].second->shape.size(); ++d) fan_in *= pa[i].second->shape[d];
      const double bound = pa[i].first == "head.w2" ? 1.0 / double(fan_in)
                                                    : 1.0 / std::sqrt(double(fan_in));
      float biggest = 0.0f;
      for (float v : pa[i].second->data) biggest = std::max(biggest, std::fabs(v));
      CHECK(biggest <= float(bound) + 1e-7f);
      CHECK(biggest > 0.0f);
    }
  }
  CHECK(any_diff);
}

TEST_CASE("untrained networks sit near even odds") {
  auto examples = synth_set(8, 41);
  const double ln2 = std::log(2.0);
  for (auto modality : {learn::Modality::vision, learn::Modality::fusion,
                        learn::Modality::tactile_both, learn::Modality::depth,
                        learn::Modality::vision_pose}) {
    CAPTURE(learn::modality_name(modality));
    auto m = learn::build_model<float>(modality, 3);
    m.stats = learn::compute_stats(examples, learn::modality_uses(modality));
    double bce = 0.0;
    for (const auto& ex : examples) {
      const double p = learn::predict(m, ex);
      CHECK(p > 0.3);
      CHECK(p < 0.7);
      bce += ex.label ? -std::log(p) : -std::log(1.0 - p);
    }
    bce /= double(examples.size());
    CHECK(bce > ln2 - 0.15);
    CHECK(bce < ln2 + 0.15);
  }
}

// ---- input preparation ----

TEST_CASE("crop, flip, and standardization compose as documented") {
  learn::Tensor t({3, 5, 6});
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 6; ++x) t.at(c, y, x) = float(c * 100 + y * 10 + x);

  auto crop = learn::crop_chw(t, 1, 2, 3, 4);
  REQUIRE(crop.shape == std::vector<int>{3, 3, 4});
  CHECK(crop.at(2, 0, 0) == t.at(2, 1, 2));
  CHECK(crop.at(0, 2, 3) == t.at(0, 3, 5));
  CHECK_THROWS_AS(learn::crop_chw(t, 3, 3, 3, 4), ShapeMismatch);

  auto flipped = learn::hflip_chw(crop);
  CHECK(flipped.at(1, 0, 0) == crop.at(1, 0, 3));
  auto twice = learn::hflip_chw(flipped);
  CHECK(twice.data == crop.data);

  learn::ChannelStats cs;
  cs.mean = {1.0, 2.0, 3.0};
  cs.stdev = {2.0, 4.0, 8.0};
  auto prepped = learn::prep_input(t, 1, 2, 3, 4, true, cs);
  REQUIRE(prepped.shape == std::vector<int>{3, 3, 4});
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 3; ++y)
      for (int x = 0; x < 4; ++x) {
        const float expect = float((flipped.at(c, y, x) - cs.mean[c]) / cs.stdev[c]);
        REQUIRE(prepped.at(c, y, x) == doctest::Approx(expect).epsilon(1e-6));
      }
}

TEST_CASE("evaluation inputs use the centre crop") {
  auto ex = synth_example(90, true);
  auto m = learn::build_model<float>(learn::Modality::fusion, 4);
  m.stats = learn::compute_stats({ex}, learn::modality_uses(learn::Modality::fusion));
  auto in = learn::eval_input(m, ex);
  REQUIRE(in.rgb_a.shape == std::vector<int>{3, 64, 64});
  REQUIRE(in.tdiff_l.shape == std::vector<int>{3, 48, 64});
  CHECK(in.depth.numel() == 0);  // not part of this modality

  auto expect = [](float v, double mean, double stdev) { return float((v - mean) / stdev); };
  CHECK(in.rgb_a.at(0, 0, 0) ==
        doctest::Approx(expect(ex.rgb_a.at(0, 4, 4), m.stats.rgb.mean[0], m.stats.rgb.stdev[0])));
  CHECK(in.rgb_b.at(2, 63, 63) == doctest::Approx(expect(ex.rgb_b.at(2, 67, 67),
                                                         m.stats.rgb.mean[2], m.stats.rgb.stdev[2])));
  CHECK(in.tdiff_l.at(1, 0, 0) == doctest::Approx(expect(ex.tdiff_l.at(1, 3, 4),
                                                         m.stats.tdiff.mean[1], m.stats.tdiff.stdev[1])));

  auto md = learn::build_model<float>(learn::Modality::depth, 4);
  md.stats = learn::compute_stats({ex}, learn::modality_uses(learn::Modality::depth));
  auto ind = learn::eval_input(md, ex);
  REQUIRE(ind.depth.shape == std::vector<int>{3, 64, 64});
  CHECK(ind.depth.at(0, 10, 11) == doctest::Approx(expect(ex.depth_b.at(0, 14, 15),
                                                          md.stats.depth.mean[0],
                                                          md.stats.depth.stdev[0])));

  // Same example, same tensors, every time.
  auto in2 = learn::eval_input(m, ex);
  CHECK(in.rgb_a.data == in2.rgb_a.data);
  CHECK(in.tdiff_r.data == in2.tdiff_r.data);
}

TEST_CASE("normalization stats have exact means and floored deviations") {
  learn::Example a = synth_example(1, true), b = synth_example(2, false);
  a.rgb_a.fill(0.3f);
  a.rgb_b.fill(0.3f);
  b.rgb_a.fill(0.3f);
  b.rgb_b.fill(0.3f);
  a.theta = {1, 2, 3, 4, 5};
  b.theta = {1, 2, 3, 4, 5};
  learn::ModalityUses uses;
  uses.rgb = true;
  uses.pose = true;
  auto stats = learn::compute_stats({a, b}, uses);
  for (int c = 0; c < 3; ++c) {
    CHECK(stats.rgb.mean[c] == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(stats.rgb.stdev[c] == 1e-3);
  }
  for (int i = 0; i < 5; ++i) {
    CHECK(stats.theta_mean[i] == doctest::Approx(double(i + 1)));
    CHECK(stats.theta_std[i] == 1e-6);
  }
}

// ---- checkpoints ----

TEST_CASE("checkpoints reload bit for bit and resave identically") {
  for (auto modality : {learn::Modality::fusion, learn::Modality::vision_pose}) {
    CAPTURE(learn::modality_name(modality));
    auto examples = synth_set(4, 77);
    auto m = learn::build_model<float>(modality, 5);
    m.stats = learn::compute_stats(examples, learn::modality_uses(modality));
    m.config.epochs = 7;
    m.config.seed = 123;

    const std::string p1 = "/tmp/gl_model_a.bin", p2 = "/tmp/gl_model_b.bin";
    learn::save_model(m, p1);
    learn::Model r = learn::load_model(p1);
    CHECK(r.modality == m.modality);
    CHECK(r.seed == m.seed);
    CHECK(r.config.epochs == 7);
    CHECK(r.config.seed == 123);
    for (int c = 0; c < 3; ++c) {
      CHECK(r.stats.rgb.mean[c] == m.stats.rgb.mean[c]);
      CHECK(r.stats.tdiff.stdev[c] == m.stats.tdiff.stdev[c]);
    }
    for (int i = 0; i < 5; ++i) CHECK(r.stats.theta_mean[i] == m.stats.theta_mean[i]);

    std::vector<learn::Tensor*> pm, pr;
    learn::visit_params(m, [&](const std::string&, learn::Tensor& t) { pm.push_back(&t); });
    learn::visit_params(r, [&](const std::string&, learn::Tensor& t) { pr.push_back(&t); });
    REQUIRE(pm.size() == pr.size());
    for (size_t i = 0; i < pm.size(); ++i) {
      REQUIRE(pm[i]->shape == pr[i]->shape);
      REQUIRE(pm[i]->data == pr[i]->data);
    }

    learn::save_model(r, p2);
    CHECK(read_bytes(p1) == read_bytes(p2));

    const double before = learn::predict(m, examples[0]);
    const double after = learn::predict(r, examples[0]);
    CHECK(before == after);
    std::remove(p1.c_str());
    std::remove(p2.c_str());
  }
}

TEST_CASE("corrupt checkpoints are rejected") {
  auto m = learn::build_model<float>(learn::Modality::depth, 8);
  const std::string path = "/tmp/gl_model_corrupt.bin";
  learn::save_model(m, path);
  std::string bytes = read_bytes(path);

  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes.substr(0, 64);
  }
  CHECK_THROWS_AS(learn::load_model(path), FormatError);

  {
    std::string bad = bytes;
    bad[0] = 'X';
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bad;
  }
  CHECK_THROWS_AS(learn::load_model(path), FormatError);

  {
    std::string extra = bytes + "tail";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << extra;
  }
  CHECK_THROWS_AS(learn::load_model(path), FormatError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(learn::load_model(path), IoError);
}

// ---- training ----

TEST_CASE("training fits a separable tactile rule") {
  auto data = separable_set(48, 13);
  learn::TrainConfig cfg;
  cfg.epochs = 6;
  cfg.lr = 1e-3;
  cfg.lr_late = 3e-4;
  cfg.batch = 8;
  cfg.seed = 9;
  learn::TrainStats stats;
  auto m = learn::train(data, learn::Modality::tactile_left, cfg, &stats);
  CHECK(m.modality == learn::Modality::tactile_left);
  CHECK(m.config.epochs == 6);
  CHECK(stats.epoch_loss.size() == 6);
  CHECK(stats.last_epoch_loss < stats.first_epoch_loss);
  CHECK(m.stats.tdiff.mean[0] > 0.2);

  auto metrics = learn::evaluate_model(m, data);
  CHECK(metrics.total == 48);
  CHECK(metrics.accuracy >= 0.9);
}

TEST_CASE("training is deterministic for a fixed seed") {
  auto data = separable_set(16, 14);
  learn::TrainConfig cfg;
  cfg.epochs = 2;
  cfg.lr = 5e-4;
  cfg.lr_late = 5e-4;
  cfg.batch = 4;
  cfg.seed = 21;
  auto a = learn::train(data, learn::Modality::tactile_left, cfg);
  auto b = learn::train(data, learn::Modality::tactile_left, cfg);
  std::vector<learn::Tensor*> pa, pb;
  learn::visit_params(a, [&](const std::string&, learn::Tensor& t) { pa.push_back(&t); });
  learn::visit_params(b, [&](const std::string&, learn::Tensor& t) { pb.push_back(&t); });
  for (size_t i = 0; i < pa.size(); ++i) REQUIRE(pa[i]->data == pb[i]->data);
  CHECK(learn::predict(a, data[0]) == learn::predict(b, data[0]));
}

TEST_CASE("training refuses single-class labels") {
  auto data = synth_set(6, 15);
  for (auto& e : data) e.label = true;
  learn::TrainConfig cfg;
  cfg.epochs = 1;
  CHECK_THROWS_AS(learn::train(data, learn::Modality::tactile_left, cfg), DegenerateLabels);
}

TEST_CASE("predictions depend only on the streams the modality reads") {
  auto ex = synth_example(55, true);
  auto examples = synth_set(4, 56);

  auto tac = learn::build_model<float>(learn::Modality::tactile_left, 6);
  tac.stats = learn::compute_stats(examples, learn::modality_uses(learn::Modality::tactile_left));
  const double p0 = learn::predict(tac, ex);
  learn::Example tweaked = ex;
  tweaked.rgb_a.fill(0.9f);
  tweaked.rgb_b.fill(0.1f);
  tweaked.depth_b.fill(33.0f);
  tweaked.tdiff_r.fill(0.8f);
  tweaked.theta = {9, 9, 9, 1, 7};
  CHECK(learn::predict(tac, tweaked) == p0);
  tweaked.tdiff_l.fill(0.8f);
  CHECK(learn::predict(tac, tweaked) != p0);

  auto vis = learn::build_model<float>(learn::Modality::vision, 6);
  vis.stats = learn::compute_stats(examples, learn::modality_uses(learn::Modality::vision));
  const double v0 = learn::predict(vis, ex);
  learn::Example tweaked2 = ex;
  tweaked2.tdiff_l.fill(0.2f);
  tweaked2.tdiff_r.fill(0.9f);
  CHECK(learn::predict(vis, tweaked2) == v0);
}

TEST_CASE("prediction validates the shapes it consumes") {
  auto ex = synth_example(57, false);
  auto m = learn::build_model<float>(learn::Modality::tactile_left, 6);
  m.stats = learn::compute_stats({ex}, learn::modality_uses(learn::Modality::tactile_left));
  learn::Example bad = ex;
  bad.tdiff_l = learn::Tensor({3, 54, 71});
  CHECK_THROWS_AS(learn::predict(m, bad), ShapeMismatch);
  learn::Example harmless = ex;
  harmless.rgb_a = learn::Tensor({1});  // unused stream, never touched
  CHECK(learn::predict(m, harmless) == learn::predict(m, ex));
}

// ---- evaluation and baselines ----

TEST_CASE("an exactly even score counts as a negative prediction") {
  auto m = learn::make_model<float>(learn::Modality::vision);  // all-zero weights
  auto data = synth_set(5, 60);
  data[0].label = data[1].label = data[2].label = true;
  data[3].label = data[4].label = false;
  auto metrics = learn::evaluate_model(m, data);
  CHECK(metrics.tp == 0);
  CHECK(metrics.fp == 0);
  CHECK(metrics.tn == 2);
  CHECK(metrics.fn == 3);
  CHECK(metrics.accuracy == doctest::Approx(0.4));
  CHECK(metrics.positive_rate == doctest::Approx(0.6));
  CHECK_THROWS_AS(learn::evaluate_model(m, {}), EmptySplit);
}

TEST_CASE("the chance baseline scores the majority training label") {
  auto mk = [](bool label) {
    learn::Example e;
    e.label = label;
    return e;
  };
  std::vector<learn::Example> train = {mk(true), mk(true), mk(false)};
  std::vector<learn::Example> test = {mk(true), mk(false)};
  CHECK(learn::chance_accuracy(train, test) == doctest::Approx(0.5));

  std::vector<learn::Example> tied = {mk(true), mk(false)};  // tie resolves negative
  std::vector<learn::Example> test2 = {mk(true), mk(false), mk(false)};
  CHECK(learn::chance_accuracy(tied, test2) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("the linear SVM separates what is separable") {
  std::vector<std::vector<double>> feats = {{2, 1},   {1, 2},   {3, 0.5},
                                            {-2, -1}, {-1, -2}, {-0.5, -3}};
  std::vector<bool> labels = {true, true, true, false, false, false};
  auto m = learn::train_linear_svm(feats, labels);
  for (size_t i = 0; i < feats.size(); ++i) CHECK(learn::predict_svm(m, feats[i]) == labels[i]);

  std::vector<bool> flipped;
  for (bool b : labels) flipped.push_back(!b);
  auto m2 = learn::train_linear_svm(feats, flipped);
  for (size_t i = 0; i < feats.size(); ++i) CHECK(learn::predict_svm(m2, feats[i]) == flipped[i]);

  // Standardization makes a large common offset irrelevant.
  auto shifted = feats;
  for (auto& f : shifted) f[0] += 1e6;
  auto m3 = learn::train_linear_svm(shifted, labels);
  for (size_t i = 0; i < shifted.size(); ++i) CHECK(learn::predict_svm(m3, shifted[i]) == labels[i]);

  CHECK_THROWS_AS(learn::train_linear_svm(feats, std::vector<bool>(6, true)), DegenerateLabels);
  auto ragged = feats;
  ragged[3].push_back(0.0);
  CHECK_THROWS_AS(learn::train_linear_svm(ragged, labels), ShapeMismatch);
}

TEST_CASE("indentation features measure the gel change per sensor") {
  trials::TrialFrames f;
  f.tac_left_a = sensors::make_frame(sensors::FrameKind::tactile, 72, 54, sensors::SnapTag::Ta, 0.5f);
  f.tac_left_b = sensors::make_frame(sensors::FrameKind::tactile, 72, 54, sensors::SnapTag::Tb, 0.5f);
  f.tac_right_a = sensors::make_frame(sensors::FrameKind::tactile, 72, 54, sensors::SnapTag::Ta, 0.5f);
  f.tac_right_b = sensors::make_frame(sensors::FrameKind::tactile, 72, 54, sensors::SnapTag::Tb, 0.5f);
  f.tac_left_b.at(20, 10, 1) += 0.3f;
  auto [left, right] = learn::indentation_features(f);
  CHECK(left == doctest::Approx(0.3 / (72.0 * 54.0 * 3.0)).epsilon(1e-5));
  CHECK(right == 0.0);
}

TEST_CASE("examples are assembled from the raw frames") {
  RngStream rng(61);
  trials::TrialFrames f;
  auto fill = [&](sensors::FrameKind kind, int w, int h, sensors::SnapTag tag, double hi) {
    auto frame = sensors::make_frame(kind, w, h, tag);
    for (auto& v : frame.data) v = float(rng.uniform(0.0, hi));
    return frame;
  };
  f.rgb_a = fill(sensors::FrameKind::rgb, 72, 72, sensors::SnapTag::Ta, 1.0);
  f.rgb_b = fill(sensors::FrameKind::rgb, 72, 72, sensors::SnapTag::Tb, 1.0);
  f.depth_b = fill(sensors::FrameKind::depth, 72, 72, sensors::SnapTag::Tb, 60.0);
  f.tac_left_a = fill(sensors::FrameKind::tactile, 72, 54, sensors::SnapTag::Ta, 1.0);
  f.tac_left_b = fill(sensors::FrameKind::tactile, 72, 54, sensors::SnapTag::Tb, 1.0);
  f.tac_right_a = fill(sensors::FrameKind::tactile, 72, 54, sensors::SnapTag::Ta, 1.0);
  f.tac_right_b = fill(sensors::FrameKind::tactile, 72, 54, sensors::SnapTag::Tb, 1.0);

  world::GraspParams params{1.0, 2.0, 3.0, 0.7, 4.0};
  auto ex = learn::make_example(f, params, true);
  CHECK(ex.label);
  CHECK(ex.theta == std::array<double, 5>{1.0, 2.0, 3.0, 0.7, 4.0});
  REQUIRE(ex.rgb_a.shape == std::vector<int>{3, 72, 72});
  CHECK(ex.rgb_a.at(1, 7, 9) == f.rgb_a.at(7, 9, 1));
  REQUIRE(ex.depth_b.shape == std::vector<int>{3, 72, 72});
  CHECK(ex.depth_b.at(0, 5, 6) == f.depth_b.at(5, 6, 0));
  CHECK(ex.depth_b.at(1, 5, 6) == ex.depth_b.at(0, 5, 6));
  CHECK(ex.depth_b.at(2, 5, 6) == ex.depth_b.at(0, 5, 6));

  auto td = sensors::temporal_difference(f.tac_left_b, f.tac_left_a);
  auto expect = learn::frame_to_chw(td);
  CHECK(ex.tdiff_l.data == expect.data);
  CHECK(ex.indentation[0] ==
        doctest::Approx(sensors::mean_abs_diff(f.tac_left_b, f.tac_left_a)).epsilon(1e-12));
}

TEST_CASE("loading examples materializes only the requested streams") {
  auto ctx = trials::make_trial_context(4, 0.5, 8.0, false);
  std::vector<world::ObjectModel> objects;
  std::vector<trials::TrialRecord> records;
  for (int k = 0; k < 2; ++k) {
    auto obj = world::generate_object(hash_u64(31, uint64_t(k)),
                                      k == 0 ? world::ObjectFamily::box
                                             : world::ObjectFamily::cylinder_like);
    objects.push_back(obj);
    auto scene = world::place_object(obj, hash_u64(32, uint64_t(k)), {-100, -100, 100, 100});
    for (int i = 0; i < 2; ++i) {
      records.push_back(trials::run_trial(scene, k * 2 + i, hash_u64(33, uint64_t(k * 2 + i)), ctx));
    }
  }
  const std::string dir = "/tmp/gl_learn_ds";
  fs::remove_all(dir);
  trials::DatasetSetup setup;
  setup.sensor_seed = 4;
  setup.noise = false;
  trials::write_dataset(records, objects, setup, dir);
  auto manifest = trials::read_dataset(dir);

  learn::ModalityUses everything{true, true, true, true, true};
  auto full = learn::load_examples(manifest, {}, everything);
  REQUIRE(full.size() == records.size());
  for (size_t i = 0; i < full.size(); ++i) {
    CHECK(full[i].label == records[i].label);
    CHECK(full[i].theta[3] == records[i].params.phi);
    REQUIRE(full[i].rgb_a.shape == std::vector<int>{3, 72, 72});
    REQUIRE(full[i].tdiff_l.shape == std::vector<int>{3, 54, 72});
    REQUIRE(full[i].depth_b.shape == std::vector<int>{3, 72, 72});
  }

  learn::ModalityUses tac_only;
  tac_only.tactile_l = true;
  tac_only.tactile_r = true;
  auto slim = learn::load_examples(manifest, {}, tac_only);
  REQUIRE(slim.size() == full.size());
  for (size_t i = 0; i < slim.size(); ++i) {
    CHECK(slim[i].rgb_a.numel() == 0);
    CHECK(slim[i].depth_b.numel() == 0);
    CHECK(slim[i].tdiff_l.data == full[i].tdiff_l.data);
    CHECK(slim[i].indentation == full[i].indentation);
  }

  auto filtered = learn::load_examples(manifest, {objects[1].object_id}, tac_only);
  CHECK(filtered.size() == 2);
  fs::remove_all(dir);
}

TEST_SUITE_END();
