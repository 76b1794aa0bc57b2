#include "core/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace grasplab::sensors {

namespace {

float clamp01(double v) { return float(v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v)); }

geom::Vec2 inverse_apply(const geom::Transform2& t, geom::Vec2 p) {
  const double c = std::cos(t.rot), s = std::sin(t.rot);
  const geom::Vec2 r = p - t.translation;
  return {c * r.x + s * r.y, -s * r.x + c * r.y};
}

struct JawFaces {
  geom::Vec2 u_hat, n_hat;
  double s_left, s_right;
  bool touching;
};

// Where the closed jaws ended up: at the contact faces, or 2 mm apart around
// the gripper centre when the closure caught nothing.
JawFaces jaw_faces(const world::Scene& scene, const world::GraspParams& params,
                   const oracle::PhysicsConfig& physics) {
  JawFaces f;
  f.u_hat = {std::cos(params.phi), std::sin(params.phi)};
  f.n_hat = {-f.u_hat.y, f.u_hat.x};
  const auto contacts = oracle::compute_contacts(scene, params, physics);
  f.touching = contacts.left.has_value() && contacts.right.has_value();
  if (f.touching) {
    const geom::Vec2 ee{params.ee_x, params.ee_y};
    f.s_left = dot(geom::Vec2{contacts.left->centroid.x, contacts.left->centroid.y} - ee, f.n_hat);
    f.s_right =
        dot(geom::Vec2{contacts.right->centroid.x, contacts.right->centroid.y} - ee, f.n_hat);
  } else {
    f.s_left = -2.0;
    f.s_right = 2.0;
  }
  return f;
}

// y-measure of the footprint chord at x = x0 (front-view thickness).
double chord_at(const geom::Polygon& poly, double x0) {
  std::vector<double> ys;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const geom::Vec2& p = poly[i];
    const geom::Vec2& q = poly[(i + 1) % n];
    if ((p.x - x0) * (q.x - x0) >= 0.0) continue;
    const double t = (x0 - p.x) / (q.x - p.x);
    ys.push_back(p.y + t * (q.y - p.y));
  }
  std::sort(ys.begin(), ys.end());
  double len = 0.0;
  for (size_t i = 0; i + 1 < ys.size(); i += 2) len += ys[i + 1] - ys[i];
  return len;
}

struct XSpan {
  double lo, hi;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

XSpan finger_xspan(const geom::Vec2& ee, const JawFaces& f, double half_w, double s0, double s1) {
  XSpan span{1e18, -1e18};
  for (double u : {-half_w, half_w}) {
    for (double s : {s0, s1}) {
      const double x = ee.x + f.u_hat.x * u + f.n_hat.x * s;
      span.lo = std::min(span.lo, x);
      span.hi = std::max(span.hi, x);
    }
  }
  return span;
}

geom::Polygon finger_quad(const geom::Vec2& ee, const JawFaces& f, double half_w, double s0,
                          double s1) {
  geom::Polygon q{ee + f.u_hat * -half_w + f.n_hat * s0, ee + f.u_hat * half_w + f.n_hat * s0,
                  ee + f.u_hat * half_w + f.n_hat * s1, ee + f.u_hat * -half_w + f.n_hat * s1};
  if (geom::signed_area(q) < 0.0) std::reverse(q.begin(), q.end());
  return q;
}

// Object-fixed texture phase so the pattern travels with the pose.
struct TextureField {
  double ax, ay;  // wave direction in object coords
  double ph1, ph2;
  double wavelength;

  double bump(geom::Vec2 obj_xy, double z) const {
    const double w = 2.0 * geom::kPi / wavelength;
    return std::sin(w * (obj_xy.x * ax + obj_xy.y * ay) + ph1) * std::sin(w * z + ph2);
  }
};

TextureField make_texture(const world::ObjectModel& obj, double base_wavelength) {
  RngStream rng(hash_str(0x746578ULL, obj.object_id), "texture", 0);
  TextureField t;
  const double alpha = rng.uniform(0.0, geom::kPi);
  t.ax = std::cos(alpha);
  t.ay = std::sin(alpha);
  t.ph1 = rng.uniform(0.0, 2.0 * geom::kPi);
  t.ph2 = rng.uniform(0.0, 2.0 * geom::kPi);
  t.wavelength = base_wavelength * rng.uniform(0.8, 1.25);
  return t;
}

void blur_heightmap(std::vector<double>& h, int w, int ht, double sigma_px) {
  const int r = std::max(1, int(std::ceil(3.0 * sigma_px)));
  std::vector<double> k(2 * r + 1);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) sum += k[i + r] = std::exp(-0.5 * (i * i) / (sigma_px * sigma_px));
  for (auto& v : k) v /= sum;

  std::vector<double> tmp(h.size());
  auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
  for (int y = 0; y < ht; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * h[size_t(y) * w + clampi(x + i, w - 1)];
      tmp[size_t(y) * w + x] = acc;
    }
  for (int y = 0; y < ht; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp[size_t(clampi(y + i, ht - 1)) * w + x];
      h[size_t(y) * w + x] = acc;
    }
}

}  // namespace

GelConfig make_gel_config(oracle::Jaw side, uint64_t seed) {
  RngStream rng(seed, side == oracle::Jaw::left ? "gel_left" : "gel_right", 0);
  GelConfig g;
  g.base_level = float(0.44 + 0.08 * rng.uniform());
  g.shade_gain = float(0.50 + 0.12 * rng.uniform());
  const double az0 = rng.uniform(0.0, 2.0 * geom::kPi);
  const double el = rng.uniform(35.0, 45.0) * geom::kPi / 180.0;
  for (int i = 0; i < 3; ++i) {
    const double az = az0 + i * 2.0 * geom::kPi / 3.0;
    g.lights[i] = {std::cos(az) * std::cos(el), std::sin(az) * std::cos(el), std::sin(el)};
  }
  return g;
}

SensorConfig make_sensor_config(uint64_t seed) {
  SensorConfig cfg;
  cfg.gel_left = make_gel_config(oracle::Jaw::left, hash_u64(seed, 1));
  cfg.gel_right = make_gel_config(oracle::Jaw::right, hash_u64(seed, 2));
  return cfg;
}

SensorFrame render_camera(const world::Scene& scene, const world::GraspParams* gripper,
                          const SensorConfig& cfg, SnapTag tag) {
  const FrontView& view = cfg.camera;
  SensorFrame f = make_frame(FrameKind::rgb, view.width, view.height, tag);

  const geom::Polygon fp = scene.world_footprint();
  auto xext = geom::projected_extent(fp, {1.0, 0.0});
  const double height = scene.object.height;
  const auto& alb = scene.object.material.albedo;

  std::vector<double> thick(size_t(view.width), 0.0);
  double max_thick = 0.0;
  for (int col = 0; col < view.width; ++col) {
    thick[col] = chord_at(fp, view.x_at(col));
    max_thick = std::max(max_thick, thick[col]);
  }

  for (int row = 0; row < view.height; ++row) {
    const double z = view.z_at(row);
    for (int col = 0; col < view.width; ++col) {
      const double x = view.x_at(col);
      const float* base = z < 0.0 ? cfg.table_color.data() : cfg.background.data();
      float px[3] = {base[0], base[1], base[2]};
      if (xext && z >= 0.0 && z < height && x >= xext->first && x <= xext->second) {
        const double tn = max_thick > 0.0 ? thick[size_t(col)] / max_thick : 0.0;
        const double shade = 0.35 + 0.40 * (z / height) + 0.25 * tn;
        for (int c = 0; c < 3; ++c) px[c] = clamp01(alb[c] * shade);
      }
      for (int c = 0; c < 3; ++c) f.at(row, col, c) = px[c];
    }
  }

  if (gripper) {
    const JawFaces jf = jaw_faces(scene, *gripper, cfg.physics);
    const geom::Vec2 ee{gripper->ee_x, gripper->ee_y};
    const double half_w = cfg.physics.jaw_width / 2.0;
    const double fl = cfg.physics.finger_length;
    const XSpan left = finger_xspan(ee, jf, half_w, jf.s_left - 4.0, jf.s_left);
    const XSpan right = finger_xspan(ee, jf, half_w, jf.s_right, jf.s_right + 4.0);
    const XSpan palm{std::min(left.lo, right.lo), std::max(left.hi, right.hi)};
    const double z0 = gripper->ee_z;

    for (int row = 0; row < view.height; ++row) {
      const double z = view.z_at(row);
      for (int col = 0; col < view.width; ++col) {
        const double x = view.x_at(col);
        double shade = 0.0;
        if (z >= z0 && z < z0 + fl && (left.contains(x) || right.contains(x)))
          shade = left.contains(x) ? 0.9 : 1.0;
        else if (z >= z0 + fl && z < z0 + fl + 6.0 && palm.contains(x))
          shade = 0.7;
        if (shade > 0.0)
          for (int c = 0; c < 3; ++c) f.at(row, col, c) = clamp01(cfg.gripper_color[c] * shade);
      }
    }
  }
  return f;
}

SensorFrame render_depth(const world::Scene& scene, const world::GraspParams* gripper,
                         const SensorConfig& cfg, SnapTag tag) {
  const TopdownView& view = cfg.topdown;
  SensorFrame f = make_frame(FrameKind::depth, view.px, view.px, tag);
  const geom::Polygon fp = scene.world_footprint();

  geom::Polygon left_q, right_q;
  double finger_top = 0.0;
  if (gripper) {
    const JawFaces jf = jaw_faces(scene, *gripper, cfg.physics);
    const geom::Vec2 ee{gripper->ee_x, gripper->ee_y};
    const double half_w = cfg.physics.jaw_width / 2.0;
    left_q = finger_quad(ee, jf, half_w, jf.s_left - 4.0, jf.s_left);
    right_q = finger_quad(ee, jf, half_w, jf.s_right, jf.s_right + 4.0);
    finger_top = gripper->ee_z + cfg.physics.finger_length;
  }

  for (int row = 0; row < view.px; ++row) {
    for (int col = 0; col < view.px; ++col) {
      const geom::Vec2 p = view.pixel_center(row, col);
      double h = 0.0;
      if (geom::point_in_polygon(p, fp)) h = scene.object.height;
      if (gripper && (geom::point_in_polygon(p, left_q) || geom::point_in_polygon(p, right_q)))
        h = std::max(h, finger_top);
      f.at(row, col, 0) = float(h);
    }
  }
  return f;
}

SensorFrame unloaded_gel(const GelConfig& gel, SnapTag tag) {
  return make_frame(FrameKind::tactile, gel.width, gel.height, tag, gel.base_level);
}

SensorFrame render_tactile(const world::Scene& scene, const world::GraspParams& params,
                           const oracle::ContactSet& contacts, oracle::Jaw side,
                           const GelConfig& gel, SnapTag tag) {
  const auto& patch = side == oracle::Jaw::left ? contacts.left : contacts.right;
  if (!patch) return unloaded_gel(gel, tag);

  const geom::Vec2 u_hat{std::cos(params.phi), std::sin(params.phi)};
  const geom::Vec2 n_hat{-u_hat.y, u_hat.x};
  const geom::Vec2 ee{params.ee_x, params.ee_y};
  const double s_face =
      dot(geom::Vec2{patch->centroid.x, patch->centroid.y} - ee, n_hat);
  const TextureField tex = make_texture(scene.object, gel.bump_wavelength);
  const double amp = scene.object.material.texture_amplitude;

  const int w = gel.width, ht = gel.height;
  const double mpp = gel.pad_width / w;
  std::vector<double> hmap(size_t(w) * ht, 0.0);
  for (int row = 0; row < ht; ++row) {
    const double z = params.ee_z + gel.pad_height - (row + 0.5) * gel.pad_height / ht;
    if (z >= scene.object.height || z < 0.0) continue;
    for (int col = 0; col < w; ++col) {
      // The left sensor views the object from the opposite side: mirror u.
      const double u = side == oracle::Jaw::right
                           ? -gel.pad_width / 2.0 + (col + 0.5) * mpp
                           : gel.pad_width / 2.0 - (col + 0.5) * mpp;
      if (u < patch->u_lo || u > patch->u_hi) continue;
      const geom::Vec2 world = ee + u_hat * u + n_hat * s_face;
      const geom::Vec2 obj = inverse_apply(scene.pose, world);
      const double h = patch->penetration + 0.5 * amp * tex.bump(obj, z);
      hmap[size_t(row) * w + col] = std::max(0.0, h);
    }
  }

  blur_heightmap(hmap, w, ht, gel.sigma_mm / mpp);

  SensorFrame f = make_frame(FrameKind::tactile, w, ht, tag);
  auto hat = [&](int y, int x) { return hmap[size_t(y) * w + x]; };
  for (int row = 0; row < ht; ++row) {
    for (int col = 0; col < w; ++col) {
      double gx, gy;
      if (col == 0) gx = (hat(row, 1) - hat(row, 0)) / mpp;
      else if (col == w - 1) gx = (hat(row, col) - hat(row, col - 1)) / mpp;
      else gx = (hat(row, col + 1) - hat(row, col - 1)) / (2.0 * mpp);
      if (row == 0) gy = (hat(1, col) - hat(0, col)) / mpp;
      else if (row == ht - 1) gy = (hat(row, col) - hat(row - 1, col)) / mpp;
      else gy = (hat(row + 1, col) - hat(row - 1, col)) / (2.0 * mpp);

      const double inv = 1.0 / std::sqrt(gx * gx + gy * gy + 1.0);
      const geom::Vec3 n{-gx * inv, -gy * inv, inv};
      for (int c = 0; c < 3; ++c) {
        const auto& L = gel.lights[c];
        const double lit = std::max(0.0, dot(n, L)) - std::max(0.0, L.z);
        f.at(row, col, c) = clamp01(gel.base_level + gel.shade_gain * lit);
      }
    }
  }
  return f;
}

SensorFrame temporal_difference(const SensorFrame& after, const SensorFrame& before) {
  if (after.width != before.width || after.height != before.height ||
      after.channels != before.channels || after.kind != before.kind) {
    throw ShapeMismatch("temporal_difference: frame shapes differ");
  }
  SensorFrame out = after;
  for (size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = clamp01(0.5 + 0.5 * (double(after.data[i]) - double(before.data[i])));
  return out;
}

}  // namespace grasplab::sensors
