#include "core/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace grasplab::oracle {

namespace {

uint64_t mix_double(uint64_t h, double v) {
  // -0.0 and 0.0 hash alike so checksums survive sign-of-zero noise.
  if (v == 0.0) v = 0.0;
  return hash_u64(h, std::bit_cast<uint64_t>(v));
}

constexpr double kBig = 1e18;

}  // namespace

const char* failure_mode_name(FailureMode mode) {
  switch (mode) {
    case FailureMode::none: return "none";
    case FailureMode::empty_grasp: return "empty_grasp";
    case FailureMode::vertical_slip: return "vertical_slip";
    case FailureMode::rotational_slip: return "rotational_slip";
  }
  return "?";
}

FailureMode failure_mode_from_name(const std::string& name) {
  if (name == "none") return FailureMode::none;
  if (name == "empty_grasp") return FailureMode::empty_grasp;
  if (name == "vertical_slip") return FailureMode::vertical_slip;
  if (name == "rotational_slip") return FailureMode::rotational_slip;
  throw FormatError("unknown failure mode '" + name + "'");
}

uint64_t grasp_checksum(const world::Scene& scene, const world::GraspParams& params) {
  uint64_t h = hash_str(0x67726173706c6162ULL, scene.object.object_id);
  h = mix_double(h, scene.pose.translation.x);
  h = mix_double(h, scene.pose.translation.y);
  h = mix_double(h, scene.pose.rot);
  h = mix_double(h, params.ee_x);
  h = mix_double(h, params.ee_y);
  h = mix_double(h, params.ee_z);
  h = mix_double(h, params.phi);
  h = mix_double(h, params.force);
  return h;
}

ContactSet compute_contacts(const world::Scene& scene, const world::GraspParams& params,
                            const PhysicsConfig& physics) {
  const geom::Vec2 u_hat{std::cos(params.phi), std::sin(params.phi)};
  const geom::Vec2 n_hat{-u_hat.y, u_hat.x};

  ContactSet out;
  out.grasp_axis = n_hat;
  out.checksum = grasp_checksum(scene, params);

  // The jaws close at pad height; an extruded object has the same cross
  // section at every z below its top.
  if (params.ee_z >= scene.object.height) return out;

  // Footprint in gripper coordinates: u along the jaw width, s along closure.
  const geom::Vec2 ee{params.ee_x, params.ee_y};
  geom::Polygon local = scene.world_footprint();
  for (auto& p : local) {
    geom::Vec2 r = p - ee;
    p = {dot(r, u_hat), dot(r, n_hat)};
  }

  const double half_w = physics.jaw_width / 2.0;
  geom::Polygon band = geom::clip_halfplane(local, {1.0, 0.0}, half_w);
  band = geom::clip_halfplane(band, {-1.0, 0.0}, half_w);
  if (band.empty()) return out;  // closure misses the footprint

  auto [s_lo, s_hi] = *geom::projected_extent(band, {0.0, 1.0});
  const double pen =
      std::clamp(params.force / (2.0 * scene.object.material.stiffness), 0.0,
                 physics.penetration_max);

  const double z_hi = std::min(params.ee_z + physics.pad_height, scene.object.height);
  const double z_mid = (params.ee_z + z_hi) / 2.0;

  auto make_patch = [&](Jaw jaw) {
    const bool right = jaw == Jaw::right;
    // Gel on the right jaw reaches surface points within `pen` of the face
    // plane at s_hi; mirrored for the left jaw.
    geom::Polygon slab =
        right ? geom::clip_halfplane(band, {0.0, -1.0}, -(s_hi - pen))
              : geom::clip_halfplane(band, {0.0, 1.0}, s_lo + pen);
    ContactPatch patch;
    patch.jaw = jaw;
    auto [u0, u1] = *geom::projected_extent(slab, {1.0, 0.0});
    patch.u_lo = u0;
    patch.u_hi = u1;
    patch.penetration = pen;
    const double u_mid = (u0 + u1) / 2.0;
    const double s_face = right ? s_hi : s_lo;
    geom::Vec2 c = ee + u_hat * u_mid + n_hat * s_face;
    patch.centroid = {c.x, c.y, z_mid};
    return patch;
  };

  out.left = make_patch(Jaw::left);
  out.right = make_patch(Jaw::right);
  return out;
}

GraspOutcome lift_outcome(const world::Scene& scene, const world::GraspParams& params,
                          const ContactSet& contacts, uint64_t noise_seed,
                          const PhysicsConfig& physics) {
  if (contacts.checksum != grasp_checksum(scene, params)) {
    throw InconsistentContacts("lift_outcome: contacts do not match (scene, params)");
  }

  GraspOutcome out;
  if (!contacts.left || !contacts.right || contacts.total_length() < physics.patch_min) {
    out.failure_mode = FailureMode::empty_grasp;
    return out;
  }

  double eps_v = 1.0, eps_r = 1.0;
  if (physics.noise_sigma > 0.0) {
    RngStream rng(noise_seed, "lift", 0);
    eps_v = std::exp(physics.noise_sigma * rng.normal());
    eps_r = std::exp(physics.noise_sigma * rng.normal());
  }

  const auto& mat = scene.object.material;
  const double weight = mat.mass * world::kGravity;

  // Vertical hold: friction from both pads against gravity.
  const double ratio_v = 2.0 * mat.friction_mu * params.force * eps_v / weight;

  // Rotational hold: the finite patch resists the COM's pitching torque.
  const geom::Vec2 u_hat{std::cos(params.phi), std::sin(params.phi)};
  const geom::Vec2 com = scene.world_com_xy();
  const double d = std::fabs(dot(com - geom::Vec2{params.ee_x, params.ee_y}, u_hat));
  const double l_patch = contacts.total_length() / 4.0;  // mean patch half-length
  const double torque_cap = mat.friction_mu * params.force * (l_patch / 3.0) * eps_r;
  const double torque_dem = weight * d;
  const double ratio_r = torque_dem > 1e-12 ? torque_cap / torque_dem : kBig;

  out.margin = std::min(ratio_v, ratio_r);
  out.success = out.margin > 1.0;
  if (out.success) {
    out.failure_mode = FailureMode::none;
  } else {
    out.failure_mode =
        ratio_v <= ratio_r ? FailureMode::vertical_slip : FailureMode::rotational_slip;
  }
  return out;
}

CylinderEstimate fit_cylinder(const sensors::SensorFrame& depth,
                              const sensors::TopdownView& view, double min_height) {
  if (depth.kind != sensors::FrameKind::depth || depth.channels != 1) {
    throw std::invalid_argument("fit_cylinder: expected a 1-channel depth frame");
  }
  double sx = 0.0, sy = 0.0, top = 0.0;
  size_t n = 0;
  for (int row = 0; row < depth.height; ++row) {
    for (int col = 0; col < depth.width; ++col) {
      const double h = depth.at(row, col, 0);
      if (h <= min_height) continue;
      geom::Vec2 p = view.pixel_center(row, col);
      sx += p.x;
      sy += p.y;
      top = std::max(top, h);
      ++n;
    }
  }
  if (n == 0) throw NoObjectVisible("fit_cylinder: no pixel above the table");

  CylinderEstimate cyl;
  cyl.center = {sx / double(n), sy / double(n)};
  cyl.top_z = top;
  for (int row = 0; row < depth.height; ++row) {
    for (int col = 0; col < depth.width; ++col) {
      if (depth.at(row, col, 0) <= min_height) continue;
      cyl.radius = std::max(cyl.radius, (view.pixel_center(row, col) - cyl.center).norm());
    }
  }
  return cyl;
}

world::GraspParams collection_policy(const CylinderEstimate& cyl, uint64_t seed,
                                     double force_lo, double force_hi) {
  RngStream rng(seed, "policy", 0);
  world::GraspParams p;
  p.ee_x = cyl.center.x + rng.truncated_normal(10.0, 20.0);
  p.ee_y = cyl.center.y + rng.truncated_normal(10.0, 20.0);
  p.ee_z = rng.uniform(5.0, std::max(cyl.top_z, 5.0 + 1e-6));
  p.phi = rng.uniform(0.0, geom::kPi);
  p.force = rng.uniform(force_lo, force_hi);
  return p;
}

}  // namespace grasplab::oracle
