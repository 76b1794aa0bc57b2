#pragma once

#include <array>
#include <cstdint>

#include "core/frame.hpp"
#include "core/oracle.hpp"
#include "core/world.hpp"

namespace grasplab::sensors {

// Photometric model of one gel pad: indentation heightmap -> membrane blur ->
// per-channel directional shading. Each physical sensor gets its own lights
// and resting level.
struct GelConfig {
  int width = 72;
  int height = 54;
  double pad_width = 24.0;   // mm along the jaw
  double pad_height = 18.0;  // mm vertical
  double sigma_mm = 0.6;     // membrane smoothing radius
  float base_level = 0.48f;  // resting brightness, exact when unloaded
  float shade_gain = 0.55f;
  std::array<geom::Vec3, 3> lights;  // unit dirs, +z out of the gel
  double bump_wavelength = 3.0;      // mm, object surface texture
};

GelConfig make_gel_config(oracle::Jaw side, uint64_t seed);

struct SensorConfig {
  FrontView camera;
  TopdownView topdown;
  GelConfig gel_left;
  GelConfig gel_right;
  oracle::PhysicsConfig physics;
  std::array<float, 3> background{0.84f, 0.87f, 0.92f};
  std::array<float, 3> table_color{0.45f, 0.38f, 0.31f};
  std::array<float, 3> gripper_color{0.25f, 0.27f, 0.30f};
};

SensorConfig make_sensor_config(uint64_t seed);

// Front orthographic RGB view. Pass gripper = nullptr for a clear scene
// (T_a); with a gripper the jaws are drawn at their closed positions.
SensorFrame render_camera(const world::Scene& scene, const world::GraspParams* gripper,
                          const SensorConfig& cfg, SnapTag tag);

// Plan-view height map in mm; gripper fingers appear as tall bars.
SensorFrame render_depth(const world::Scene& scene, const world::GraspParams* gripper,
                         const SensorConfig& cfg, SnapTag tag);

// Gel image for one jaw given the computed contacts. An absent patch yields
// the sensor's exact resting image.
SensorFrame render_tactile(const world::Scene& scene, const world::GraspParams& params,
                           const oracle::ContactSet& contacts, oracle::Jaw side,
                           const GelConfig& gel, SnapTag tag);

// Resting (unloaded) gel image.
SensorFrame unloaded_gel(const GelConfig& gel, SnapTag tag);

// after - before, mapped affinely to [0,1] with 0.5 = no change.
SensorFrame temporal_difference(const SensorFrame& after, const SensorFrame& before);

}  // namespace grasplab::sensors
