#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "core/geometry.hpp"

#include "json.hpp"

namespace grasplab::world {

using geom::Polygon;
using geom::Rect;
using geom::Transform2;
using geom::Vec2;
using geom::Vec3;

inline constexpr double kGravity = 9.81;          // m/s^2
inline constexpr double kWorkspaceHeight = 200.0;  // mm

struct MaterialProps {
  double mass = 0.1;              // kg
  double friction_mu = 0.5;       // Coulomb coefficient
  double stiffness = 1.5;         // N/mm contact compliance
  double texture_amplitude = 0.3;  // mm surface bump height
  std::array<double, 3> albedo{0.5, 0.5, 0.5};
};

struct ObjectModel {
  std::string object_id;
  Polygon footprint;  // mm, counterclockwise, centroid at the origin
  double height = 50.0;  // mm
  Vec3 com;              // mm, relative to the footprint frame
  MaterialProps material;

  double footprint_diameter() const { return geom::diameter(footprint); }
};

struct Scene {
  ObjectModel object;
  Transform2 pose;  // object frame -> table frame
  Rect table_extent;

  Polygon world_footprint() const { return geom::transformed(object.footprint, pose); }
  Vec2 world_com_xy() const { return pose.apply({object.com.x, object.com.y}); }
};

// Grasp configuration: end-effector position, gripper angle, grip force.
struct GraspParams {
  double ee_x = 0.0;  // mm
  double ee_y = 0.0;  // mm
  double ee_z = 0.0;  // mm
  double phi = 0.0;   // rad, in [0, pi]
  double force = 1.0;  // N
};

enum class ObjectFamily { box, prism_convex, prism_concave, cylinder_like };

const char* family_name(ObjectFamily family);

ObjectModel generate_object(uint64_t seed, ObjectFamily family);

// Throws std::invalid_argument naming the first violated constraint.
void validate_object(const ObjectModel& object);

// Uniform random pose with the footprint fully on the table.
// Throws PlacementImpossible when no pose can fit.
Scene place_object(const ObjectModel& object, uint64_t seed, const Rect& table);

nlohmann::ordered_json object_to_json(const ObjectModel& object);
ObjectModel object_from_json(const nlohmann::json& j);

}  // namespace grasplab::world
