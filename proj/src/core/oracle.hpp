#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "core/frame.hpp"
#include "core/geometry.hpp"
#include "core/world.hpp"

namespace grasplab::oracle {

enum class Jaw { left, right };

// Gripper geometry and quasi-static lift model parameters.
struct PhysicsConfig {
  double jaw_width = 24.0;       // mm, gel pad extent along the closing line
  double pad_height = 18.0;      // mm, gel pad extent in z
  double finger_length = 40.0;   // mm, finger body above the fingertip (rendering only)
  double penetration_max = 6.0;  // mm, gel compliance saturates here
  double patch_min = 2.0;        // mm, grasps with less total contact are empty
  double noise_sigma = 0.08;     // lognormal capacity noise; 0 turns noise off
};

struct ContactPatch {
  Jaw jaw = Jaw::left;
  double u_lo = 0.0;  // contact interval along the jaw axis, gripper frame, mm
  double u_hi = 0.0;
  double penetration = 0.0;      // mm of gel indentation
  geom::Vec3 centroid = {};      // world coords of the patch centre
  double length() const { return u_hi - u_lo; }
};

struct ContactSet {
  std::optional<ContactPatch> left;
  std::optional<ContactPatch> right;
  geom::Vec2 grasp_axis = {0.0, 1.0};  // unit normal the jaws close along
  uint64_t checksum = 0;               // ties the set to (scene, params)

  double total_length() const {
    return (left ? left->length() : 0.0) + (right ? right->length() : 0.0);
  }
};

enum class FailureMode { none, empty_grasp, vertical_slip, rotational_slip };
const char* failure_mode_name(FailureMode mode);
FailureMode failure_mode_from_name(const std::string& name);

struct GraspOutcome {
  bool success = false;
  FailureMode failure_mode = FailureMode::none;
  double margin = 0.0;  // smallest hold ratio; > 1 means the object stays put
};

struct CylinderEstimate {
  geom::Vec2 center = {};  // table coords, mm
  double radius = 0.0;
  double top_z = 0.0;
};

uint64_t grasp_checksum(const world::Scene& scene, const world::GraspParams& params);

// Closes the jaws along phi's normal and reports the resulting gel contacts.
ContactSet compute_contacts(const world::Scene& scene, const world::GraspParams& params,
                            const PhysicsConfig& physics = {});

// Quasi-static hold check after the lift. Throws InconsistentContacts if the
// contact set was computed for a different scene or grasp.
GraspOutcome lift_outcome(const world::Scene& scene, const world::GraspParams& params,
                          const ContactSet& contacts, uint64_t noise_seed,
                          const PhysicsConfig& physics = {});

// Coarse object estimate from a plan-view depth map; the collection policy's
// only view of the scene. Throws NoObjectVisible when nothing rises above the
// table.
CylinderEstimate fit_cylinder(const sensors::SensorFrame& depth,
                              const sensors::TopdownView& view = {},
                              double min_height = 1.0);

// Cylinder-and-perturbation grasp proposals used during data collection.
world::GraspParams collection_policy(const CylinderEstimate& cyl, uint64_t seed,
                                     double force_lo = 0.5, double force_hi = 8.0);

}  // namespace grasplab::oracle
