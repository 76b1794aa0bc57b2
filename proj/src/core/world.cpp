#include "core/world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace grasplab::world {

namespace {

// Shift so the area centroid sits at the origin, then scale to the target
// vertex-to-vertex diameter.
void normalize_footprint(Polygon& poly, double target_diameter) {
  Vec2 c = geom::centroid(poly);
  for (Vec2& p : poly) p = p - c;
  double d0 = geom::diameter(poly);
  double s = target_diameter / d0;
  for (Vec2& p : poly) p = p * s;
  Vec2 c2 = geom::centroid(poly);
  for (Vec2& p : poly) p = p - c2;
}

Polygon convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  std::vector<Vec2> hull(2 * pts.size());
  size_t k = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

Polygon make_footprint(ObjectFamily family, double diam, RngStream& rng) {
  Polygon poly;
  switch (family) {
    case ObjectFamily::box: {
      double aspect = rng.uniform(0.35, 1.0);
      double w = diam / std::sqrt(1.0 + aspect * aspect);
      double d = aspect * w;
      poly = {{-w / 2, -d / 2}, {w / 2, -d / 2}, {w / 2, d / 2}, {-w / 2, d / 2}};
      break;
    }
    case ObjectFamily::prism_convex: {
      // Many lightly-jittered radial points hull into a rounded blob, so jaw
      // contact lands on gentle arcs rather than isolated sharp corners.
      int n = static_cast<int>(rng.uniform_int(10, 14));
      std::vector<Vec2> pts;
      for (int i = 0; i < n; ++i) {
        double ang = 2.0 * M_PI * (i + rng.uniform(-0.25, 0.25)) / n;
        double r = rng.uniform(0.82, 1.0);
        pts.push_back({r * std::cos(ang), r * std::sin(ang)});
      }
      poly = convex_hull(pts);
      break;
    }
    case ObjectFamily::prism_concave: {
      int arms = static_cast<int>(rng.uniform_int(4, 6));
      for (int i = 0; i < 2 * arms; ++i) {
        double ang = M_PI * (i + rng.uniform(-0.15, 0.15)) / arms;
        double r = (i % 2 == 0) ? rng.uniform(0.88, 1.0) : rng.uniform(0.55, 0.72);
        poly.push_back({r * std::cos(ang), r * std::sin(ang)});
      }
      // One corner-cutting pass blunts the star tips; corner cutting keeps a
      // simple polygon simple, and 2*arms <= 12 vertices become <= 24.
      Polygon cut;
      cut.reserve(2 * poly.size());
      for (size_t i = 0; i < poly.size(); ++i) {
        Vec2 a = poly[i];
        Vec2 b = poly[(i + 1) % poly.size()];
        cut.push_back(a * 0.75 + b * 0.25);
        cut.push_back(a * 0.25 + b * 0.75);
      }
      poly = std::move(cut);
      break;
    }
    case ObjectFamily::cylinder_like: {
      const int n = 24;
      for (int i = 0; i < n; ++i) {
        double ang = 2.0 * M_PI * i / n;
        poly.push_back({std::cos(ang), std::sin(ang)});
      }
      break;
    }
  }
  if (geom::signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
  normalize_footprint(poly, diam);
  return poly;
}

}  // namespace

const char* family_name(ObjectFamily family) {
  switch (family) {
    case ObjectFamily::box: return "box";
    case ObjectFamily::prism_convex: return "prism_convex";
    case ObjectFamily::prism_concave: return "prism_concave";
    case ObjectFamily::cylinder_like: return "cylinder_like";
  }
  return "unknown";
}

ObjectModel generate_object(uint64_t seed, ObjectFamily family) {
  RngStream rng(seed, "object", static_cast<uint64_t>(family));
  ObjectModel obj;

  char id[64];
  std::snprintf(id, sizeof(id), "%s_%06llu", family_name(family),
                static_cast<unsigned long long>(seed));
  obj.object_id = id;

  // Log-uniform diameter spreads mass across small objects, which keeps a
  // useful share of narrow-footprint grasps in the data.
  double diam = 20.0 * std::exp(std::log(5.0) * rng.uniform());
  obj.footprint = make_footprint(family, diam, rng);
  obj.height = rng.uniform(20.0, 120.0);

  // COM offset up to 30% of the footprint radius, kept inside the polygon.
  double off_mag = rng.uniform(0.0, 0.3) * (diam / 2.0);
  double off_ang = rng.uniform(0.0, 2.0 * M_PI);
  Vec2 off{off_mag * std::cos(off_ang), off_mag * std::sin(off_ang)};
  for (int i = 0; i < 24 && !geom::point_in_polygon(off, obj.footprint); ++i) off = off * 0.5;
  if (!geom::point_in_polygon(off, obj.footprint)) off = {0.0, 0.0};
  obj.com = {off.x, off.y, rng.uniform(0.35, 0.65) * obj.height};

  MaterialProps& m = obj.material;
  m.texture_amplitude = rng.uniform(0.1, 0.8);
  // Rough surfaces tend to grip better: couple friction to texture, with an
  // independent component so the mapping is not invertible from images.
  double t = (m.texture_amplitude - 0.1) / 0.7;
  m.friction_mu = 0.2 + 0.8 * (0.7 * t + 0.3 * rng.uniform());
  // Soft pads: a few mm of indentation at typical forces, so the contact
  // chord on curved footprints is long enough to resist gravity torque.
  m.stiffness = rng.uniform(0.12, 0.42);

  double area_mm2 = geom::signed_area(obj.footprint);
  double volume_m3 = area_mm2 * obj.height * 1e-9;
  double density = rng.uniform(160.0, 650.0);  // kg/m^3, hollow-to-light solids
  m.mass = std::clamp(density * volume_m3, 0.05, 0.5);

  m.albedo = {rng.uniform(0.15, 0.95), rng.uniform(0.15, 0.95), rng.uniform(0.15, 0.95)};
  return obj;
}

void validate_object(const ObjectModel& object) {
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("object " + object.object_id + ": " + what);
  };
  if (object.footprint.size() < 3) fail("footprint needs at least 3 vertices");
  if (!geom::is_simple(object.footprint)) fail("footprint self-intersects");
  if (geom::signed_area(object.footprint) <= 0.0) fail("footprint must be counterclockwise with positive area");
  if (!(object.height > 0.0 && object.height <= kWorkspaceHeight)) fail("height out of range");
  if (!geom::point_in_polygon({object.com.x, object.com.y}, object.footprint))
    fail("com outside footprint");
  if (!(object.com.z >= 0.0 && object.com.z <= object.height)) fail("com z outside prism");
  const MaterialProps& m = object.material;
  if (!(m.mass > 0.0)) fail("mass must be positive");
  if (!(m.friction_mu >= 0.05 && m.friction_mu <= 2.0)) fail("friction_mu out of [0.05, 2]");
  if (!(m.stiffness > 0.0)) fail("stiffness must be positive");
  if (!(m.texture_amplitude >= 0.0)) fail("texture_amplitude must be nonnegative");
  for (double a : m.albedo)
    if (!(a >= 0.0 && a <= 1.0)) fail("albedo out of [0, 1]");
}

Scene place_object(const ObjectModel& object, uint64_t seed, const Rect& table) {
  if (object.footprint_diameter() > table.diagonal()) {
    throw PlacementImpossible("object " + object.object_id + " cannot fit on the table");
  }
  RngStream rng(seed, "place");
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Transform2 pose;
    pose.rot = rng.uniform(0.0, 2.0 * M_PI);
    pose.translation = {rng.uniform(table.min_x, table.max_x),
                        rng.uniform(table.min_y, table.max_y)};
    Polygon placed = geom::transformed(object.footprint, pose);
    if (geom::inside_rect(placed, table)) {
      return Scene{object, pose, table};
    }
  }
  throw PlacementImpossible("object " + object.object_id +
                            " found no valid pose after 10000 samples");
}

nlohmann::ordered_json object_to_json(const ObjectModel& object) {
  nlohmann::ordered_json j;
  j["object_id"] = object.object_id;
  auto verts = nlohmann::ordered_json::array();
  for (const Vec2& p : object.footprint) verts.push_back({p.x, p.y});
  j["footprint"] = std::move(verts);
  j["height"] = object.height;
  j["com"] = {object.com.x, object.com.y, object.com.z};
  const MaterialProps& m = object.material;
  j["material"] = {{"mass", m.mass},
                   {"friction_mu", m.friction_mu},
                   {"stiffness", m.stiffness},
                   {"texture_amplitude", m.texture_amplitude},
                   {"albedo", {m.albedo[0], m.albedo[1], m.albedo[2]}}};
  return j;
}

ObjectModel object_from_json(const nlohmann::json& j) {
  ObjectModel obj;
  obj.object_id = j.at("object_id").get<std::string>();
  for (const auto& v : j.at("footprint")) {
    obj.footprint.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
  }
  obj.height = j.at("height").get<double>();
  const auto& c = j.at("com");
  obj.com = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
  const auto& m = j.at("material");
  obj.material.mass = m.at("mass").get<double>();
  obj.material.friction_mu = m.at("friction_mu").get<double>();
  obj.material.stiffness = m.at("stiffness").get<double>();
  obj.material.texture_amplitude = m.at("texture_amplitude").get<double>();
  const auto& a = m.at("albedo");
  obj.material.albedo = {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
  return obj;
}

}  // namespace grasplab::world
