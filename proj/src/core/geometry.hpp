#pragma once

#include <cmath>
#include <optional>
#include <vector>

namespace grasplab::geom {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::sqrt(x * x + y * y); }
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double dot(Vec3 o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  Vec3 normalized() const {
    double n = norm();
    return {x / n, y / n, z / n};
  }
};

inline double dot(Vec2 a, Vec2 b) { return a.dot(b); }
inline double dot(const Vec3& a, const Vec3& b) { return a.dot(b); }
inline double cross(Vec2 a, Vec2 b) { return a.cross(b); }

struct Rect {
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  double diagonal() const { return std::hypot(width(), height()); }
  bool contains(Vec2 p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
};

// Planar rigid transform: rotate by `rot`, then translate.
struct Transform2 {
  Vec2 translation;
  double rot = 0.0;

  Vec2 apply(Vec2 p) const {
    double c = std::cos(rot), s = std::sin(rot);
    return {c * p.x - s * p.y + translation.x, s * p.x + c * p.y + translation.y};
  }
};

using Polygon = std::vector<Vec2>;

double signed_area(const Polygon& poly);
Vec2 centroid(const Polygon& poly);
bool point_in_polygon(Vec2 p, const Polygon& poly);
// Largest vertex-to-vertex distance.
double diameter(const Polygon& poly);
// True when no two non-adjacent edges intersect and no edge degenerates.
bool is_simple(const Polygon& poly);
Polygon transformed(const Polygon& poly, const Transform2& t);
Rect bounding_box(const Polygon& poly);
bool inside_rect(const Polygon& poly, const Rect& rect);

// Clip polygon by the half-plane n.p <= c (Sutherland-Hodgman step).
Polygon clip_halfplane(const Polygon& poly, Vec2 n, double c);

// Extent [lo, hi] of poly projected on direction d, or nullopt if empty.
std::optional<std::pair<double, double>> projected_extent(const Polygon& poly, Vec2 d);

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

}  // namespace grasplab::geom
