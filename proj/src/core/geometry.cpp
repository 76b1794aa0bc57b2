#include "core/geometry.hpp"

#include <algorithm>
#include <limits>

namespace grasplab::geom {

double signed_area(const Polygon& poly) {
  double acc = 0.0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    acc += a.cross(b);
  }
  return 0.5 * acc;
}

Vec2 centroid(const Polygon& poly) {
  double a6 = 0.0, cx = 0.0, cy = 0.0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    double w = p.cross(q);
    a6 += w;
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
  }
  return {cx / (3.0 * a6), cy / (3.0 * a6)};
}

bool point_in_polygon(Vec2 p, const Polygon& poly) {
  // Crossing-number test; points on the boundary count as inside.
  bool inside = false;
  const size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if (std::abs((b - a).cross(p - a)) < 1e-12 &&
        p.x >= std::min(a.x, b.x) - 1e-12 && p.x <= std::max(a.x, b.x) + 1e-12 &&
        p.y >= std::min(a.y, b.y) - 1e-12 && p.y <= std::max(a.y, b.y) + 1e-12) {
      return true;
    }
    if ((a.y > p.y) != (b.y > p.y)) {
      double t = (p.y - a.y) / (b.y - a.y);
      if (p.x < a.x + t * (b.x - a.x)) inside = !inside;
    }
  }
  return inside;
}

double diameter(const Polygon& poly) {
  double best = 0.0;
  for (size_t i = 0; i < poly.size(); ++i)
    for (size_t j = i + 1; j < poly.size(); ++j)
      best = std::max(best, (poly[i] - poly[j]).norm());
  return best;
}

namespace {

int orient(Vec2 a, Vec2 b, Vec2 c) {
  double v = (b - a).cross(c - a);
  if (v > 1e-12) return 1;
  if (v < -1e-12) return -1;
  return 0;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
         std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}

}  // namespace

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  int o1 = orient(a, b, c);
  int o2 = orient(a, b, d);
  int o3 = orient(c, d, a);
  int o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

bool is_simple(const Polygon& poly) {
  const size_t n = poly.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    if ((poly[(i + 1) % n] - poly[i]).norm() < 1e-9) return false;
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      // Skip adjacent edges (they share one endpoint).
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
        return false;
    }
  }
  return true;
}

Polygon transformed(const Polygon& poly, const Transform2& t) {
  Polygon out;
  out.reserve(poly.size());
  for (const Vec2& p : poly) out.push_back(t.apply(p));
  return out;
}

Rect bounding_box(const Polygon& poly) {
  Rect r{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
         std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  for (const Vec2& p : poly) {
    r.min_x = std::min(r.min_x, p.x);
    r.min_y = std::min(r.min_y, p.y);
    r.max_x = std::max(r.max_x, p.x);
    r.max_y = std::max(r.max_y, p.y);
  }
  return r;
}

bool inside_rect(const Polygon& poly, const Rect& rect) {
  for (const Vec2& p : poly) {
    if (!rect.contains(p)) return false;
  }
  return true;
}

Polygon clip_halfplane(const Polygon& poly, Vec2 n, double c) {
  Polygon out;
  const size_t sz = poly.size();
  if (sz == 0) return out;
  out.reserve(sz + 2);
  for (size_t i = 0; i < sz; ++i) {
    Vec2 cur = poly[i];
    Vec2 nxt = poly[(i + 1) % sz];
    double dc = n.dot(cur) - c;
    double dn = n.dot(nxt) - c;
    if (dc <= 0.0) {
      out.push_back(cur);
      if (dn > 0.0) {
        double t = dc / (dc - dn);
        out.push_back(cur + (nxt - cur) * t);
      }
    } else if (dn <= 0.0) {
      double t = dc / (dc - dn);
      out.push_back(cur + (nxt - cur) * t);
    }
  }
  return out;
}

std::optional<std::pair<double, double>> projected_extent(const Polygon& poly, Vec2 d) {
  if (poly.empty()) return std::nullopt;
  double lo = std::numeric_limits<double>::max();
  double hi = std::numeric_limits<double>::lowest();
  for (const Vec2& p : poly) {
    double v = d.dot(p);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return std::make_pair(lo, hi);
}

}  // namespace grasplab::geom
