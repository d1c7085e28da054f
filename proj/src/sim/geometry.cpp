#include "arena/sim/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace arena {

Vec2 closest_point_on_wall(Vec2 p, const Wall& wall) {
  return {std::clamp(p.x, wall.min_corner.x, wall.max_corner.x),
          std::clamp(p.y, wall.min_corner.y, wall.max_corner.y)};
}

bool circle_overlaps_wall(Vec2 center, double radius, const Wall& wall) {
  const Vec2 d = center - closest_point_on_wall(center, wall);
  return dot(d, d) < radius * radius;
}

bool walls_overlap(const Wall& a, const Wall& b, double margin) {
  return a.min_corner.x - margin < b.max_corner.x && b.min_corner.x < a.max_corner.x + margin &&
         a.min_corner.y - margin < b.max_corner.y && b.min_corner.y < a.max_corner.y + margin;
}

std::optional<double> segment_circle_entry(Vec2 p0, Vec2 p1, Vec2 center, double radius) {
  const Vec2 d = p1 - p0;
  const Vec2 f = p0 - center;
  const double c = dot(f, f) - radius * radius;
  if (c <= 0.0) return 0.0;
  const double a = dot(d, d);
  if (a == 0.0) return std::nullopt;
  const double b = 2.0 * dot(f, d);
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  const double t = (-b - std::sqrt(disc)) / (2.0 * a);
  if (t < 0.0 || t > 1.0) return std::nullopt;
  return t;
}

std::optional<double> segment_wall_entry(Vec2 p0, Vec2 p1, const Wall& wall) {
  // Slab clipping.
  double t_enter = 0.0;
  double t_exit = 1.0;
  const double origin[2] = {p0.x, p0.y};
  const double delta[2] = {p1.x - p0.x, p1.y - p0.y};
  const double lo[2] = {wall.min_corner.x, wall.min_corner.y};
  const double hi[2] = {wall.max_corner.x, wall.max_corner.y};
  for (int axis = 0; axis < 2; ++axis) {
    if (delta[axis] == 0.0) {
      if (origin[axis] < lo[axis] || origin[axis] > hi[axis]) return std::nullopt;
      continue;
    }
    double t0 = (lo[axis] - origin[axis]) / delta[axis];
    double t1 = (hi[axis] - origin[axis]) / delta[axis];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
    if (t_enter > t_exit) return std::nullopt;
  }
  return t_enter;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + ab * t);
}

}  // namespace arena
