#pragma once

#include <optional>

#include "arena/sim/vec2.hpp"

namespace arena {

/// Axis-aligned rectangle; min_corner < max_corner componentwise.
struct Wall {
  Vec2 min_corner;
  Vec2 max_corner;

  Vec2 center() const { return (min_corner + max_corner) * 0.5; }
  Vec2 half_extents() const { return (max_corner - min_corner) * 0.5; }
  bool operator==(const Wall&) const = default;
};

Vec2 closest_point_on_wall(Vec2 p, const Wall& wall);

/// True when a disc of the given radius strictly overlaps the rectangle.
bool circle_overlaps_wall(Vec2 center, double radius, const Wall& wall);

/// Rectangles overlap after growing `a` by `margin` on every side.
bool walls_overlap(const Wall& a, const Wall& b, double margin = 0.0);

/// First parameter t in [0, 1] where p0 + t (p1 - p0) enters the disc.
/// Returns 0 when p0 already lies inside.
std::optional<double> segment_circle_entry(Vec2 p0, Vec2 p1, Vec2 center, double radius);

/// First parameter t in [0, 1] where the segment touches the rectangle.
std::optional<double> segment_wall_entry(Vec2 p0, Vec2 p1, const Wall& wall);

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

}  // namespace arena
