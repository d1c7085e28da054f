#include "arena/sim/actions.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace arena {

ActionSpec decode_action(int index) {
  if (index < 0 || index >= kNumActions) {
    throw std::invalid_argument("action index out of range: " + std::to_string(index));
  }
  return {static_cast<MoveDir>(index / 2), (index % 2) == 1};
}

int encode_action(ActionSpec spec) {
  const int code = static_cast<int>(spec.move_dir);
  if (code < 0 || code >= kNumMoveDirs) throw std::invalid_argument("invalid move direction");
  return 2 * code + (spec.shoot ? 1 : 0);
}

Vec2 direction_vector(MoveDir dir) {
  constexpr double d = 0.70710678118654752440;
  switch (dir) {
    case MoveDir::Stay: return {0.0, 0.0};
    case MoveDir::N: return {0.0, -1.0};
    case MoveDir::NE: return {d, -d};
    case MoveDir::E: return {1.0, 0.0};
    case MoveDir::SE: return {d, d};
    case MoveDir::S: return {0.0, 1.0};
    case MoveDir::SW: return {-d, d};
    case MoveDir::W: return {-1.0, 0.0};
    case MoveDir::NW: return {-d, -d};
  }
  throw std::invalid_argument("invalid move direction");
}

std::string_view to_string(MoveDir dir) {
  constexpr std::string_view names[] = {"Stay", "N", "NE", "E", "SE", "S", "SW", "W", "NW"};
  return names[static_cast<int>(dir)];
}

}  // namespace arena
