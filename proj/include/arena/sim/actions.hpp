#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "arena/sim/vec2.hpp"

namespace arena {

inline constexpr int kNumActions = 18;
inline constexpr int kNumMoveDirs = 9;

/// Movement codes in canonical order. Screen coordinates: north is -y.
enum class MoveDir : std::uint8_t { Stay = 0, N, NE, E, SE, S, SW, W, NW };

struct ActionSpec {
  MoveDir move_dir = MoveDir::Stay;
  bool shoot = false;

  constexpr bool operator==(const ActionSpec&) const = default;
};

/// index = 2 * dir_code + shoot_bit. Throws std::invalid_argument outside 0..17.
ActionSpec decode_action(int index);
int encode_action(ActionSpec spec);

/// Unit step for a direction (diagonals normalized); Stay is the zero vector.
Vec2 direction_vector(MoveDir dir);

/// The eight non-Stay directions in code order.
inline constexpr std::array<MoveDir, 8> kCompass = {MoveDir::N,  MoveDir::NE, MoveDir::E,
                                                    MoveDir::SE, MoveDir::S,  MoveDir::SW,
                                                    MoveDir::W,  MoveDir::NW};

std::string_view to_string(MoveDir dir);

}  // namespace arena
