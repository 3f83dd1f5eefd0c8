#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "xmlcrdt/timestamp.hpp"

namespace xmlcrdt {

/// One level of a dense position path. Compared digit first, site second.
struct PositionPair {
  std::uint32_t digit = 0;
  std::uint32_t site = 0;

  friend constexpr auto operator<=>(const PositionPair&, const PositionPair&) = default;
};

/// Dense, totally ordered child-ordering key: a variable-length sequence
/// of (digit, site) pairs compared lexicographically. A proper prefix
/// sorts before any of its extensions, which is what makes one-level
/// descent work when two positions have no integer gap.
struct Position {
  std::vector<PositionPair> path;

  friend auto operator<=>(const Position&, const Position&) = default;
};

/// Digit space per level. Midpoints are allocated inside (0, 65536);
/// digit 0 only ever appears on interior pairs created while descending,
/// never as the final pair of a generated position.
inline constexpr std::uint32_t kPositionBase = 65536;

/// Generates a position strictly between `left` and `right`, where null
/// stands for the start/end boundary. The final pair always carries
/// `site`, so two sites generating between the same boundaries can never
/// collide.
///
/// Throws InvalidBoundaryError unless left < right.
Position generate_position(const Position* left, const Position* right,
                           std::uint32_t site);

/// Text form "digit:site/digit:site/...", stored in the @position
/// attribute. Decode inverts encode exactly.
std::string encode_position(const Position& p);
Position decode_position(std::string_view text);

}  // namespace xmlcrdt
