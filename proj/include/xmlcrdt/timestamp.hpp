#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace xmlcrdt {

/// Unique operation/edge identifier: a logical clock paired with the
/// generating site. Ordered by clock first, site as tie-break, which
/// gives a strict total order across all sites.
struct Timestamp {
  std::uint64_t clock = 0;
  std::uint32_t site = 0;

  friend constexpr auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

/// Reserved identifier of the synthetic document root. User operations
/// never carry clock 0.
inline constexpr Timestamp kRootId{0, 0};

inline constexpr std::strong_ordering compare_timestamps(const Timestamp& a,
                                                         const Timestamp& b) {
  return a <=> b;
}

inline std::string to_string(const Timestamp& ts) {
  return "(" + std::to_string(ts.clock) + "," + std::to_string(ts.site) + ")";
}

}  // namespace xmlcrdt
