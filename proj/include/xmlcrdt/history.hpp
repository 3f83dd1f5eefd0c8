#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xmlcrdt/timestamp.hpp"

namespace xmlcrdt {

// Special attribute names. They never appear in rendered output.
inline constexpr std::string_view kAttrAdd = "@add";
inline constexpr std::string_view kAttrDel = "@del";
inline constexpr std::string_view kAttrTag = "@tag";
inline constexpr std::string_view kAttrPosition = "@position";
inline constexpr std::string_view kAttrText = "@text";

inline bool is_special_attribute(std::string_view name) {
  return !name.empty() && name.front() == '@';
}

/// One recorded value of an attribute. `value` is nullopt for nil
/// (attribute deletion, and all @add/@del entries). `effect` is
/// 1 - (delivered undos) + (delivered redos) of the originating
/// operation; the value has an effect iff it is > 0.
struct AttrValue {
  std::optional<std::string> value;
  Timestamp timestamp;
  int effect = 1;

  friend bool operator==(const AttrValue&, const AttrValue&) = default;
};

/// All values ever set for one attribute, newest timestamp first, so the
/// first entry with effect > 0 is the current value.
struct ValueHistory {
  std::vector<AttrValue> entries;

  friend bool operator==(const ValueHistory&, const ValueHistory&) = default;
};

/// Inserts v at its place in the descending-timestamp order.
/// Throws DuplicateDeliveryError if an entry with v.timestamp exists.
void add_value(ValueHistory& h, AttrValue v);

/// Entry with the given timestamp, or nullptr.
const AttrValue* get_value(const ValueHistory& h, const Timestamp& ts);
AttrValue* get_value(ValueHistory& h, const Timestamp& ts);

inline int effect_of(const AttrValue& v) { return v.effect; }

}  // namespace xmlcrdt
