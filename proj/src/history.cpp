#include "xmlcrdt/history.hpp"

#include <algorithm>

#include "xmlcrdt/errors.hpp"

namespace xmlcrdt {

void add_value(ValueHistory& h, AttrValue v) {
  // Descending order: first position whose timestamp is < v.timestamp.
  auto it = std::lower_bound(
      h.entries.begin(), h.entries.end(), v.timestamp,
      [](const AttrValue& e, const Timestamp& ts) { return e.timestamp > ts; });
  if (it != h.entries.end() && it->timestamp == v.timestamp) {
    throw DuplicateDeliveryError("add_value: duplicate timestamp " +
                                 to_string(v.timestamp));
  }
  h.entries.insert(it, std::move(v));
}

const AttrValue* get_value(const ValueHistory& h, const Timestamp& ts) {
  auto it = std::lower_bound(
      h.entries.begin(), h.entries.end(), ts,
      [](const AttrValue& e, const Timestamp& t) { return e.timestamp > t; });
  if (it != h.entries.end() && it->timestamp == ts) return &*it;
  return nullptr;
}

AttrValue* get_value(ValueHistory& h, const Timestamp& ts) {
  return const_cast<AttrValue*>(
      get_value(static_cast<const ValueHistory&>(h), ts));
}

}  // namespace xmlcrdt
