#include "xmlcrdt/position.hpp"

#include <charconv>
#include <cstdlib>

#include "xmlcrdt/errors.hpp"

namespace xmlcrdt {

Position generate_position(const Position* left, const Position* right,
                           std::uint32_t site) {
  if (left && right && !(*left < *right)) {
    throw InvalidBoundaryError("generate_position: left >= right");
  }
  static const std::vector<PositionPair> kEmpty;
  const auto& l = left ? left->path : kEmpty;
  const auto& r = right ? right->path : kEmpty;

  Position out;
  bool right_active = right != nullptr;
  for (std::size_t i = 0;; ++i) {
    const bool have_l = i < l.size();
    const bool have_r = right_active && i < r.size();
    const std::uint64_t lo = have_l ? l[i].digit : 0;
    const std::uint64_t hi = have_r ? r[i].digit : kPositionBase;
    if (hi > lo + 1) {
      // Integer gap at this level: take the midpoint with our site.
      out.path.push_back({static_cast<std::uint32_t>(lo + (hi - lo) / 2), site});
      return out;
    }
    if (have_l) {
      // No gap; descend along left. The right bound stops constraining
      // unless left and right share this exact pair.
      out.path.push_back(l[i]);
      if (!(have_r && r[i] == l[i])) {
        right_active = false;
      }
      continue;
    }
    // Left is exhausted (out already extends it). hi is 0 or 1 here.
    if (r[i].digit >= 1) {
      // (0, site) sorts below r's pair at this level regardless of site.
      // Digit 0 is interior-only, so loop once more for the final pair.
      out.path.push_back({0, site});
      right_active = false;
      continue;
    }
    // r carries an interior digit-0 pair; follow it down. Interior pairs
    // are never final, so r has more levels and this terminates.
    out.path.push_back(r[i]);
  }
}

std::string encode_position(const Position& p) {
  std::string out;
  for (std::size_t i = 0; i < p.path.size(); ++i) {
    if (i) out += '/';
    out += std::to_string(p.path[i].digit);
    out += ':';
    out += std::to_string(p.path[i].site);
  }
  return out;
}

Position decode_position(std::string_view text) {
  Position p;
  std::size_t pos = 0;
  auto parse_u32 = [&](char stop) {
    std::uint32_t v = 0;
    auto begin = text.data() + pos;
    auto end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr == begin) {
      throw std::invalid_argument("decode_position: bad number in '" +
                                  std::string(text) + "'");
    }
    pos = static_cast<std::size_t>(ptr - text.data());
    if (stop != '\0') {
      if (pos >= text.size() || text[pos] != stop) {
        throw std::invalid_argument("decode_position: malformed '" +
                                    std::string(text) + "'");
      }
      ++pos;
    }
    return v;
  };
  while (pos < text.size()) {
    PositionPair pair;
    pair.digit = parse_u32(':');
    pair.site = parse_u32('\0');
    p.path.push_back(pair);
    if (pos < text.size()) {
      if (text[pos] != '/') {
        throw std::invalid_argument("decode_position: malformed '" +
                                    std::string(text) + "'");
      }
      ++pos;
    }
  }
  return p;
}

}  // namespace xmlcrdt
