#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace tkgr {

/// A single temporal fact: (subject, predicate, object, time). Entity and
/// relation fields are vocabulary indices; time is the 0-based compacted
/// timestamp index.
struct Quadruple {
  std::uint32_t subject = 0;
  std::uint32_t predicate = 0;
  std::uint32_t object = 0;
  std::uint32_t time = 0;

  friend bool operator==(const Quadruple&, const Quadruple&) = default;
  friend auto operator<=>(const Quadruple&, const Quadruple&) = default;
};

struct QuadrupleHash {
  std::size_t operator()(const Quadruple& q) const noexcept {
    std::uint64_t a = (static_cast<std::uint64_t>(q.subject) << 32) | q.object;
    std::uint64_t b = (static_cast<std::uint64_t>(q.predicate) << 32) | q.time;
    a ^= b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2);
    return static_cast<std::size_t>(a);
  }
};

enum class Split : std::uint8_t { train = 0, valid = 1, test = 2 };

inline constexpr std::size_t kSplitCount = 3;

/// Bitmask selecting which splits an operation reads.
enum class SplitMask : std::uint8_t {
  none = 0,
  train = 1,
  valid = 2,
  test = 4,
  all = 7,
};

constexpr SplitMask operator|(SplitMask a, SplitMask b) {
  return static_cast<SplitMask>(static_cast<std::uint8_t>(a) |
                                static_cast<std::uint8_t>(b));
}

constexpr bool mask_contains(SplitMask mask, Split split) {
  return (static_cast<std::uint8_t>(mask) &
          (std::uint8_t{1} << static_cast<std::uint8_t>(split))) != 0;
}

constexpr SplitMask mask_of(Split split) {
  return static_cast<SplitMask>(std::uint8_t{1}
                                << static_cast<std::uint8_t>(split));
}

}  // namespace tkgr
