#include "tkgr/rng.hpp"

#include "tkgr/errors.hpp"

namespace tkgr {

std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t derive_stream_seed(std::uint64_t global_seed,
                                 std::string_view stream_name) noexcept {
  return splitmix64(global_seed ^ fnv1a64(stream_name));
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) {
    throw ConfigError("Rng::below requires a nonzero bound");
  }
  // Rejection sampling over the largest multiple of bound; unbiased.
  const std::uint64_t limit = (~std::uint64_t{0} / bound) * bound;
  std::uint64_t x = next_u64();
  while (x >= limit) {
    x = next_u64();
  }
  return x % bound;
}

double Rng::unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::size_t Rng::categorical(std::span<const double> probabilities) {
  if (probabilities.empty()) {
    throw ConfigError("categorical draw over an empty distribution");
  }
  double total = 0.0;
  for (double p : probabilities) {
    total += p;
  }
  if (!(total > 0.0)) {
    throw NumericError("categorical distribution has nonpositive mass");
  }
  double x = unit() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < probabilities.size(); ++i) {
    acc += probabilities[i];
    if (x < acc) {
      return i;
    }
  }
  return probabilities.size() - 1;
}

}  // namespace tkgr
