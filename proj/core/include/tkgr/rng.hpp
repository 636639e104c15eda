#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace tkgr {

std::uint64_t fnv1a64(std::string_view text) noexcept;
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Derives an independent seed for a named component stream from one global
/// seed, so that adding draws to one component does not perturb the others.
std::uint64_t derive_stream_seed(std::uint64_t global_seed,
                                 std::string_view stream_name) noexcept;

/// Deterministic random source. The engine is the standard-specified
/// mt19937_64; all draw helpers are hand-rolled so results never depend on a
/// particular standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be nonzero.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double unit();

  bool bernoulli(double p) { return unit() < p; }

  /// Index i with probability proportional to probabilities[i].
  /// Probabilities must be nonnegative with a positive sum.
  std::size_t categorical(std::span<const double> probabilities);

  /// Deterministic Fisher-Yates shuffle of an index vector.
  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tkgr
