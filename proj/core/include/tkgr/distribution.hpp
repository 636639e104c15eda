#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "tkgr/dataset.hpp"
#include "tkgr/quadruple.hpp"

namespace tkgr {

enum class CountMode : std::uint8_t { object_only, subject_object };

CountMode parse_count_mode(std::string_view text);
std::string_view to_string(CountMode mode);

/// Normalized entity-occurrence counts of one snapshot. An empty snapshot
/// yields the uniform vector (callers can flag it via DistributionSeries).
std::vector<double> entity_distribution(std::span<const Quadruple> snapshot,
                                        std::size_t entity_count,
                                        CountMode mode);

/// Per-snapshot entity distributions over a consecutive timestamp range, in
/// time order. Snapshots with no facts under the mask are uniform-filled and
/// flagged.
struct DistributionSeries {
  std::vector<std::vector<double>> distributions;
  std::uint32_t first_time = 0;
  std::vector<bool> uniform_filled;
  CountMode mode = CountMode::object_only;

  std::size_t size() const noexcept { return distributions.size(); }

  static DistributionSeries over_range(const TkgDataset& dataset,
                                       std::uint32_t first_time,
                                       std::uint32_t last_time_exclusive,
                                       SplitMask mask, CountMode mode);
};

}  // namespace tkgr
