#include "tkgr/distribution.hpp"

#include "tkgr/errors.hpp"

namespace tkgr {

CountMode parse_count_mode(std::string_view text) {
  if (text == "object" || text == "object-only") {
    return CountMode::object_only;
  }
  if (text == "subject-object") {
    return CountMode::subject_object;
  }
  throw ConfigError("unknown counting mode '" + std::string(text) + "'");
}

std::string_view to_string(CountMode mode) {
  return mode == CountMode::object_only ? "object-only" : "subject-object";
}

std::vector<double> entity_distribution(std::span<const Quadruple> snapshot,
                                        std::size_t entity_count,
                                        CountMode mode) {
  if (entity_count == 0) {
    throw ConfigError("entity vocabulary must be nonempty");
  }
  std::vector<double> dist(entity_count, 0.0);
  double total = 0.0;
  for (const Quadruple& q : snapshot) {
    if (q.object >= entity_count ||
        (mode == CountMode::subject_object && q.subject >= entity_count)) {
      throw IndexError("entity index out of range in snapshot");
    }
    dist[q.object] += 1.0;
    total += 1.0;
    if (mode == CountMode::subject_object) {
      dist[q.subject] += 1.0;
      total += 1.0;
    }
  }
  if (total == 0.0) {
    const double uniform = 1.0 / static_cast<double>(entity_count);
    for (double& v : dist) {
      v = uniform;
    }
    return dist;
  }
  for (double& v : dist) {
    v /= total;
  }
  return dist;
}

DistributionSeries DistributionSeries::over_range(
    const TkgDataset& dataset, std::uint32_t first_time,
    std::uint32_t last_time_exclusive, SplitMask mask, CountMode mode) {
  if (last_time_exclusive > dataset.num_timestamps()) {
    throw IndexError("distribution range exceeds timestamp count");
  }
  DistributionSeries series;
  series.first_time = first_time;
  series.mode = mode;
  for (std::uint32_t t = first_time; t < last_time_exclusive; ++t) {
    const std::vector<Quadruple> snap = dataset.snapshot(t, mask);
    series.uniform_filled.push_back(snap.empty());
    series.distributions.push_back(
        entity_distribution(snap, dataset.num_entities(), mode));
  }
  return series;
}

}  // namespace tkgr
