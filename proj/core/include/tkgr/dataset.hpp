#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tkgr/quadruple.hpp"

namespace tkgr {

/// Granularity of the raw timestamp column: raw times are divided by `length`
/// before rank-compaction. `unit` is informational (e.g. "hours", "year").
struct TimeInterval {
  std::int64_t length = 1;
  std::string unit = "steps";

  friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

/// Bijective label <-> index map with deterministic first-appearance indexing.
class Vocabulary {
 public:
  std::uint32_t intern(std::string label);
  std::optional<std::uint32_t> find(std::string_view label) const;
  const std::string& label(std::uint32_t index) const;
  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.labels_ == b.labels_;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// Immutable temporal knowledge graph: vocabularies, splits, and the
/// time-ordered snapshot index. Construct via load(), load_cache(), or
/// Builder; safe for concurrent reads afterwards.
class TkgDataset {
 public:
  class Builder;

  /// Reads train/valid/test tab-separated files from a directory. Accepts
  /// `<split>.txt` or bare `<split>` file names; train is required, the other
  /// two may be absent or empty.
  static TkgDataset load(const std::filesystem::path& directory,
                         const TimeInterval& interval);

  void save_cache(const std::filesystem::path& file) const;
  static TkgDataset load_cache(const std::filesystem::path& file);

  std::size_t num_entities() const noexcept { return entities_.size(); }
  std::size_t num_relations() const noexcept { return relations_.size(); }
  std::size_t num_timestamps() const noexcept { return raw_times_.size(); }

  const Vocabulary& entities() const noexcept { return entities_; }
  const Vocabulary& relations() const noexcept { return relations_; }

  /// Original raw timestamp value for a compacted index.
  std::int64_t raw_time(std::uint32_t time_index) const;
  const std::vector<std::int64_t>& raw_times() const noexcept {
    return raw_times_;
  }
  const TimeInterval& interval() const noexcept { return interval_; }

  const std::vector<Quadruple>& split(Split split) const {
    return splits_[static_cast<std::size_t>(split)];
  }
  std::size_t total_facts() const noexcept;

  /// All facts at one timestamp, restricted to the masked splits, in stable
  /// insertion order (train lines first, then valid, then test).
  std::vector<Quadruple> snapshot(std::uint32_t time_index,
                                  SplitMask mask = SplitMask::all) const;

  /// Membership across all splits.
  bool contains(const Quadruple& q) const {
    return fact_set_.find(q) != fact_set_.end();
  }

  /// Sorted distinct entities appearing (as subject or object) in snapshots
  /// [first_time, last_time], restricted to the masked splits.
  std::vector<std::uint32_t> active_entities(std::uint32_t first_time,
                                             std::uint32_t last_time,
                                             SplitMask mask) const;

  friend bool operator==(const TkgDataset& a, const TkgDataset& b);

 private:
  TkgDataset() = default;
  void build_indexes();

  Vocabulary entities_;
  Vocabulary relations_;
  std::vector<std::int64_t> raw_times_;  // ascending; index = timestamp index
  TimeInterval interval_;
  std::array<std::vector<Quadruple>, kSplitCount> splits_;
  // Per timestamp, per split: positions into the split vectors.
  std::vector<std::array<std::vector<std::uint32_t>, kSplitCount>> by_time_;
  std::unordered_set<Quadruple, QuadrupleHash> fact_set_;
};

/// Programmatic construction path used by synthetic fixtures and tools.
/// Labels are interned first-appearance, raw times are divided by the
/// interval and rank-compacted, exactly as in file ingestion.
class TkgDataset::Builder {
 public:
  explicit Builder(TimeInterval interval = {});

  Builder& add(Split split, std::string subject, std::string predicate,
               std::string object, std::int64_t raw_time);

  /// Finalizes the dataset. Throws EmptyDatasetError when no train facts were
  /// added and GranularityError when a raw time is not divisible by the
  /// interval.
  TkgDataset build();

 private:
  struct Row {
    std::string subject, predicate, object;
    std::int64_t raw_time;
  };
  TimeInterval interval_;
  std::array<std::vector<Row>, kSplitCount> rows_;
  friend class TkgDataset;
};

/// Per-relation head/tail multiplicity statistics over the train split
/// (timestamps ignored), and the derived corruption-slot probabilities.
struct CardinalityEntry {
  double tails_per_head = 0.0;  // Nt
  double heads_per_tail = 0.0;  // Nh
  double replace_head_prob = 0.5;
  bool defined = false;
};

class RelationCardinality {
 public:
  static RelationCardinality compute(const TkgDataset& dataset);

  const CardinalityEntry& entry(std::uint32_t relation) const;
  /// Nt/(Nt+Nh), or the 0.5 fallback for relations absent from train.
  double replace_head_prob(std::uint32_t relation) const;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::vector<CardinalityEntry> entries_;
};

}  // namespace tkgr
