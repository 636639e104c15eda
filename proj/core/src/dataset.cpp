#include "tkgr/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tkgr/errors.hpp"
#include "tkgr/io.hpp"

namespace tkgr {

namespace {

constexpr char kCacheMagic[4] = {'T', 'K', 'G', 'D'};
constexpr std::uint16_t kCacheVersion = 1;

const char* split_name(Split split) {
  switch (split) {
    case Split::train:
      return "train";
    case Split::valid:
      return "valid";
    case Split::test:
      return "test";
  }
  return "?";
}

std::optional<std::int64_t> parse_int(std::string_view field) {
  std::int64_t value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || field.empty()) {
    return std::nullopt;
  }
  return value;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

}  // namespace

std::uint32_t Vocabulary::intern(std::string label) {
  auto it = index_.find(label);
  if (it != index_.end()) {
    return it->second;
  }
  const auto idx = static_cast<std::uint32_t>(labels_.size());
  index_.emplace(label, idx);
  labels_.push_back(std::move(label));
  return idx;
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

const std::string& Vocabulary::label(std::uint32_t index) const {
  if (index >= labels_.size()) {
    throw IndexError("vocabulary index " + std::to_string(index) +
                     " out of range (size " + std::to_string(labels_.size()) +
                     ")");
  }
  return labels_[index];
}

TkgDataset::Builder::Builder(TimeInterval interval)
    : interval_(std::move(interval)) {}

TkgDataset::Builder& TkgDataset::Builder::add(Split split, std::string subject,
                                              std::string predicate,
                                              std::string object,
                                              std::int64_t raw_time) {
  rows_[static_cast<std::size_t>(split)].push_back(
      Row{std::move(subject), std::move(predicate), std::move(object),
          raw_time});
  return *this;
}

TkgDataset TkgDataset::Builder::build() {
  if (interval_.length <= 0) {
    throw ConfigError("time interval length must be positive");
  }
  if (rows_[static_cast<std::size_t>(Split::train)].empty()) {
    throw EmptyDatasetError("train split contains no facts");
  }

  TkgDataset ds;
  ds.interval_ = interval_;

  // First pass: vocabularies in first-appearance order (train, valid, test),
  // plus the set of divided timestamps.
  std::set<std::int64_t> steps;
  for (std::size_t s = 0; s < kSplitCount; ++s) {
    for (const Row& row : rows_[s]) {
      ds.entities_.intern(row.subject);
      ds.relations_.intern(row.predicate);
      ds.entities_.intern(row.object);
      if (row.raw_time % interval_.length != 0) {
        throw GranularityError(
            "raw timestamp " + std::to_string(row.raw_time) +
            " is not divisible by interval " +
            std::to_string(interval_.length));
      }
      steps.insert(row.raw_time / interval_.length);
    }
  }

  // Rank-compact: ascending step order; keep the original raw value.
  std::map<std::int64_t, std::uint32_t> step_index;
  for (std::int64_t step : steps) {
    step_index.emplace(step,
                       static_cast<std::uint32_t>(ds.raw_times_.size()));
    ds.raw_times_.push_back(step * interval_.length);
  }

  for (std::size_t s = 0; s < kSplitCount; ++s) {
    ds.splits_[s].reserve(rows_[s].size());
    for (const Row& row : rows_[s]) {
      Quadruple q;
      q.subject = *ds.entities_.find(row.subject);
      q.predicate = *ds.relations_.find(row.predicate);
      q.object = *ds.entities_.find(row.object);
      q.time = step_index.at(row.raw_time / interval_.length);
      ds.splits_[s].push_back(q);
    }
  }

  ds.build_indexes();
  return ds;
}

void TkgDataset::build_indexes() {
  by_time_.assign(raw_times_.size(), {});
  fact_set_.clear();
  for (std::size_t s = 0; s < kSplitCount; ++s) {
    for (std::uint32_t i = 0; i < splits_[s].size(); ++i) {
      const Quadruple& q = splits_[s][i];
      by_time_[q.time][s].push_back(i);
      fact_set_.insert(q);
    }
  }
}

TkgDataset TkgDataset::load(const std::filesystem::path& directory,
                            const TimeInterval& interval) {
  Builder builder(interval);
  bool train_file_found = false;

  for (Split split : {Split::train, Split::valid, Split::test}) {
    const std::string base = split_name(split);
    std::filesystem::path file = directory / (base + ".txt");
    if (!std::filesystem::exists(file)) {
      file = directory / base;
    }
    if (!std::filesystem::exists(file)) {
      if (split == Split::train) {
        throw ConfigError("train file not found under " + directory.string());
      }
      continue;
    }
    if (split == Split::train) {
      train_file_found = true;
    }

    std::ifstream in(file);
    if (!in) {
      throw ConfigError("cannot open " + file.string());
    }
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
      ++line_number;
      if (!line.empty() && line.back() == '\r') {
        line.pop_back();
      }
      if (line.empty()) {
        continue;
      }
      const auto fields = split_tabs(line);
      if (fields.size() != 4 && fields.size() != 5) {
        throw ParseError(file.string(), line_number,
                         "expected 4 tab-separated fields, got " +
                             std::to_string(fields.size()));
      }
      const auto raw_time = parse_int(fields[3]);
      if (!raw_time) {
        throw ParseError(file.string(), line_number,
                         "non-numeric timestamp field '" +
                             std::string(fields[3]) + "'");
      }
      builder.add(split, std::string(fields[0]), std::string(fields[1]),
                  std::string(fields[2]), *raw_time);
    }
  }

  if (!train_file_found) {
    throw ConfigError("train file not found under " + directory.string());
  }
  return builder.build();
}

std::int64_t TkgDataset::raw_time(std::uint32_t time_index) const {
  if (time_index >= raw_times_.size()) {
    throw IndexError("timestamp index " + std::to_string(time_index) +
                     " out of range (count " +
                     std::to_string(raw_times_.size()) + ")");
  }
  return raw_times_[time_index];
}

std::size_t TkgDataset::total_facts() const noexcept {
  std::size_t n = 0;
  for (const auto& split : splits_) {
    n += split.size();
  }
  return n;
}

std::vector<Quadruple> TkgDataset::snapshot(std::uint32_t time_index,
                                            SplitMask mask) const {
  if (time_index >= raw_times_.size()) {
    throw IndexError("snapshot time " + std::to_string(time_index) +
                     " out of range (count " +
                     std::to_string(raw_times_.size()) + ")");
  }
  std::vector<Quadruple> result;
  const auto& buckets = by_time_[time_index];
  for (std::size_t s = 0; s < kSplitCount; ++s) {
    if (!mask_contains(mask, static_cast<Split>(s))) {
      continue;
    }
    for (std::uint32_t pos : buckets[s]) {
      result.push_back(splits_[s][pos]);
    }
  }
  return result;
}

std::vector<std::uint32_t> TkgDataset::active_entities(
    std::uint32_t first_time, std::uint32_t last_time, SplitMask mask) const {
  std::set<std::uint32_t> active;
  const std::uint32_t hi =
      std::min<std::uint32_t>(last_time,
                              raw_times_.empty()
                                  ? 0
                                  : static_cast<std::uint32_t>(
                                        raw_times_.size() - 1));
  for (std::uint32_t t = first_time; t <= hi; ++t) {
    const auto& buckets = by_time_[t];
    for (std::size_t s = 0; s < kSplitCount; ++s) {
      if (!mask_contains(mask, static_cast<Split>(s))) {
        continue;
      }
      for (std::uint32_t pos : buckets[s]) {
        active.insert(splits_[s][pos].subject);
        active.insert(splits_[s][pos].object);
      }
    }
    if (t == hi) {
      break;  // guard uint32 wrap when hi == UINT32_MAX
    }
  }
  return {active.begin(), active.end()};
}

bool operator==(const TkgDataset& a, const TkgDataset& b) {
  return a.entities_ == b.entities_ && a.relations_ == b.relations_ &&
         a.raw_times_ == b.raw_times_ && a.interval_ == b.interval_ &&
         a.splits_ == b.splits_;
}

void TkgDataset::save_cache(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) {
    throw ContainerError("cannot open " + file.string() + " for writing");
  }
  io::write_bytes(out, kCacheMagic, sizeof(kCacheMagic));
  io::write_u16(out, kCacheVersion);

  nlohmann::json meta;
  meta["entity_count"] = entities_.size();
  meta["relation_count"] = relations_.size();
  meta["timestamp_count"] = raw_times_.size();
  meta["interval"] = {{"length", interval_.length}, {"unit", interval_.unit}};
  meta["split_sizes"] = {
      {"train", split(Split::train).size()},
      {"valid", split(Split::valid).size()},
      {"test", split(Split::test).size()},
  };
  meta["entity_labels"] = entities_.labels();
  meta["relation_labels"] = relations_.labels();
  meta["raw_times"] = raw_times_;
  io::write_string(out, meta.dump());

  for (const auto& split : splits_) {
    io::write_u64(out, split.size());
    for (const Quadruple& q : split) {
      io::write_u32(out, q.subject);
      io::write_u32(out, q.predicate);
      io::write_u32(out, q.object);
      io::write_u32(out, q.time);
    }
  }
  if (!out) {
    throw ContainerError("write failure on " + file.string());
  }
}

TkgDataset TkgDataset::load_cache(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw ContainerError("cannot open " + file.string());
  }
  char magic[4];
  io::read_bytes(in, magic, sizeof(magic));
  if (std::string_view(magic, 4) != std::string_view(kCacheMagic, 4)) {
    throw ContainerError("bad magic in " + file.string() +
                         " (not a TKGD cache)");
  }
  const std::uint16_t version = io::read_u16(in);
  if (version != kCacheVersion) {
    throw ContainerError("unsupported TKGD version " +
                         std::to_string(version));
  }

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(io::read_string(in));
  } catch (const nlohmann::json::exception& e) {
    throw ContainerError(std::string("bad cache metadata: ") + e.what());
  }

  TkgDataset ds;
  for (const auto& label : meta.at("entity_labels")) {
    ds.entities_.intern(label.get<std::string>());
  }
  for (const auto& label : meta.at("relation_labels")) {
    ds.relations_.intern(label.get<std::string>());
  }
  ds.raw_times_ = meta.at("raw_times").get<std::vector<std::int64_t>>();
  ds.interval_.length = meta.at("interval").at("length").get<std::int64_t>();
  ds.interval_.unit = meta.at("interval").at("unit").get<std::string>();

  if (ds.entities_.size() != meta.at("entity_count").get<std::size_t>() ||
      ds.relations_.size() != meta.at("relation_count").get<std::size_t>() ||
      ds.raw_times_.size() != meta.at("timestamp_count").get<std::size_t>()) {
    throw ContainerError("cache metadata counts do not match label tables");
  }

  for (auto& split : ds.splits_) {
    const std::uint64_t count = io::read_u64(in);
    split.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      Quadruple q;
      q.subject = io::read_u32(in);
      q.predicate = io::read_u32(in);
      q.object = io::read_u32(in);
      q.time = io::read_u32(in);
      if (q.subject >= ds.entities_.size() ||
          q.object >= ds.entities_.size() ||
          q.predicate >= ds.relations_.size() ||
          q.time >= ds.raw_times_.size()) {
        throw ContainerError("cache quadruple indices out of range");
      }
      split.push_back(q);
    }
  }
  if (!io::at_eof(in)) {
    throw ContainerError("trailing bytes after cache payload");
  }

  ds.build_indexes();
  return ds;
}

RelationCardinality RelationCardinality::compute(const TkgDataset& dataset) {
  const auto& train = dataset.split(Split::train);
  if (train.empty()) {
    throw EmptyDatasetError("relation cardinality requires a train split");
  }

  // Distinct (head, tail) pairs per relation, timestamps ignored.
  std::vector<std::set<std::pair<std::uint32_t, std::uint32_t>>> pairs(
      dataset.num_relations());
  for (const Quadruple& q : train) {
    pairs[q.predicate].emplace(q.subject, q.object);
  }

  RelationCardinality card;
  card.entries_.resize(dataset.num_relations());
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    if (pairs[r].empty()) {
      continue;  // left undefined; samplers fall back to 0.5/0.5
    }
    std::set<std::uint32_t> heads, tails;
    for (const auto& [h, t] : pairs[r]) {
      heads.insert(h);
      tails.insert(t);
    }
    CardinalityEntry& e = card.entries_[r];
    const double pair_count = static_cast<double>(pairs[r].size());
    e.tails_per_head = pair_count / static_cast<double>(heads.size());
    e.heads_per_tail = pair_count / static_cast<double>(tails.size());
    e.replace_head_prob =
        e.tails_per_head / (e.tails_per_head + e.heads_per_tail);
    e.defined = true;
  }
  return card;
}

const CardinalityEntry& RelationCardinality::entry(
    std::uint32_t relation) const {
  if (relation >= entries_.size()) {
    throw IndexError("relation index " + std::to_string(relation) +
                     " out of range (count " +
                     std::to_string(entries_.size()) + ")");
  }
  return entries_[relation];
}

double RelationCardinality::replace_head_prob(std::uint32_t relation) const {
  const CardinalityEntry& e = entry(relation);
  return e.defined ? e.replace_head_prob : 0.5;
}

}  // namespace tkgr
