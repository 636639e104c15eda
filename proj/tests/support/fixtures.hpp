#pragma once

// Deterministic synthetic datasets used across the unit and acceptance
// suites.

#include <algorithm>
#include <string>
#include <vector>

#include "tkgr/dataset.hpp"
#include "tkgr/rng.hpp"

namespace tkgr::testing {

inline std::string ent(std::uint32_t i) { return "e" + std::to_string(i); }
inline std::string rel(std::uint32_t i) { return "r" + std::to_string(i); }

/// The committed 4-line train fixture: entities {e0,e1,e2}, relations
/// {r0,r1}, raw times {0,24} at a 24-hour interval. r0 maps head e0 to three
/// distinct tails; r1 is strictly 1-to-1.
inline TkgDataset tiny_fixture() {
  TkgDataset::Builder builder(TimeInterval{24, "hours"});
  builder.add(Split::train, "e0", "r0", "e1", 0);
  builder.add(Split::train, "e0", "r0", "e2", 0);
  builder.add(Split::train, "e0", "r0", "e0", 0);
  builder.add(Split::train, "e1", "r1", "e2", 24);
  builder.add(Split::valid, "e1", "r0", "e2", 24);
  builder.add(Split::test, "e2", "r1", "e1", 24);
  return builder.build();
}

struct ClusterSpec {
  std::uint32_t entities = 200;
  std::uint32_t relations = 20;
  std::uint32_t timestamps = 50;
  std::uint32_t clusters = 10;
  std::uint32_t subblock = 4;      // fine-structure granularity
  std::uint32_t facts_per_snapshot = 60;
  std::uint32_t train_until = 40;  // times < this are train
  std::uint32_t valid_until = 45;  // then valid, rest test
};

/// Clustered synthetic TKG with planted two-level structure. Coarse level:
/// every relation links one source cluster to a different destination
/// cluster. Fine level: the object keeps the subject's within-cluster
/// sub-block, uniformly among the sub-block's members. Out-of-cluster
/// corruptions are trivially wrong (random sampling's zero-loss regime);
/// in-cluster, wrong-sub-block corruptions are the hard true negatives that
/// carry the fine signal. Splits are chronological.
inline TkgDataset cluster_fixture(std::uint64_t seed,
                                  const ClusterSpec& spec = {}) {
  Rng rng(derive_stream_seed(seed, "fixture/cluster"));
  const std::uint32_t cluster_size = spec.entities / spec.clusters;

  std::vector<std::uint32_t> src_cluster(spec.relations);
  std::vector<std::uint32_t> dst_cluster(spec.relations);
  for (std::uint32_t r = 0; r < spec.relations; ++r) {
    src_cluster[r] = static_cast<std::uint32_t>(rng.below(spec.clusters));
    dst_cluster[r] = static_cast<std::uint32_t>(
        (src_cluster[r] + 1 + rng.below(spec.clusters - 1)) % spec.clusters);
  }

  TkgDataset::Builder builder(TimeInterval{1, "steps"});
  for (std::uint32_t t = 0; t < spec.timestamps; ++t) {
    const Split split = t < spec.train_until
                            ? Split::train
                            : (t < spec.valid_until ? Split::valid
                                                    : Split::test);
    for (std::uint32_t i = 0; i < spec.facts_per_snapshot; ++i) {
      const auto r = static_cast<std::uint32_t>(rng.below(spec.relations));
      const auto s_sub =
          static_cast<std::uint32_t>(rng.below(cluster_size));
      const std::uint32_t block_base = s_sub - s_sub % spec.subblock;
      const std::uint32_t block_width =
          std::min(spec.subblock, cluster_size - block_base);
      const std::uint32_t o_sub =
          block_base + static_cast<std::uint32_t>(rng.below(block_width));
      const std::uint32_t s = src_cluster[r] * cluster_size + s_sub;
      const std::uint32_t o = dst_cluster[r] * cluster_size + o_sub;
      builder.add(split, ent(s), rel(r), ent(o), t);
    }
  }
  return builder.build();
}

/// Small clustered fixture for fast trainer tests.
inline TkgDataset small_cluster_fixture(std::uint64_t seed) {
  ClusterSpec spec;
  spec.entities = 30;
  spec.relations = 6;
  spec.timestamps = 20;
  spec.clusters = 5;
  spec.subblock = 3;
  spec.facts_per_snapshot = 40;
  spec.train_until = 14;
  spec.valid_until = 17;
  return cluster_fixture(seed, spec);
}

struct ShiftSpec {
  std::uint32_t entities = 60;
  std::uint32_t relations = 4;
  std::uint32_t timestamps = 36;
  std::uint32_t block_size = 20;  // hot-block width
  std::uint32_t rotate_every = 6; // hot block advances every this many steps
  std::uint32_t train_until = 24;
  std::uint32_t valid_until = 28;
  std::uint32_t facts_per_snapshot = 40;
  double hot_mass = 0.9;  // probability an object comes from the hot block
};

/// Entity-popularity rotation: objects concentrate on a "hot" block of
/// entities that rotates over time. The period is shorter than the train
/// span, so the predictor sees every regime while training, yet the test
/// period's popularity still diverges from the training aggregate. Subjects
/// stay uniform.
inline TkgDataset shift_fixture(std::uint64_t seed,
                                const ShiftSpec& spec = {}) {
  Rng rng(derive_stream_seed(seed, "fixture/shift"));
  TkgDataset::Builder builder(TimeInterval{1, "steps"});
  const std::uint32_t blocks = spec.entities / spec.block_size;

  for (std::uint32_t t = 0; t < spec.timestamps; ++t) {
    const Split split = t < spec.train_until
                            ? Split::train
                            : (t < spec.valid_until ? Split::valid
                                                    : Split::test);
    const std::uint32_t hot_block = (t / spec.rotate_every) % blocks;
    for (std::uint32_t i = 0; i < spec.facts_per_snapshot; ++i) {
      const auto r = static_cast<std::uint32_t>(rng.below(spec.relations));
      const auto s = static_cast<std::uint32_t>(rng.below(spec.entities));
      std::uint32_t o;
      if (rng.bernoulli(spec.hot_mass)) {
        o = hot_block * spec.block_size +
            static_cast<std::uint32_t>(rng.below(spec.block_size));
      } else {
        o = static_cast<std::uint32_t>(rng.below(spec.entities));
      }
      builder.add(split, ent(s), rel(r), ent(o), t);
    }
  }
  return builder.build();
}

/// Relation frequencies permuted mid-stream: snapshots before the boundary
/// draw relations with one fixed count profile, snapshots after it with a
/// cyclic shift of the same profile. Counts are exact, so windows on the
/// same side are identically distributed.
inline TkgDataset rotation_fixture(std::uint32_t timestamps = 20,
                                   std::uint32_t boundary = 10) {
  const std::vector<std::uint32_t> profile = {18, 9, 3};  // facts per relation
  TkgDataset::Builder builder(TimeInterval{1, "steps"});
  std::uint32_t entity_cursor = 0;
  for (std::uint32_t t = 0; t < timestamps; ++t) {
    for (std::uint32_t r = 0; r < profile.size(); ++r) {
      const std::uint32_t shifted =
          t < boundary ? r
                       : (r + 1) % static_cast<std::uint32_t>(profile.size());
      for (std::uint32_t i = 0; i < profile[r]; ++i) {
        // Entities are immaterial here; cycle through a small pool.
        const std::uint32_t s = entity_cursor % 7;
        const std::uint32_t o = (entity_cursor + 3) % 7;
        ++entity_cursor;
        builder.add(Split::train, ent(s), rel(shifted), ent(o), t);
      }
    }
  }
  return builder.build();
}

/// Every snapshot holds the same facts; no shift anywhere.
inline TkgDataset constant_fixture(std::uint32_t timestamps = 12) {
  TkgDataset::Builder builder(TimeInterval{1, "steps"});
  for (std::uint32_t t = 0; t < timestamps; ++t) {
    builder.add(Split::train, "a", "r0", "b", t);
    builder.add(Split::train, "b", "r0", "c", t);
    builder.add(Split::train, "c", "r1", "a", t);
  }
  return builder.build();
}

}  // namespace tkgr::testing
