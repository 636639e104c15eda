#include <doctest.h>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "tkgr/errors.hpp"
#include "tkgr/eval.hpp"

using namespace tkgr;

namespace {

TkgDataset random_small_dataset(std::uint64_t seed, std::uint32_t entities,
                                std::uint32_t relations,
                                std::uint32_t timestamps,
                                std::uint32_t facts) {
  Rng rng(derive_stream_seed(seed, "eval/dataset"));
  TkgDataset::Builder builder({1, "steps"});
  for (std::uint32_t i = 0; i < facts; ++i) {
    builder.add(i % 3 == 0 ? Split::test : Split::train,
                testing::ent(static_cast<std::uint32_t>(rng.below(entities))),
                testing::rel(static_cast<std::uint32_t>(rng.below(relations))),
                testing::ent(static_cast<std::uint32_t>(rng.below(entities))),
                static_cast<std::int64_t>(rng.below(timestamps)));
  }
  return builder.build();
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("a uniquely most plausible truth ranks first") {
  ScoreModel m = ScoreModel::init(ModelKind::trilinear_time, 4, 1, 1, 2, 3);
  // truth object 1 gets the lowest energy by a wide margin
  auto ent = [&](std::uint32_t row) {
    return m.params().tensor("ent").row(row);
  };
  for (std::uint32_t e = 0; e < 4; ++e) {
    ent(e)[0] = static_cast<float>(e == 1 ? 10.0 : -1.0);
    ent(e)[1] = 0.0f;
  }
  ent(0)[0] = 1.0f;  // positive subject keeps plausibility ordered by e_o
  m.params().tensor("rel").row(0)[0] = 1.0f;
  m.params().tensor("rel").row(0)[1] = 1.0f;
  m.params().tensor("time").row(0)[0] = 1.0f;
  m.params().tensor("time").row(0)[1] = 1.0f;
  const TkgDataset ds = random_small_dataset(1, 4, 1, 1, 12);
  CHECK(rank_query(m, ds, {0, 0, 1, 0}, QueryDirection::object,
                   RankingProtocol::raw) == 1.0);
}

TEST_CASE("an all-tied model yields the mean tie rank") {
  const std::size_t entities = 9;
  ScoreModel m = ScoreModel::init(ModelKind::trilinear_time,
                                  entities, 2, 2, 4, 5);
  for (Tensor& t : m.params().tensors()) {
    std::fill(t.values.begin(), t.values.end(), 0.0f);
  }
  const TkgDataset ds = random_small_dataset(2, 9, 2, 2, 20);
  const double rank = rank_query(m, ds, {0, 0, 1, 0}, QueryDirection::object,
                                 RankingProtocol::raw);
  CHECK(rank == doctest::Approx((entities + 1.0) / 2.0));
}

TEST_CASE("ranks equal the brute-force oracle on random models") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TkgDataset ds = random_small_dataset(seed, 10, 3, 4, 60);
    const ScoreModel m = ScoreModel::init(
        ModelKind::translate_time, ds.num_entities(), ds.num_relations(),
        ds.num_timestamps(), 6, seed + 50);
    Rng rng(seed);
    for (int i = 0; i < 100; ++i) {
      const auto& facts = ds.split(i % 2 == 0 ? Split::train : Split::test);
      const Quadruple& fact = facts[rng.below(facts.size())];
      for (QueryDirection dir :
           {QueryDirection::object, QueryDirection::subject}) {
        for (RankingProtocol protocol :
             {RankingProtocol::raw, RankingProtocol::time_aware_filtered}) {
          const double lib = rank_query(m, ds, fact, dir, protocol);
          const double oracle =
              testing::oracle_rank(m, ds, fact, dir, protocol);
          CHECK(lib == oracle);
          ++checked;
        }
      }
    }
  }
  CHECK(checked == 2000);
}

TEST_CASE("evaluate matches the oracle aggregates") {
  const TkgDataset ds = random_small_dataset(7, 10, 3, 4, 80);
  const ScoreModel m = ScoreModel::init(
      ModelKind::diachronic, ds.num_entities(), ds.num_relations(),
      ds.num_timestamps(), 8, 99);
  const auto& test = ds.split(Split::test);
  for (RankingProtocol protocol :
       {RankingProtocol::raw, RankingProtocol::time_aware_filtered}) {
    const EvalReport lib = evaluate(m, test, ds, protocol);
    const auto oracle = testing::oracle_evaluate(m, test, ds, protocol);
    CHECK(lib.mrr == doctest::Approx(oracle.mrr).epsilon(1e-12));
    CHECK(lib.hits1 == doctest::Approx(oracle.hits1).epsilon(1e-12));
    CHECK(lib.hits3 == doctest::Approx(oracle.hits3).epsilon(1e-12));
    CHECK(lib.hits10 == doctest::Approx(oracle.hits10).epsilon(1e-12));
    CHECK(lib.query_count == 2 * test.size());
  }
}

TEST_CASE("rank-one everywhere gives MRR and hits of exactly one") {
  // translate-time with e_a=0, e_b=1, r=1: both the object query (a,r,?)
  // and the subject query (?,r,b) put the truth strictly on top.
  TkgDataset::Builder builder({1, "steps"});
  builder.add(Split::train, "a", "r", "b", 0);
  builder.add(Split::test, "a", "r", "b", 0);
  const TkgDataset ds = builder.build();
  ScoreModel m = ScoreModel::init(ModelKind::translate_time, 2, 1, 1, 1, 3);
  for (Tensor& t : m.params().tensors()) {
    std::fill(t.values.begin(), t.values.end(), 0.0f);
  }
  m.params().tensor("ent").row(1)[0] = 1.0f;
  m.params().tensor("rel").row(0)[0] = 1.0f;

  const EvalReport report =
      evaluate(m, ds.split(Split::test), ds, RankingProtocol::raw);
  CHECK(report.mrr == 1.0);
  CHECK(report.hits1 == 1.0);
  CHECK(report.hits3 == 1.0);
  CHECK(report.hits10 == 1.0);
}

TEST_CASE("MRR on ranks one and two is exactly 0.75") {
  // trilinear-time with e_a=1, e_b=2, r=tau=1 and fact (a,r,b): the object
  // query ranks the truth 1, the subject query ranks it 2, so the
  // two-direction average is (1 + 1/2) / 2.
  TkgDataset::Builder builder({1, "steps"});
  builder.add(Split::train, "a", "r", "b", 0);
  builder.add(Split::test, "a", "r", "b", 0);
  const TkgDataset ds = builder.build();
  ScoreModel m = ScoreModel::init(ModelKind::trilinear_time, 2, 1, 1, 1, 3);
  m.params().tensor("ent").row(0)[0] = 1.0f;
  m.params().tensor("ent").row(1)[0] = 2.0f;
  m.params().tensor("rel").row(0)[0] = 1.0f;
  m.params().tensor("time").row(0)[0] = 1.0f;

  const Quadruple fact{0, 0, 1, 0};
  CHECK(rank_query(m, ds, fact, QueryDirection::object,
                   RankingProtocol::raw) == 1.0);
  CHECK(rank_query(m, ds, fact, QueryDirection::subject,
                   RankingProtocol::raw) == 2.0);

  const EvalReport report =
      evaluate(m, ds.split(Split::test), ds, RankingProtocol::raw);
  CHECK(report.mrr == doctest::Approx(0.75));
  CHECK(report.hits1 == doctest::Approx(0.5));
}

TEST_CASE("positive scaling of plausibilities leaves every rank unchanged") {
  const TkgDataset ds = random_small_dataset(9, 10, 3, 3, 50);
  ScoreModel m = ScoreModel::init(
      ModelKind::trilinear_time, ds.num_entities(), ds.num_relations(),
      ds.num_timestamps(), 8, 41);
  ScoreModel scaled = m;
  // Trilinear energy is linear in the relation tensor: doubling it doubles
  // every energy, a positive rescaling of all plausibilities.
  for (float& v : scaled.params().tensor("rel").values) {
    v *= 2.0f;
  }
  const auto& test = ds.split(Split::test);
  for (const Quadruple& fact : test) {
    for (QueryDirection dir :
         {QueryDirection::object, QueryDirection::subject}) {
      CHECK(rank_query(m, ds, fact, dir, RankingProtocol::raw) ==
            rank_query(scaled, ds, fact, dir, RankingProtocol::raw));
    }
  }
  const EvalReport a = evaluate(m, test, ds, RankingProtocol::raw);
  const EvalReport b = evaluate(scaled, test, ds, RankingProtocol::raw);
  CHECK(a.mrr == b.mrr);
  CHECK(a.hits10 == b.hits10);
}

TEST_CASE("report invariants hold on random evaluations") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const TkgDataset ds = random_small_dataset(seed + 20, 12, 4, 5, 70);
    const ScoreModel m = ScoreModel::init(
        ModelKind::translate_time, ds.num_entities(), ds.num_relations(),
        ds.num_timestamps(), 6, seed);
    const EvalReport r = evaluate(m, ds.split(Split::test), ds,
                                  RankingProtocol::time_aware_filtered);
    CHECK(r.hits1 <= r.hits3);
    CHECK(r.hits3 <= r.hits10);
    CHECK(r.mrr > 0.0);
    CHECK(r.mrr <= 1.0);
    CHECK(r.mrr >= r.hits1);
  }
}

TEST_CASE("evaluation is independent of the worker count") {
  const TkgDataset ds = random_small_dataset(31, 12, 4, 5, 90);
  const ScoreModel m = ScoreModel::init(
      ModelKind::trilinear_time, ds.num_entities(), ds.num_relations(),
      ds.num_timestamps(), 8, 6);
  const EvalReport serial =
      evaluate(m, ds.split(Split::train), ds, RankingProtocol::raw, 1);
  const EvalReport parallel =
      evaluate(m, ds.split(Split::train), ds, RankingProtocol::raw, 4);
  CHECK(serial.mrr == parallel.mrr);
  CHECK(serial.hits1 == parallel.hits1);
  CHECK(serial.hits3 == parallel.hits3);
  CHECK(serial.hits10 == parallel.hits10);
}

TEST_CASE("empty evaluation sets are rejected") {
  const TkgDataset ds = random_small_dataset(3, 5, 2, 2, 20);
  const ScoreModel m = ScoreModel::init(
      ModelKind::translate_time, ds.num_entities(), ds.num_relations(),
      ds.num_timestamps(), 4, 1);
  const std::vector<Quadruple> empty;
  CHECK_THROWS_AS((void)evaluate(m, empty, ds, RankingProtocol::raw),
                  EvalError);
}

TEST_CASE("filtered ranking drops other known-true entities at the same time") {
  // Truth ranks behind another true fact's object under raw ranking but
  // first once that object is filtered.
  TkgDataset::Builder builder({1, "steps"});
  builder.add(Split::train, "s", "r", "good", 0);
  builder.add(Split::test, "s", "r", "truth", 0);
  builder.add(Split::train, "x", "r", "s", 0);  // make vocab richer
  const TkgDataset ds = builder.build();
  // Entities: s=0, good=1, truth=2, x=3.
  ScoreModel m = ScoreModel::init(ModelKind::trilinear_time, 4, 1, 1, 4, 3);
  for (Tensor& t : m.params().tensors()) {
    std::fill(t.values.begin(), t.values.end(), 0.0f);
  }
  m.params().tensor("rel").row(0)[0] = 1.0f;
  m.params().tensor("time").row(0)[0] = 1.0f;
  m.params().tensor("ent").row(0)[0] = 1.0f;   // s
  m.params().tensor("ent").row(1)[0] = 5.0f;   // good: most plausible
  m.params().tensor("ent").row(2)[0] = 3.0f;   // truth: second
  m.params().tensor("ent").row(3)[0] = -1.0f;  // x
  const Quadruple fact{0, 0, 2, 0};
  CHECK(rank_query(m, ds, fact, QueryDirection::object,
                   RankingProtocol::raw) == 2.0);
  CHECK(rank_query(m, ds, fact, QueryDirection::object,
                   RankingProtocol::time_aware_filtered) == 1.0);
}

}  // TEST_SUITE
