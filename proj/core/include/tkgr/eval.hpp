#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "tkgr/dataset.hpp"
#include "tkgr/quadruple.hpp"
#include "tkgr/score_model.hpp"

namespace tkgr {

enum class RankingProtocol : std::uint8_t { raw, time_aware_filtered };

std::string_view to_string(RankingProtocol protocol);
RankingProtocol parse_ranking_protocol(std::string_view text);

enum class QueryDirection : std::uint8_t { object, subject };

struct EvalReport {
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
  std::size_t query_count = 0;
  RankingProtocol protocol = RankingProtocol::time_aware_filtered;

  std::string to_json() const;
};

/// Rank of the true entity among all entities scored by plausibility
/// (-energy). Ties are counted as the mean tie rank, so the result may be
/// half-integral. The time-aware-filtered protocol drops other entities that
/// form known true facts for the same (s, p, t) (resp. (p, o, t)) before
/// ranking.
double rank_query(const ScoreModel& model, const TkgDataset& dataset,
                  const Quadruple& fact, QueryDirection direction,
                  RankingProtocol protocol);

/// MRR and Hits@{1,3,10} averaged over the object and subject queries of
/// every fact. Deterministic for any worker count.
EvalReport evaluate(const ScoreModel& model, std::span<const Quadruple> facts,
                    const TkgDataset& dataset, RankingProtocol protocol,
                    unsigned workers = 1);

}  // namespace tkgr
