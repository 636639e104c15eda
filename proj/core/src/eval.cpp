#include "tkgr/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <thread>
#include <vector>

#include "tkgr/errors.hpp"

namespace tkgr {

std::string_view to_string(RankingProtocol protocol) {
  return protocol == RankingProtocol::raw ? "raw" : "time-aware-filtered";
}

RankingProtocol parse_ranking_protocol(std::string_view text) {
  if (text == "raw") {
    return RankingProtocol::raw;
  }
  if (text == "filtered" || text == "time-aware-filtered") {
    return RankingProtocol::time_aware_filtered;
  }
  throw ConfigError("unknown ranking protocol '" + std::string(text) + "'");
}

std::string EvalReport::to_json() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "{\"mrr\":%.17g,\"hits1\":%.17g,\"hits3\":%.17g,"
                "\"hits10\":%.17g,\"query_count\":%zu,\"protocol\":\"%s\"}",
                mrr, hits1, hits3, hits10, query_count,
                std::string(to_string(protocol)).c_str());
  return buf;
}

double rank_query(const ScoreModel& model, const TkgDataset& dataset,
                  const Quadruple& fact, QueryDirection direction,
                  RankingProtocol protocol) {
  const std::uint32_t truth =
      direction == QueryDirection::object ? fact.object : fact.subject;

  Quadruple candidate = fact;
  const auto with_candidate = [&](std::uint32_t e) -> const Quadruple& {
    if (direction == QueryDirection::object) {
      candidate.object = e;
    } else {
      candidate.subject = e;
    }
    return candidate;
  };

  const double truth_score = model.plausibility(with_candidate(truth));
  std::size_t better = 0;
  std::size_t tied = 0;
  const auto entity_count = static_cast<std::uint32_t>(model.num_entities());
  for (std::uint32_t e = 0; e < entity_count; ++e) {
    if (e == truth) {
      continue;
    }
    const Quadruple& cand = with_candidate(e);
    if (protocol == RankingProtocol::time_aware_filtered &&
        dataset.contains(cand)) {
      continue;
    }
    const double score = model.plausibility(cand);
    if (score > truth_score) {
      ++better;
    } else if (score == truth_score) {
      ++tied;
    }
  }
  return 1.0 + static_cast<double>(better) + 0.5 * static_cast<double>(tied);
}

EvalReport evaluate(const ScoreModel& model, std::span<const Quadruple> facts,
                    const TkgDataset& dataset, RankingProtocol protocol,
                    unsigned workers) {
  if (facts.empty()) {
    throw EvalError("evaluation set is empty");
  }

  struct PerFact {
    double inv_rank_sum = 0.0;
    int hits1 = 0, hits3 = 0, hits10 = 0;
  };
  std::vector<PerFact> partial(facts.size());

  const auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (QueryDirection dir :
           {QueryDirection::object, QueryDirection::subject}) {
        const double rank =
            rank_query(model, dataset, facts[i], dir, protocol);
        partial[i].inv_rank_sum += 1.0 / rank;
        partial[i].hits1 += rank <= 1.0 ? 1 : 0;
        partial[i].hits3 += rank <= 3.0 ? 1 : 0;
        partial[i].hits10 += rank <= 10.0 ? 1 : 0;
      }
    }
  };

  const unsigned thread_count = std::max(1u, workers);
  if (thread_count == 1 || facts.size() < 2 * thread_count) {
    run_range(0, facts.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (facts.size() + thread_count - 1) / thread_count;
    for (unsigned w = 0; w < thread_count; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(facts.size(), begin + chunk);
      if (begin >= end) {
        break;
      }
      pool.emplace_back(run_range, begin, end);
    }
    for (auto& t : pool) {
      t.join();
    }
  }

  // Reduce in fact order so the result is independent of the worker count.
  EvalReport report;
  report.protocol = protocol;
  report.query_count = 2 * facts.size();
  double inv_rank = 0.0;
  std::size_t h1 = 0, h3 = 0, h10 = 0;
  for (const PerFact& p : partial) {
    inv_rank += p.inv_rank_sum;
    h1 += static_cast<std::size_t>(p.hits1);
    h3 += static_cast<std::size_t>(p.hits3);
    h10 += static_cast<std::size_t>(p.hits10);
  }
  const double n = static_cast<double>(report.query_count);
  report.mrr = inv_rank / n;
  report.hits1 = static_cast<double>(h1) / n;
  report.hits3 = static_cast<double>(h3) / n;
  report.hits10 = static_cast<double>(h10) / n;
  return report;
}

}  // namespace tkgr
