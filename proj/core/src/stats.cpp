#include "tkgr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "tkgr/errors.hpp"

namespace tkgr {

namespace {

/// Survival function of the asymptotic Kolmogorov distribution,
/// Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_q(double lambda) {
  if (lambda < 1e-8) {
    return 1.0;
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-16) {
      break;
    }
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Mean ranks (1-based) of the pooled sample, ties averaged.
std::vector<double> mean_ranks(const std::vector<double>& pooled_sorted) {
  const std::size_t n = pooled_sorted.size();
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled_sorted[j + 1] == pooled_sorted[i]) {
      ++j;
    }
    const double rank = (static_cast<double>(i + 1) +
                         static_cast<double>(j + 1)) /
                        2.0;
    for (std::size_t k = i; k <= j; ++k) {
      ranks[k] = rank;
    }
    i = j + 1;
  }
  return ranks;
}

double normal_sf_two_sided(double z) {
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

}  // namespace

KsResult ks_test(std::span<const double> sample_a,
                 std::span<const double> sample_b) {
  if (sample_a.empty() || sample_b.empty()) {
    throw StatError("KS test requires two nonempty samples");
  }
  std::vector<double> a(sample_a.begin(), sample_a.end());
  std::vector<double> b(sample_b.begin(), sample_b.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());

  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() || j < b.size()) {
    double v;
    if (i < a.size() && j < b.size()) {
      v = std::min(a[i], b[j]);
    } else if (i < a.size()) {
      v = a[i];
    } else {
      v = b[j];
    }
    while (i < a.size() && a[i] == v) {
      ++i;
    }
    while (j < b.size() && b[j] == v) {
      ++j;
    }
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }

  const double ne = na * nb / (na + nb);
  const double lambda =
      (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  return {d, kolmogorov_q(lambda)};
}

UTestResult u_test(std::span<const double> sample_a,
                   std::span<const double> sample_b) {
  if (sample_a.empty() || sample_b.empty()) {
    throw StatError("U test requires two nonempty samples");
  }
  const std::size_t na = sample_a.size();
  const std::size_t nb = sample_b.size();
  const std::size_t n = na + nb;

  // Pool, sort, assign mean ranks; remember which entries belong to a.
  std::vector<std::pair<double, bool>> pooled;
  pooled.reserve(n);
  for (double v : sample_a) {
    pooled.emplace_back(v, true);
  }
  for (double v : sample_b) {
    pooled.emplace_back(v, false);
  }
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<double> values(n);
  for (std::size_t k = 0; k < n; ++k) {
    values[k] = pooled[k].first;
  }
  const std::vector<double> ranks = mean_ranks(values);

  double rank_sum_a = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (pooled[k].second) {
      rank_sum_a += ranks[k];
    }
  }
  const double dn_a = static_cast<double>(na);
  const double dn_b = static_cast<double>(nb);
  UTestResult result;
  result.u = rank_sum_a - dn_a * (dn_a + 1.0) / 2.0;
  result.u_other = dn_a * dn_b - result.u;

  const double mu = dn_a * dn_b / 2.0;
  const double observed_dev = std::abs(result.u - mu);

  if (n <= 20) {
    // Exact two-sided permutation p-value, conditioning on the pooled ranks:
    // enumerate every assignment of na ranks to sample a.
    result.exact = true;
    std::vector<std::size_t> pick(na);
    std::iota(pick.begin(), pick.end(), 0);
    std::size_t total = 0;
    std::size_t extreme = 0;
    while (true) {
      double rank_sum = 0.0;
      for (std::size_t idx : pick) {
        rank_sum += ranks[idx];
      }
      const double u = rank_sum - dn_a * (dn_a + 1.0) / 2.0;
      ++total;
      if (std::abs(u - mu) >= observed_dev - 1e-12) {
        ++extreme;
      }
      // Next combination in lexicographic order.
      std::size_t pos = na;
      while (pos > 0 && pick[pos - 1] == n - na + pos - 1) {
        --pos;
      }
      if (pos == 0) {
        break;
      }
      ++pick[pos - 1];
      for (std::size_t q = pos; q < na; ++q) {
        pick[q] = pick[q - 1] + 1;
      }
    }
    result.p_value = static_cast<double>(extreme) / static_cast<double>(total);
    return result;
  }

  // Normal approximation with tie-corrected variance.
  double tie_term = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[j + 1] == values[i]) {
      ++j;
    }
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  const double dn = static_cast<double>(n);
  const double variance =
      dn_a * dn_b / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  if (variance <= 0.0) {
    result.p_value = 1.0;
    return result;
  }
  const double z = (result.u - mu) / std::sqrt(variance);
  result.p_value = std::clamp(normal_sf_two_sided(z), 0.0, 1.0);
  return result;
}

ShiftMode parse_shift_mode(std::string_view text) {
  if (text == "relation") {
    return ShiftMode::relation;
  }
  if (text == "entity") {
    return ShiftMode::entity;
  }
  throw ConfigError("unknown shift mode '" + std::string(text) + "'");
}

std::string_view to_string(ShiftMode mode) {
  return mode == ShiftMode::relation ? "relation" : "entity";
}

void ShiftReport::write_csv(std::ostream& out) const {
  out << "window_a,window_b,D,p_ks,U,p_u\n";
  char buf[192];
  for (const ShiftPairStats& p : pairs) {
    std::snprintf(buf, sizeof(buf), "t%u-t%u,t%u-t%u,%.10g,%.10g,%.10g,%.10g\n",
                  p.window_a.first_time, p.window_a.last_time,
                  p.window_b.first_time, p.window_b.last_time, p.ks_d, p.ks_p,
                  p.u, p.u_p);
    out << buf;
  }
}

ShiftReport analyze_shift(const TkgDataset& dataset,
                          std::uint32_t window_length, ShiftMode mode,
                          SplitMask mask) {
  if (window_length == 0) {
    throw ConfigError("window length must be at least 1");
  }
  const auto timestamps = static_cast<std::uint32_t>(dataset.num_timestamps());
  const std::uint32_t window_count =
      (timestamps + window_length - 1) / window_length;
  if (window_count < 2) {
    throw ConfigError("shift analysis needs at least two windows (" +
                      std::to_string(window_count) + " formed)");
  }

  ShiftReport report;
  report.mode = mode;

  struct WindowSample {
    ShiftWindow window;
    std::vector<double> sample;
  };
  std::vector<WindowSample> windows;
  for (std::uint32_t w = 0; w < window_count; ++w) {
    const std::uint32_t first = w * window_length;
    const std::uint32_t last =
        std::min(timestamps, (w + 1) * window_length) - 1;
    WindowSample ws;
    ws.window.first_time = first;
    ws.window.last_time = last;
    for (std::uint32_t t = first; t <= last; ++t) {
      for (const Quadruple& q : dataset.snapshot(t, mask)) {
        ws.sample.push_back(mode == ShiftMode::relation
                                ? static_cast<double>(q.predicate)
                                : static_cast<double>(q.object));
      }
    }
    ws.window.fact_count = ws.sample.size();
    if (ws.sample.empty()) {
      report.skipped.push_back(ws.window);
    } else {
      windows.push_back(std::move(ws));
    }
  }

  for (std::size_t i = 0; i + 1 < windows.size(); ++i) {
    const WindowSample& a = windows[i];
    const WindowSample& b = windows[i + 1];
    const KsResult ks = ks_test(a.sample, b.sample);
    const UTestResult u = u_test(a.sample, b.sample);
    report.pairs.push_back(
        {a.window, b.window, ks.statistic, ks.p_value, u.u, u.p_value});
  }
  return report;
}

}  // namespace tkgr
