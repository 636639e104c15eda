#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "tkgr/dataset.hpp"

namespace tkgr {

struct KsResult {
  double statistic = 0.0;  // D = sup |ECDF_a - ECDF_b|
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test. The p-value uses the asymptotic
/// Kolmogorov distribution with the effective-size correction
/// lambda = (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) * D, ne = na*nb/(na+nb).
KsResult ks_test(std::span<const double> sample_a,
                 std::span<const double> sample_b);

struct UTestResult {
  double u = 0.0;        // U statistic of sample_a
  double u_other = 0.0;  // U of sample_b; u + u_other = na*nb
  double p_value = 1.0;  // two-sided
  bool exact = false;    // exact permutation enumeration was used
};

/// Mann-Whitney U with mean-rank tie handling. Small pooled samples get an
/// exact two-sided permutation p-value; larger ones use the normal
/// approximation with the tie-corrected variance.
UTestResult u_test(std::span<const double> sample_a,
                   std::span<const double> sample_b);

enum class ShiftMode : std::uint8_t { relation, entity };

ShiftMode parse_shift_mode(std::string_view text);
std::string_view to_string(ShiftMode mode);

struct ShiftWindow {
  std::uint32_t first_time = 0;
  std::uint32_t last_time = 0;  // inclusive
  std::size_t fact_count = 0;
};

struct ShiftPairStats {
  ShiftWindow window_a;
  ShiftWindow window_b;
  double ks_d = 0.0;
  double ks_p = 1.0;
  double u = 0.0;
  double u_p = 1.0;
};

struct ShiftReport {
  std::vector<ShiftPairStats> pairs;
  std::vector<ShiftWindow> skipped;  // windows with no facts
  ShiftMode mode = ShiftMode::relation;

  /// CSV: window_a, window_b, D, p_ks, U, p_u.
  void write_csv(std::ostream& out) const;
};

/// Chops the timeline into consecutive windows of `window_length` snapshots
/// and runs both tests on each adjacent pair of nonempty windows. The sample
/// of a window is the relation id (or object entity id) of each of its
/// facts. Throws ConfigError when the timeline yields fewer than two windows.
ShiftReport analyze_shift(const TkgDataset& dataset,
                          std::uint32_t window_length,
                          ShiftMode mode = ShiftMode::relation,
                          SplitMask mask = SplitMask::all);

}  // namespace tkgr
