#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semlabels/taxonomy.hpp"

namespace semlabels {

/// Per-item class rankings, best first. Lists may be shorter than C.
using Rankings = std::vector<std::vector<int>>;

/// Fraction of items for which none of the first k predictions shares the
/// truth's ancestor at `level`.
double ErrorAtK(const Rankings& ranked, std::span<const int> truths, int k, int level,
                const Taxonomy& tax);

/// Mean LCA height, counted in levels above `level`, over items whose top-1
/// prediction and truth project to different level-`level` nodes. nullopt
/// when there are no such mistakes.
std::optional<double> MistakeSeverity(std::span<const int> top1, std::span<const int> truths,
                                      const Taxonomy& tax, int level);

/// Mean over items of the mean LCA height between the truth and each of the
/// first k predictions. Correct predictions contribute zero terms.
double HdAtK(const Rankings& ranked, std::span<const int> truths, const Taxonomy& tax, int k);

struct LevelMetrics {
  int level = 0;
  std::optional<double> error_at_1;
  std::optional<double> error_at_5;
  std::optional<double> mistake_severity;
};

struct HdMetric {
  int k = 0;                     // nominal k (1, 5 or 20)
  std::optional<double> value;   // computed at min(k, C)
};

/// Entries whose effective k (clipped to C) exceeds the ranking length are
/// left empty.
struct MetricsReport {
  std::vector<LevelMetrics> levels;  // 0 .. L-2
  std::vector<HdMetric> hd;          // k = 1, 5, 20
};

MetricsReport FullReport(const Rankings& ranked, std::span<const int> truths,
                         const Taxonomy& tax);

/// CSV with header `level,metric,value`. HD rows use level `all`, empty
/// entries are written as `NA`.
std::string ReportToCsv(const MetricsReport& report);

}  // namespace semlabels
