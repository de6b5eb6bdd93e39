#include "semlabels/hiermetrics.hpp"

#include <algorithm>
#include <cstdio>

#include "semlabels/error.hpp"

namespace semlabels {
namespace {

void CheckInputs(const Rankings& ranked, std::span<const int> truths) {
  if (ranked.size() != truths.size()) {
    throw Error(ErrorCode::kDimMismatch, "rankings and truths differ in length");
  }
  if (truths.empty()) throw Error(ErrorCode::kEmptyDataset, "no items to score");
}

void CheckK(const Rankings& ranked, int k) {
  if (k < 1) throw Error(ErrorCode::kBadK, "k must be >= 1");
  for (const auto& r : ranked) {
    if (static_cast<int>(r.size()) < k) {
      throw Error(ErrorCode::kBadK, "k = " + std::to_string(k) + " exceeds a ranking of length " +
                                        std::to_string(r.size()));
    }
  }
}

std::size_t MinRankingLength(const Rankings& ranked) {
  std::size_t shortest = ranked.empty() ? 0 : ranked.front().size();
  for (const auto& r : ranked) shortest = std::min(shortest, r.size());
  return shortest;
}

std::string FormatValue(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

}  // namespace

double ErrorAtK(const Rankings& ranked, std::span<const int> truths, int k, int level,
                const Taxonomy& tax) {
  CheckInputs(ranked, truths);
  if (level < 0 || level >= tax.num_levels()) {
    throw Error(ErrorCode::kLevelOutOfRange, "level " + std::to_string(level));
  }
  CheckK(ranked, k);
  std::size_t errors = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const int truth_node = tax.ancestor_at_level(truths[i], level);
    bool hit = false;
    for (int j = 0; j < k && !hit; ++j) {
      hit = tax.ancestor_at_level(ranked[i][j], level) == truth_node;
    }
    if (!hit) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(truths.size());
}

std::optional<double> MistakeSeverity(std::span<const int> top1, std::span<const int> truths,
                                      const Taxonomy& tax, int level) {
  if (top1.size() != truths.size()) {
    throw Error(ErrorCode::kDimMismatch, "predictions and truths differ in length");
  }
  if (level < 0 || level >= tax.num_levels()) {
    throw Error(ErrorCode::kLevelOutOfRange, "level " + std::to_string(level));
  }
  double total = 0.0;
  std::size_t mistakes = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const int height = tax.lca_height(top1[i], truths[i]);
    if (height > level) {
      total += height - level;
      ++mistakes;
    }
  }
  if (mistakes == 0) return std::nullopt;
  return total / static_cast<double>(mistakes);
}

double HdAtK(const Rankings& ranked, std::span<const int> truths, const Taxonomy& tax, int k) {
  CheckInputs(ranked, truths);
  CheckK(ranked, k);
  double total = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    int sum = 0;
    for (int j = 0; j < k; ++j) sum += tax.lca_height(truths[i], ranked[i][j]);
    total += static_cast<double>(sum) / k;
  }
  return total / static_cast<double>(truths.size());
}

MetricsReport FullReport(const Rankings& ranked, std::span<const int> truths,
                         const Taxonomy& tax) {
  CheckInputs(ranked, truths);
  const int available = static_cast<int>(MinRankingLength(ranked));
  if (available < 1) throw Error(ErrorCode::kBadK, "empty ranking");
  const int num_classes = tax.num_classes();

  std::vector<int> top1(truths.size());
  for (std::size_t i = 0; i < truths.size(); ++i) top1[i] = ranked[i][0];

  MetricsReport report;
  // A single-level taxonomy still reports level 0.
  const int last_level = std::max(tax.num_levels() - 2, 0);
  for (int level = 0; level <= last_level; ++level) {
    LevelMetrics row;
    row.level = level;
    for (int k : {1, 5}) {
      const int effective = std::min(k, num_classes);
      if (effective > available) continue;
      const double e = ErrorAtK(ranked, truths, effective, level, tax);
      (k == 1 ? row.error_at_1 : row.error_at_5) = e;
    }
    row.mistake_severity = MistakeSeverity(top1, truths, tax, level);
    report.levels.push_back(row);
  }
  for (int k : {1, 5, 20}) {
    HdMetric hd{k, std::nullopt};
    const int effective = std::min(k, num_classes);
    if (effective <= available) hd.value = HdAtK(ranked, truths, tax, effective);
    report.hd.push_back(hd);
  }
  return report;
}

std::string ReportToCsv(const MetricsReport& report) {
  std::string out = "level,metric,value\n";
  for (const auto& row : report.levels) {
    const std::string level = std::to_string(row.level);
    out += level + ",error_at_1," + FormatValue(row.error_at_1) + "\n";
    out += level + ",error_at_5," + FormatValue(row.error_at_5) + "\n";
    out += level + ",mistake_severity," + FormatValue(row.mistake_severity) + "\n";
  }
  for (const auto& hd : report.hd) {
    out += "all,hd_at_" + std::to_string(hd.k) + "," + FormatValue(hd.value) + "\n";
  }
  return out;
}

}  // namespace semlabels
