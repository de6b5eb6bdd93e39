#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semlabels/dataio.hpp"
#include "semlabels/taxonomy.hpp"
#include "semlabels/tinynet.hpp"

namespace semlabels {

enum class Explainer { kSaliency, kInputXGradient, kIntegratedGradients };

std::string_view ExplainerName(Explainer e);
Explainer ParseExplainer(std::string_view name);

/// Signed per-feature attribution for one (input, class) pair.
struct Heatmap {
  std::vector<double> values;
  int explained_class = 0;
  Explainer explainer = Explainer::kSaliency;
};

/// |d logit_c / d x|.
Heatmap Saliency(const ModelParams& params, std::span<const double> x, int cls);

/// x * d logit_c / d x.
Heatmap InputXGradient(const ModelParams& params, std::span<const double> x, int cls);

/// (x - baseline) * mean gradient at the midpoints of `steps` equal segments
/// of the straight path from baseline to x. An empty baseline means zeros.
Heatmap IntegratedGradients(const ModelParams& params, std::span<const double> x, int cls,
                            int steps, std::span<const double> baseline = {});

struct ExplainOptions {
  int ig_steps = 32;
  std::vector<double> baseline;  // empty = zeros
};

Heatmap Explain(Explainer explainer, const ModelParams& params, std::span<const double> x,
                int cls, const ExplainOptions& options = {});

/// Heatmaps for every class at once (row c explains class c). Shares the
/// forward passes across classes.
std::vector<Heatmap> ExplainAllClasses(Explainer explainer, const ModelParams& params,
                                       std::span<const double> x,
                                       const ExplainOptions& options = {});

enum class HeatmapMetric {
  kMeanAbsoluteDifference,
  kDeletionCurve,
  kSpearman,
  kProgressiveBinarisation,
};

std::string_view HeatmapMetricName(HeatmapMetric m);
HeatmapMetric ParseHeatmapMetric(std::string_view name);

struct DistanceOptions {
  int deletion_steps = 100;
  std::vector<double> binarisation_quantiles{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
};

struct SpearmanResult {
  double distance = 0.0;
  bool degenerate = false;  // at least one heatmap is constant
};

// The true heatmap comes first: deletion order and binarisation thresholds
// are taken from it, so those two metrics are not symmetric.

double MeanAbsoluteDifference(std::span<const double> truth, std::span<const double> expl);

/// Features ranked by descending |truth| (ties to the lower index). For
/// step s = 1..steps, round(s * n / steps) top features are removed and each
/// curve records the remaining sum of |values| over its own total (an
/// all-zero heatmap gives an all-zero curve). Returns the mean absolute gap
/// between the curves.
double DeletionCurveDistance(std::span<const double> truth, std::span<const double> expl,
                             int steps = 100);

/// (1 - rho) / 2 with average ranks for ties. If either input is constant:
/// 0 when both are constant and equal, otherwise 0.5 flagged degenerate.
SpearmanResult SpearmanDistance(std::span<const double> truth, std::span<const double> expl);

/// Intersection-over-union of the masks |h| >= t for each threshold t taken
/// as a quantile (linear interpolation) of |truth|. Empty union scores 1.
std::vector<double> ProgressiveBinarisationIous(std::span<const double> truth,
                                                std::span<const double> expl,
                                                std::span<const double> quantiles);

/// 1 - mean IoU.
double ProgressiveBinarisationDistance(std::span<const double> truth,
                                       std::span<const double> expl,
                                       std::span<const double> quantiles);

/// Dispatch. Identical inputs always give exactly 0.
double HeatmapDistance(HeatmapMetric metric, std::span<const double> truth,
                       std::span<const double> expl, const DistanceOptions& options = {});

struct DistanceRecord {
  int item = 0;
  int explained_class = 0;
  int lca = 0;
  Explainer explainer = Explainer::kSaliency;
  HeatmapMetric metric = HeatmapMetric::kMeanAbsoluteDifference;
  double value = 0.0;
};

struct StudyConfig {
  std::vector<Explainer> explainers{Explainer::kSaliency, Explainer::kInputXGradient,
                                    Explainer::kIntegratedGradients};
  std::vector<HeatmapMetric> metrics{
      HeatmapMetric::kMeanAbsoluteDifference, HeatmapMetric::kDeletionCurve,
      HeatmapMetric::kSpearman, HeatmapMetric::kProgressiveBinarisation};
  ExplainOptions explain;
  DistanceOptions distance;
  int max_items = 0;  // 0 = all items
};

/// For every item, class, explainer and metric: distance between the
/// heatmap of the true class and that of the class, tagged with their LCA
/// height. Records are ordered item, class, explainer, metric.
std::vector<DistanceRecord> DistanceVsLcaStudy(const ModelParams& params, const Dataset& data,
                                               const Taxonomy& tax, const StudyConfig& cfg);

/// `item,class,lca,explainer,metric,value`.
std::string StudyToCsv(std::span<const DistanceRecord> records);

}  // namespace semlabels
