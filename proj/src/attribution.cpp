#include "semlabels/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "semlabels/error.hpp"

namespace semlabels {
namespace {

// d logit[cls] / d input, reusing a forward cache.
std::vector<double> InputGradientFromCache(const ModelParams& params, const ForwardCache& cache,
                                           int cls) {
  const auto& last = params.layers.back();
  std::vector<double> delta(last.weights.row(cls).begin(), last.weights.row(cls).end());
  for (int l = static_cast<int>(params.layers.size()) - 2; l >= 0; --l) {
    const auto& out = cache.activations[l + 1];
    for (std::size_t o = 0; o < delta.size(); ++o) {
      if (!(out[o] > 0.0)) delta[o] = 0.0;
    }
    const auto& w = params.layers[l].weights;
    std::vector<double> prev(w.cols(), 0.0);
    for (std::size_t o = 0; o < delta.size(); ++o) {
      if (delta[o] == 0.0) continue;
      const auto row = w.row(o);
      for (std::size_t i = 0; i < prev.size(); ++i) prev[i] += row[i] * delta[o];
    }
    delta = std::move(prev);
  }
  return delta;
}

void CheckClass(const ModelParams& params, int cls) {
  if (cls < 0 || cls >= params.num_classes()) {
    throw Error(ErrorCode::kClassOutOfRange, "class " + std::to_string(cls));
  }
}

std::vector<double> ResolveBaseline(std::span<const double> x, std::span<const double> baseline) {
  if (baseline.empty()) return std::vector<double>(x.size(), 0.0);
  if (baseline.size() != x.size()) {
    throw Error(ErrorCode::kDimMismatch, "baseline and input differ in length");
  }
  return {baseline.begin(), baseline.end()};
}

// Integrated gradients for all classes; rows indexed by class.
std::vector<std::vector<double>> IntegratedGradientsAll(const ModelParams& params,
                                                        std::span<const double> x, int steps,
                                                        std::span<const double> baseline,
                                                        const std::vector<int>& classes) {
  if (steps < 1) throw Error(ErrorCode::kBadConfig, "integrated gradients needs steps >= 1");
  const std::vector<double> base = ResolveBaseline(x, baseline);
  const std::size_t d = x.size();
  std::vector<std::vector<double>> sums(classes.size(), std::vector<double>(d, 0.0));
  std::vector<double> point(d);
  for (int s = 0; s < steps; ++s) {
    const double alpha = (s + 0.5) / steps;
    for (std::size_t i = 0; i < d; ++i) point[i] = base[i] + alpha * (x[i] - base[i]);
    const ForwardResult fwd = ForwardLogits(params, point);
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const auto g = InputGradientFromCache(params, fwd.cache, classes[c]);
      for (std::size_t i = 0; i < d; ++i) sums[c][i] += g[i];
    }
  }
  for (auto& row : sums) {
    for (std::size_t i = 0; i < d; ++i) row[i] = (x[i] - base[i]) * row[i] / steps;
  }
  return sums;
}

bool Identical(std::span<const double> a, std::span<const double> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

void CheckShapes(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kShapeMismatch, "heatmaps have " + std::to_string(a.size()) +
                                               " and " + std::to_string(b.size()) + " values");
  }
}

std::vector<double> AverageRanks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

bool IsConstant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

double Quantile(std::vector<double> sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::string_view ExplainerName(Explainer e) {
  switch (e) {
    case Explainer::kSaliency: return "saliency";
    case Explainer::kInputXGradient: return "input_x_gradient";
    case Explainer::kIntegratedGradients: return "integrated_gradients";
  }
  return "unknown";
}

Explainer ParseExplainer(std::string_view name) {
  for (auto e : {Explainer::kSaliency, Explainer::kInputXGradient,
                 Explainer::kIntegratedGradients}) {
    if (name == ExplainerName(e)) return e;
  }
  throw Error(ErrorCode::kUnknownExplainer, "'" + std::string(name) + "'");
}

std::string_view HeatmapMetricName(HeatmapMetric m) {
  switch (m) {
    case HeatmapMetric::kMeanAbsoluteDifference: return "mean_absolute_difference";
    case HeatmapMetric::kDeletionCurve: return "deletion_curve";
    case HeatmapMetric::kSpearman: return "spearman";
    case HeatmapMetric::kProgressiveBinarisation: return "progressive_binarisation";
  }
  return "unknown";
}

HeatmapMetric ParseHeatmapMetric(std::string_view name) {
  for (auto m : {HeatmapMetric::kMeanAbsoluteDifference, HeatmapMetric::kDeletionCurve,
                 HeatmapMetric::kSpearman, HeatmapMetric::kProgressiveBinarisation}) {
    if (name == HeatmapMetricName(m)) return m;
  }
  throw Error(ErrorCode::kUnknownMetric, "'" + std::string(name) + "'");
}

Heatmap Saliency(const ModelParams& params, std::span<const double> x, int cls) {
  CheckClass(params, cls);
  const ForwardResult fwd = ForwardLogits(params, x);
  Heatmap h{InputGradientFromCache(params, fwd.cache, cls), cls, Explainer::kSaliency};
  for (double& v : h.values) v = std::abs(v);
  return h;
}

Heatmap InputXGradient(const ModelParams& params, std::span<const double> x, int cls) {
  CheckClass(params, cls);
  const ForwardResult fwd = ForwardLogits(params, x);
  Heatmap h{InputGradientFromCache(params, fwd.cache, cls), cls, Explainer::kInputXGradient};
  for (std::size_t i = 0; i < x.size(); ++i) h.values[i] *= x[i];
  return h;
}

Heatmap IntegratedGradients(const ModelParams& params, std::span<const double> x, int cls,
                            int steps, std::span<const double> baseline) {
  CheckClass(params, cls);
  if (static_cast<int>(x.size()) != params.input_dim()) {
    throw Error(ErrorCode::kDimMismatch, "input length " + std::to_string(x.size()));
  }
  auto rows = IntegratedGradientsAll(params, x, steps, baseline, {cls});
  return Heatmap{std::move(rows.front()), cls, Explainer::kIntegratedGradients};
}

Heatmap Explain(Explainer explainer, const ModelParams& params, std::span<const double> x,
                int cls, const ExplainOptions& options) {
  switch (explainer) {
    case Explainer::kSaliency: return Saliency(params, x, cls);
    case Explainer::kInputXGradient: return InputXGradient(params, x, cls);
    case Explainer::kIntegratedGradients:
      return IntegratedGradients(params, x, cls, options.ig_steps, options.baseline);
  }
  throw Error(ErrorCode::kUnknownExplainer, "unhandled explainer");
}

std::vector<Heatmap> ExplainAllClasses(Explainer explainer, const ModelParams& params,
                                       std::span<const double> x,
                                       const ExplainOptions& options) {
  const int num_classes = params.num_classes();
  std::vector<Heatmap> out;
  out.reserve(num_classes);
  if (explainer == Explainer::kIntegratedGradients) {
    if (static_cast<int>(x.size()) != params.input_dim()) {
      throw Error(ErrorCode::kDimMismatch, "input length " + std::to_string(x.size()));
    }
    std::vector<int> classes(num_classes);
    std::iota(classes.begin(), classes.end(), 0);
    auto rows = IntegratedGradientsAll(params, x, options.ig_steps, options.baseline, classes);
    for (int c = 0; c < num_classes; ++c) out.push_back({std::move(rows[c]), c, explainer});
    return out;
  }
  const ForwardResult fwd = ForwardLogits(params, x);
  for (int c = 0; c < num_classes; ++c) {
    Heatmap h{InputGradientFromCache(params, fwd.cache, c), c, explainer};
    for (std::size_t i = 0; i < x.size(); ++i) {
      h.values[i] = explainer == Explainer::kSaliency ? std::abs(h.values[i])
                                                      : h.values[i] * x[i];
    }
    out.push_back(std::move(h));
  }
  return out;
}

double MeanAbsoluteDifference(std::span<const double> truth, std::span<const double> expl) {
  CheckShapes(truth, expl);
  if (truth.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) s += std::abs(truth[i] - expl[i]);
  return s / static_cast<double>(truth.size());
}

double DeletionCurveDistance(std::span<const double> truth, std::span<const double> expl,
                             int steps) {
  CheckShapes(truth, expl);
  if (steps < 1) throw Error(ErrorCode::kBadConfig, "deletion curve needs steps >= 1");
  const std::size_t n = truth.size();
  if (n == 0) return 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(truth[a]) > std::abs(truth[b]);
  });
  // suffix[m] = mass left after removing the first m ranked features.
  std::vector<double> suffix_t(n + 1, 0.0);
  std::vector<double> suffix_e(n + 1, 0.0);
  for (std::size_t m = n; m-- > 0;) {
    suffix_t[m] = suffix_t[m + 1] + std::abs(truth[order[m]]);
    suffix_e[m] = suffix_e[m + 1] + std::abs(expl[order[m]]);
  }
  const double total_t = suffix_t[0];
  const double total_e = suffix_e[0];
  double gap = 0.0;
  for (int s = 1; s <= steps; ++s) {
    const auto removed = static_cast<std::size_t>(
        std::llround(static_cast<double>(s) * static_cast<double>(n) / steps));
    const double ct = total_t > 0.0 ? suffix_t[removed] / total_t : 0.0;
    const double ce = total_e > 0.0 ? suffix_e[removed] / total_e : 0.0;
    gap += std::abs(ct - ce);
  }
  return gap / steps;
}

SpearmanResult SpearmanDistance(std::span<const double> truth, std::span<const double> expl) {
  CheckShapes(truth, expl);
  if (Identical(truth, expl)) return {0.0, IsConstant(truth)};
  if (truth.empty() || IsConstant(truth) || IsConstant(expl)) return {0.5, true};
  const auto rt = AverageRanks(truth);
  const auto re = AverageRanks(expl);
  const double mean = 0.5 * (static_cast<double>(truth.size()) + 1.0);
  double cov = 0.0, vt = 0.0, ve = 0.0;
  for (std::size_t i = 0; i < rt.size(); ++i) {
    const double a = rt[i] - mean;
    const double b = re[i] - mean;
    cov += a * b;
    vt += a * a;
    ve += b * b;
  }
  const double rho = std::clamp(cov / std::sqrt(vt * ve), -1.0, 1.0);
  return {(1.0 - rho) / 2.0, false};
}

std::vector<double> ProgressiveBinarisationIous(std::span<const double> truth,
                                                std::span<const double> expl,
                                                std::span<const double> quantiles) {
  CheckShapes(truth, expl);
  std::vector<double> sorted(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) sorted[i] = std::abs(truth[i]);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> ious;
  ious.reserve(quantiles.size());
  for (double q : quantiles) {
    if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::kBadConfig, "quantile outside [0, 1]");
    if (truth.empty()) {
      ious.push_back(1.0);
      continue;
    }
    const double t = Quantile(sorted, q);
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool a = std::abs(truth[i]) >= t;
      const bool b = std::abs(expl[i]) >= t;
      inter += (a && b);
      uni += (a || b);
    }
    ious.push_back(uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni));
  }
  return ious;
}

double ProgressiveBinarisationDistance(std::span<const double> truth,
                                       std::span<const double> expl,
                                       std::span<const double> quantiles) {
  if (quantiles.empty()) throw Error(ErrorCode::kBadConfig, "no binarisation quantiles");
  const auto ious = ProgressiveBinarisationIous(truth, expl, quantiles);
  double mean = 0.0;
  for (double v : ious) mean += v;
  return 1.0 - mean / static_cast<double>(ious.size());
}

double HeatmapDistance(HeatmapMetric metric, std::span<const double> truth,
                       std::span<const double> expl, const DistanceOptions& options) {
  CheckShapes(truth, expl);
  if (Identical(truth, expl)) return 0.0;
  switch (metric) {
    case HeatmapMetric::kMeanAbsoluteDifference: return MeanAbsoluteDifference(truth, expl);
    case HeatmapMetric::kDeletionCurve:
      return DeletionCurveDistance(truth, expl, options.deletion_steps);
    case HeatmapMetric::kSpearman: return SpearmanDistance(truth, expl).distance;
    case HeatmapMetric::kProgressiveBinarisation:
      return ProgressiveBinarisationDistance(truth, expl, options.binarisation_quantiles);
  }
  throw Error(ErrorCode::kUnknownMetric, "unhandled metric");
}

std::vector<DistanceRecord> DistanceVsLcaStudy(const ModelParams& params, const Dataset& data,
                                               const Taxonomy& tax, const StudyConfig& cfg) {
  const int num_classes = params.num_classes();
  if (num_classes != tax.num_classes()) {
    throw Error(ErrorCode::kDimMismatch, "model has " + std::to_string(num_classes) +
                                             " outputs, taxonomy has " +
                                             std::to_string(tax.num_classes()) + " classes");
  }
  ValidateDataset(data, num_classes);
  const std::size_t items = cfg.max_items > 0
                                ? std::min<std::size_t>(data.size(), cfg.max_items)
                                : data.size();
  std::vector<DistanceRecord> records;
  records.reserve(items * num_classes * cfg.explainers.size() * cfg.metrics.size());
  std::vector<std::vector<Heatmap>> maps(cfg.explainers.size());
  for (std::size_t item = 0; item < items; ++item) {
    const auto x = data.features.row(item);
    const int truth = data.labels[item];
    for (std::size_t e = 0; e < cfg.explainers.size(); ++e) {
      maps[e] = ExplainAllClasses(cfg.explainers[e], params, x, cfg.explain);
    }
    for (int c = 0; c < num_classes; ++c) {
      const int lca = tax.lca_height(truth, c);
      for (std::size_t e = 0; e < cfg.explainers.size(); ++e) {
        const auto& truth_map = maps[e][truth].values;
        const auto& class_map = maps[e][c].values;
        for (HeatmapMetric m : cfg.metrics) {
          records.push_back(DistanceRecord{static_cast<int>(item), c, lca, cfg.explainers[e], m,
                                           HeatmapDistance(m, truth_map, class_map,
                                                           cfg.distance)});
        }
      }
    }
  }
  return records;
}

std::string StudyToCsv(std::span<const DistanceRecord> records) {
  std::string out = "item,class,lca,explainer,metric,value\n";
  char buf[32];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%.17g", r.value);
    out += std::to_string(r.item) + ',' + std::to_string(r.explained_class) + ',' +
           std::to_string(r.lca) + ',' + std::string(ExplainerName(r.explainer)) + ',' +
           std::string(HeatmapMetricName(r.metric)) + ',' + buf + '\n';
  }
  return out;
}

}  // namespace semlabels
