#include "semlabels/attribution.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "test_support.hpp"

namespace semlabels {
namespace {

using testing::T4;

ModelParams LinearModel(const Matrix& w) {
  ModelParams p;
  p.layer_sizes = {static_cast<int>(w.cols()), static_cast<int>(w.rows())};
  p.layers.push_back(DenseLayer{w, std::vector<double>(w.rows(), 0.0)});
  return p;
}

ModelParams RandomNet(std::vector<int> sizes, std::uint64_t seed) {
  ModelParams p = InitModel(sizes, seed);
  Rng rng(seed * 31 + 7);
  for (auto& layer : p.layers) {
    for (double& b : layer.bias) b = 0.2 * rng.Normal();
  }
  return p;
}

std::vector<double> RandomVector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.Normal();
  return v;
}

double Logit(const ModelParams& p, std::span<const double> x, int cls) {
  return ForwardLogits(p, x).logits[cls];
}

TEST(Explainers, LinearModelClosedForms) {
  const ModelParams p = LinearModel(Matrix(1, 2, {1, 2}));
  const std::vector<double> x{3, 4};
  EXPECT_EQ(Saliency(p, x, 0).values, (std::vector<double>{1, 2}));
  EXPECT_EQ(InputXGradient(p, x, 0).values, (std::vector<double>{3, 8}));
  for (int steps : {1, 2, 7, 32, 128}) {
    EXPECT_EQ(IntegratedGradients(p, x, 0, steps).values, (std::vector<double>{3, 8}));
  }
  const std::vector<double> neg{-3, -4};
  EXPECT_EQ(InputXGradient(p, neg, 0).values, (std::vector<double>{-3, -8}));
  const ModelParams signed_w = LinearModel(Matrix(1, 2, {-1, 2}));
  EXPECT_EQ(Saliency(signed_w, x, 0).values, (std::vector<double>{1, 2}));
}

TEST(Explainers, ZeroCases) {
  const std::vector<double> x{3, 4};
  const ModelParams zero = LinearModel(Matrix(2, 2, 0.0));
  EXPECT_EQ(Saliency(zero, x, 1).values, (std::vector<double>{0, 0}));
  const ModelParams p = RandomNet({2, 5, 3}, 1);
  const std::vector<double> origin{0, 0};
  EXPECT_EQ(InputXGradient(p, origin, 2).values, (std::vector<double>{0, 0}));
  EXPECT_EQ(IntegratedGradients(p, x, 1, 16, x).values, (std::vector<double>{0, 0}));
}

TEST(Explainers, Errors) {
  const ModelParams p = RandomNet({2, 4, 3}, 2);
  const std::vector<double> x{1, 2};
  EXPECT_ERROR_CODE(IntegratedGradients(p, x, 0, 0), ErrorCode::kBadConfig);
  EXPECT_ERROR_CODE(IntegratedGradients(p, x, 0, 4, std::vector<double>{1}),
                    ErrorCode::kDimMismatch);
  EXPECT_ERROR_CODE(Saliency(p, x, 3), ErrorCode::kClassOutOfRange);
  EXPECT_ERROR_CODE(Saliency(p, std::vector<double>{1}, 0), ErrorCode::kDimMismatch);
  EXPECT_ERROR_CODE(ParseExplainer("gradcam"), ErrorCode::kUnknownExplainer);
}

TEST(Explainers, NamesRoundTrip) {
  for (Explainer e : {Explainer::kSaliency, Explainer::kInputXGradient,
                      Explainer::kIntegratedGradients}) {
    EXPECT_EQ(ParseExplainer(ExplainerName(e)), e);
  }
  EXPECT_EQ(ExplainerName(Explainer::kInputXGradient), "input_x_gradient");
}

TEST(Explainers, MatchFiniteDifferences) {
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const ModelParams p = RandomNet({5, 8, 6, 4}, 50 + trial);
    const auto x = RandomVector(rng, 5);
    for (int cls = 0; cls < 4; ++cls) {
      const auto sal = Saliency(p, x, cls).values;
      const auto ixg = InputXGradient(p, x, cls).values;
      for (int i = 0; i < 5; ++i) {
        const double eps = 1e-6;
        auto xp = x, xm = x;
        xp[i] += eps;
        xm[i] -= eps;
        const double fd = (Logit(p, xp, cls) - Logit(p, xm, cls)) / (2 * eps);
        const double scale = std::max(1.0, std::abs(fd));
        EXPECT_NEAR(sal[i], std::abs(fd), 1e-6 * scale);
        EXPECT_NEAR(ixg[i], x[i] * fd, 1e-6 * scale * std::max(1.0, std::abs(x[i])));
      }
    }
  }
}

TEST(Explainers, IntegratedGradientsCompletenessOnInitialisedNets) {
  Rng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const ModelParams p = InitModel(std::vector<int>{6, 10, 8, 5}, 70 + trial);
    const auto x = RandomVector(rng, 6);
    const std::vector<double> zero(6, 0.0);
    const int cls = trial % 5;
    const double target = Logit(p, x, cls) - Logit(p, zero, cls);
    for (auto [steps, tol] : {std::pair{128, 1e-3}, std::pair{8, 1e-1}}) {
      double s = 0.0;
      for (double v : IntegratedGradients(p, x, cls, steps).values) s += v;
      EXPECT_LE(std::abs(s - target), tol) << trial << " steps " << steps;
    }
  }
}

TEST(Explainers, IntegratedGradientsMidpointOracle) {
  Rng rng(45);
  const ModelParams p = RandomNet({4, 6, 3}, 11);
  const auto x = RandomVector(rng, 4);
  const auto baseline = RandomVector(rng, 4);
  const int steps = 5, cls = 1;
  std::vector<double> expected(4, 0.0);
  for (int s = 0; s < steps; ++s) {
    const double alpha = (s + 0.5) / steps;
    std::vector<double> point(4);
    for (int i = 0; i < 4; ++i) point[i] = baseline[i] + alpha * (x[i] - baseline[i]);
    for (int i = 0; i < 4; ++i) {
      const double eps = 1e-6;
      auto pp = point, pm = point;
      pp[i] += eps;
      pm[i] -= eps;
      expected[i] += (Logit(p, pp, cls) - Logit(p, pm, cls)) / (2 * eps) / steps;
    }
  }
  const auto ig = IntegratedGradients(p, x, cls, steps, baseline).values;
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(ig[i], (x[i] - baseline[i]) * expected[i], 1e-6);
}

TEST(Explainers, IntegratedGradientsConvergesWithBiases) {
  Rng rng(46);
  const int step_grid[] = {8, 32, 128, 1024};
  std::vector<double> mean_gap(4, 0.0);
  for (int trial = 0; trial < 40; ++trial) {
    const ModelParams p = RandomNet({6, 10, 5}, 90 + trial);
    const auto x = RandomVector(rng, 6);
    std::vector<double> baseline(6, 0.0);
    if (trial % 2) baseline = RandomVector(rng, 6);
    const int cls = trial % 5;
    const double target = Logit(p, x, cls) - Logit(p, baseline, cls);
    for (int k = 0; k < 4; ++k) {
      double s = 0.0;
      for (double v : IntegratedGradients(p, x, cls, step_grid[k], baseline).values) s += v;
      mean_gap[k] += std::abs(s - target) / 40;
    }
  }
  for (int k = 1; k < 4; ++k) EXPECT_LT(mean_gap[k], mean_gap[k - 1]);
  EXPECT_LE(mean_gap[3], 1e-3);
}

TEST(Explainers, AllClassesMatchesPerClass) {
  Rng rng(43);
  const ModelParams p = RandomNet({4, 7, 5}, 3);
  const auto x = RandomVector(rng, 4);
  ExplainOptions opts;
  opts.ig_steps = 9;
  for (Explainer e : {Explainer::kSaliency, Explainer::kInputXGradient,
                      Explainer::kIntegratedGradients}) {
    const auto all = ExplainAllClasses(e, p, x, opts);
    ASSERT_EQ(all.size(), 5u);
    for (int c = 0; c < 5; ++c) {
      const Heatmap one = Explain(e, p, x, c, opts);
      EXPECT_EQ(all[c].explained_class, c);
      EXPECT_EQ(all[c].explainer, e);
      for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(all[c].values[i], one.values[i], 1e-12);
    }
  }
}

TEST(HeatmapMetrics, Examples) {
  const std::vector<double> a{1, 2, 3}, b{3, 2, 1};
  EXPECT_DOUBLE_EQ(HeatmapDistance(HeatmapMetric::kSpearman, a, b), 1.0);
  const std::vector<double> u{0, 1}, v{1, 0};
  EXPECT_DOUBLE_EQ(HeatmapDistance(HeatmapMetric::kMeanAbsoluteDifference, u, v), 1.0);
}

TEST(HeatmapMetrics, DisjointSupportBinarisation) {
  // Every decile threshold of |truth| is positive, so both masks are the
  // supports at every step.
  const std::vector<double> truth{1, 1, 1, 0}, expl{0, 0, 0, 1};
  const DistanceOptions opts;
  for (double iou : ProgressiveBinarisationIous(truth, expl, opts.binarisation_quantiles)) {
    EXPECT_EQ(iou, 0.0);
  }
  EXPECT_EQ(HeatmapDistance(HeatmapMetric::kProgressiveBinarisation, truth, expl), 1.0);
  // Half support: thresholds at 0 keep every pixel in both masks, positive
  // thresholds separate them.
  const std::vector<double> t2{1, 1, 0, 0}, e2{0, 0, 1, 1};
  const auto ious = ProgressiveBinarisationIous(t2, e2, opts.binarisation_quantiles);
  ASSERT_EQ(ious.size(), 9u);
  for (std::size_t q = 0; q < 9; ++q) EXPECT_EQ(ious[q], q < 3 ? 1.0 : 0.0) << q;
}

TEST(HeatmapMetrics, BinarisationQuantilesAndEmptyUnion) {
  const std::vector<double> quant{0.5};
  const std::vector<double> truth{0, 0, 0, 0}, expl{0, 0, 0, 0};
  EXPECT_EQ(ProgressiveBinarisationIous(truth, expl, quant), std::vector<double>{1.0});
  // Threshold = median of |truth| = 2.5: truth mask {2, 3}, expl mask {1, 2}.
  const std::vector<double> t{1, -2, 3, -4}, e{0, 2.6, -9, 0};
  EXPECT_DOUBLE_EQ(ProgressiveBinarisationIous(t, e, quant)[0], 1.0 / 3.0);
  const std::vector<double> above_max{1.5};
  EXPECT_ERROR_CODE(ProgressiveBinarisationIous(t, e, above_max), ErrorCode::kBadConfig);
}

TEST(HeatmapMetrics, DeletionCurveHandValues) {
  // truth order: 0, 1, 2, 3. With 4 steps the truth curve is 6/10, 3/10,
  // 1/10, 0; the uniform curve is 3/4, 1/2, 1/4, 0.
  const std::vector<double> truth{4, 3, 2, 1}, flat{1, 1, 1, 1};
  EXPECT_NEAR(DeletionCurveDistance(truth, flat, 4), (0.15 + 0.2 + 0.15 + 0.0) / 4, 1e-15);
  const std::vector<double> zero{0, 0, 0, 0};
  // All-zero explanation: curve of zeros against the truth curve.
  EXPECT_NEAR(DeletionCurveDistance(truth, zero, 4), (0.6 + 0.3 + 0.1) / 4, 1e-15);
  EXPECT_EQ(DeletionCurveDistance(zero, zero, 4), 0.0);
  // Scale free.
  const std::vector<double> scaled{40, 30, 20, 10};
  EXPECT_EQ(DeletionCurveDistance(truth, scaled), 0.0);
  EXPECT_ERROR_CODE(DeletionCurveDistance(truth, flat, 0), ErrorCode::kBadConfig);
}

TEST(HeatmapMetrics, SpearmanTiesAndDegenerate) {
  const std::vector<double> c1{2, 2, 2}, c2{5, 5, 5}, r{1, 2, 3};
  EXPECT_EQ(SpearmanDistance(c1, c1).distance, 0.0);
  const SpearmanResult d = SpearmanDistance(c1, c2);
  EXPECT_EQ(d.distance, 0.5);
  EXPECT_TRUE(d.degenerate);
  EXPECT_EQ(SpearmanDistance(r, c2).distance, 0.5);
  EXPECT_FALSE(SpearmanDistance(r, r).degenerate);
  // Average ranks: [1, 1, 2] -> ranks [1.5, 1.5, 3]; rho with [1, 2, 3] is
  // sqrt(3)/2.
  const std::vector<double> tied{1, 1, 2};
  EXPECT_NEAR(SpearmanDistance(tied, r).distance, (1.0 - std::sqrt(3.0) / 2.0) / 2.0, 1e-15);
}

TEST(HeatmapMetrics, ErrorsAndNames) {
  const std::vector<double> a{1, 2}, b{1, 2, 3};
  for (HeatmapMetric m : {HeatmapMetric::kMeanAbsoluteDifference, HeatmapMetric::kDeletionCurve,
                          HeatmapMetric::kSpearman, HeatmapMetric::kProgressiveBinarisation}) {
    EXPECT_ERROR_CODE(HeatmapDistance(m, a, b), ErrorCode::kShapeMismatch);
    EXPECT_EQ(ParseHeatmapMetric(HeatmapMetricName(m)), m);
  }
  EXPECT_ERROR_CODE(ParseHeatmapMetric("ssim"), ErrorCode::kUnknownMetric);
}

TEST(HeatmapMetricsProperty, IdentityBoundsAndSymmetry) {
  Rng rng(44);
  const HeatmapMetric all[] = {HeatmapMetric::kMeanAbsoluteDifference,
                               HeatmapMetric::kDeletionCurve, HeatmapMetric::kSpearman,
                               HeatmapMetric::kProgressiveBinarisation};
  bool deletion_asymmetric = false, binarisation_asymmetric = false;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.Below(40);
    auto a = RandomVector(rng, n), b = RandomVector(rng, n);
    if (trial % 7 == 0) {
      for (double& v : b) v = std::round(v);  // ties
    }
    for (HeatmapMetric m : all) {
      ASSERT_EQ(HeatmapDistance(m, a, a), 0.0);
      const double d = HeatmapDistance(m, a, b);
      ASSERT_GE(d, 0.0);
      if (m != HeatmapMetric::kMeanAbsoluteDifference) ASSERT_LE(d, 1.0 + 1e-15);
    }
    ASSERT_DOUBLE_EQ(HeatmapDistance(HeatmapMetric::kMeanAbsoluteDifference, a, b),
                     HeatmapDistance(HeatmapMetric::kMeanAbsoluteDifference, b, a));
    ASSERT_NEAR(HeatmapDistance(HeatmapMetric::kSpearman, a, b),
                HeatmapDistance(HeatmapMetric::kSpearman, b, a), 1e-15);
    deletion_asymmetric |= std::abs(HeatmapDistance(HeatmapMetric::kDeletionCurve, a, b) -
                                    HeatmapDistance(HeatmapMetric::kDeletionCurve, b, a)) > 1e-9;
    binarisation_asymmetric |=
        std::abs(HeatmapDistance(HeatmapMetric::kProgressiveBinarisation, a, b) -
                 HeatmapDistance(HeatmapMetric::kProgressiveBinarisation, b, a)) > 1e-9;
  }
  EXPECT_TRUE(deletion_asymmetric);
  EXPECT_TRUE(binarisation_asymmetric);
}

TEST(DistanceStudy, CardinalityOrderAndSelfPairZeros) {
  const Taxonomy tax = T4();
  const std::vector<double> scales{1.0, 2.0};
  const DatasetPair data = GenerateHierarchicalDataset(tax, 5, 10, scales, 1);
  const ModelParams p = RandomNet({5, 6, 4}, 9);
  StudyConfig cfg;
  cfg.explain.ig_steps = 8;
  const auto records = DistanceVsLcaStudy(p, data.test, tax, cfg);
  ASSERT_EQ(records.size(), data.test.size() * 4 * 3 * 4);
  std::size_t i = 0;
  for (std::size_t item = 0; item < data.test.size(); ++item) {
    for (int cls = 0; cls < 4; ++cls) {
      for (Explainer e : cfg.explainers) {
        for (HeatmapMetric m : cfg.metrics) {
          const DistanceRecord& r = records[i++];
          ASSERT_EQ(r.item, static_cast<int>(item));
          ASSERT_EQ(r.explained_class, cls);
          ASSERT_EQ(r.explainer, e);
          ASSERT_EQ(r.metric, m);
          ASSERT_EQ(r.lca, tax.lca_height(data.test.labels[item], cls));
          if (r.lca == 0) ASSERT_EQ(r.value, 0.0);
        }
      }
    }
  }
  cfg.max_items = 3;
  cfg.metrics = {HeatmapMetric::kSpearman};
  const auto few = DistanceVsLcaStudy(p, data.test, tax, cfg);
  EXPECT_EQ(few.size(), 3u * 4 * 3);
  const std::string csv = StudyToCsv(few);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "item,class,lca,explainer,metric,value");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 36);
}

TEST(DistanceStudy, ClassCountMismatch) {
  const Taxonomy tax = T4();
  const std::vector<double> scales{1.0, 2.0};
  const DatasetPair data = GenerateHierarchicalDataset(tax, 5, 10, scales, 1);
  EXPECT_ERROR_CODE(DistanceVsLcaStudy(RandomNet({5, 6, 3}, 9), data.test, tax, StudyConfig{}),
                    ErrorCode::kDimMismatch);
}

}  // namespace
}  // namespace semlabels
