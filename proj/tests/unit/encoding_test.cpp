#include "semlabels/encoding.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "test_support.hpp"

namespace semlabels {
namespace {

using testing::T4;

std::vector<double> Row(const Matrix& m, std::size_t r) {
  auto s = m.row(r);
  return {s.begin(), s.end()};
}

void ExpectRowNear(const Matrix& m, std::size_t r, const std::vector<double>& expected,
                   double tol) {
  ASSERT_EQ(m.cols(), expected.size());
  for (std::size_t c = 0; c < expected.size(); ++c) {
    EXPECT_NEAR(m(r, c), expected[c], tol) << "row " << r << " col " << c;
  }
}

EmbeddingMatrix RandomEmbedding(Rng& rng, int classes, int dim) {
  EmbeddingMatrix em;
  em.rows = Matrix(classes, dim);
  for (double& v : em.rows.data()) v = rng.Normal();
  for (int c = 0; c < classes; ++c) em.class_names.push_back("k" + std::to_string(c));
  em.source = EmbeddingSource::kWordVectors;
  return em;
}

TEST(HierarchyEmbedding, FourLeafTreeWithRootSegment) {
  const EmbeddingMatrix em = BuildHierarchyEmbedding(T4(), {.include_root = true});
  ASSERT_EQ(em.rows.rows(), 4u);
  ASSERT_EQ(em.rows.cols(), 12u);
  EXPECT_EQ(Row(em.rows, 0), (std::vector<double>{1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0}));
  EXPECT_EQ(Row(em.rows, 3), (std::vector<double>{0, 0, 0, 1, 0, 1, 0, 0, 1, 0, 0, 0}));
  EXPECT_EQ(em.class_names, T4().class_names());
  EXPECT_EQ(em.source, EmbeddingSource::kHierarchy);
}

TEST(HierarchyEmbedding, DefaultDropsRootSegment) {
  const EmbeddingMatrix em = BuildHierarchyEmbedding(T4());
  ASSERT_EQ(em.rows.cols(), 8u);
  EXPECT_EQ(Row(em.rows, 0), (std::vector<double>{1, 0, 0, 0, 1, 0, 0, 0}));
  EXPECT_EQ(Row(em.rows, 3), (std::vector<double>{0, 0, 0, 1, 0, 1, 0, 0}));
}

TEST(HierarchyEmbedding, Cifar100FixtureShape) {
  const Taxonomy tax = Taxonomy::Load(testing::FixturePath("cifar100_taxonomy.tsv"));
  const EmbeddingMatrix em = BuildHierarchyEmbedding(tax);
  EXPECT_EQ(em.rows.rows(), 100u);
  EXPECT_EQ(em.rows.cols(), 500u);
  EXPECT_EQ(BuildHierarchyEmbedding(tax, {.include_root = true}).rows.cols(), 600u);
}

TEST(HierarchyEmbedding, SingleLevelTreeKeepsOneSegment) {
  const Taxonomy tax = Taxonomy::Parse("a\tR\nb\tR\n");
  const EmbeddingMatrix em = BuildHierarchyEmbedding(tax);
  EXPECT_EQ(em.rows, Matrix::Identity(2));
}

TEST(WordEmbedding, TableLookupInClassOrder) {
  TokenTable t = ParseTokenVectors("a 1 0\nb 0 1\nc 1 1\nd -1 0\n");
  const std::vector<std::string> names{"a", "b", "c", "d"};
  const EmbeddingMatrix em = BuildWordEmbedding(t, names);
  EXPECT_EQ(em.rows, Matrix(4, 2, {1, 0, 0, 1, 1, 1, -1, 0}));
  EXPECT_EQ(em.source, EmbeddingSource::kWordVectors);
}

TEST(WordEmbedding, NormalizedNamesResolve) {
  TokenTable t = ParseTokenVectors("aquarium_fish 1 2\ncrab 3 4\ncrocodile 5 6\n");
  const std::vector<std::string> names{"Aquarium Fish", "crab", "crocodile"};
  const EmbeddingMatrix em = BuildWordEmbedding(t, names);
  EXPECT_EQ(Row(em.rows, 0), (std::vector<double>{1, 2}));
  EXPECT_EQ(NormalizeClassName("Aquarium Fish"), "aquarium_fish");
}

TEST(WordEmbedding, Errors) {
  TokenTable t = ParseTokenVectors("a 1 0\n");
  const std::vector<std::string> missing{"a", "zebra"};
  EXPECT_ERROR_CODE(BuildWordEmbedding(t, missing), ErrorCode::kMissingToken);
  t.vectors["b"] = {1.0, 2.0, 3.0};
  const std::vector<std::string> both{"a", "b"};
  EXPECT_ERROR_CODE(BuildWordEmbedding(t, both), ErrorCode::kDimensionMismatch);
}

TEST(AugmentedLabels, FourLeafTreeRowWithRootSegment) {
  const EmbeddingMatrix em = BuildHierarchyEmbedding(T4(), {.include_root = true});
  const AugmentedLabels out = BuildAugmentedLabels(em, 0.5);
  ExpectRowNear(out.auxiliary.values, 0, {3.0 / 7, 2.0 / 7, 1.0 / 7, 1.0 / 7}, 1e-15);
  EXPECT_TRUE(out.auxiliary.normalized);
  ExpectRowNear(out.labels.values, 0, {0.714286, 0.142857, 0.071429, 0.071429}, 5e-7);
  ExpectRowNear(out.labels.values, 0, {5.0 / 7, 1.0 / 7, 1.0 / 14, 1.0 / 14}, 1e-15);
  EXPECT_EQ(out.labels.beta, 0.5);
  EXPECT_EQ(out.labels.provenance, EmbeddingSource::kHierarchy);
}

TEST(AugmentedLabels, FourLeafTreeRowDefault) {
  // Without the root segment: cosines 1, 1/2, 0, 0.
  const AugmentedLabels out = BuildAugmentedLabels(BuildHierarchyEmbedding(T4()), 0.4);
  ExpectRowNear(out.auxiliary.values, 0, {2.0 / 3, 1.0 / 3, 0, 0}, 1e-15);
  ExpectRowNear(out.labels.values, 0, {0.8, 0.2, 0, 0}, 1e-15);
  ExpectRowNear(out.labels.values, 3, {0, 0, 0.2, 0.8}, 1e-15);
}

TEST(AugmentedLabels, BetaOneIsExactIdentity) {
  Rng rng(1);
  const AugmentedLabels out = BuildAugmentedLabels(RandomEmbedding(rng, 7, 3), 1.0);
  EXPECT_EQ(out.labels.values, Matrix::Identity(7));
}

TEST(AugmentedLabels, BetaZeroIsAuxiliary) {
  Rng rng(2);
  const AugmentedLabels out = BuildAugmentedLabels(RandomEmbedding(rng, 6, 4), 0.0);
  EXPECT_EQ(out.labels.values, out.auxiliary.values);
}

TEST(AugmentedLabels, NegativeCosinesClampToZero) {
  TokenTable t = ParseTokenVectors("a 1 0\nb 0 1\nc 1 1\nd -1 0\n");
  const std::vector<std::string> names{"a", "b", "c", "d"};
  const AugmentedLabels out = BuildAugmentedLabels(BuildWordEmbedding(t, names), 0.7);
  // Row a: cosines 1, 0, 1/sqrt2, -1 -> 1, 0, 1/sqrt2, 0.
  const double s = 1.0 + 1.0 / std::sqrt(2.0);
  ExpectRowNear(out.auxiliary.values, 0, {1.0 / s, 0, (1.0 / std::sqrt(2.0)) / s, 0}, 1e-15);
  EXPECT_EQ(out.auxiliary.values(3, 0), 0.0);
}

TEST(AugmentedLabels, Errors) {
  Rng rng(3);
  const EmbeddingMatrix em = RandomEmbedding(rng, 3, 2);
  EXPECT_ERROR_CODE(BuildAugmentedLabels(em, -0.1), ErrorCode::kBadBeta);
  EXPECT_ERROR_CODE(BuildAugmentedLabels(em, 1.5), ErrorCode::kBadBeta);
  EXPECT_ERROR_CODE(BuildAugmentedLabels(em, std::nan("")), ErrorCode::kBadBeta);
  EmbeddingMatrix zero = em;
  zero.rows(1, 0) = 0.0;
  zero.rows(1, 1) = 0.0;
  EXPECT_ERROR_CODE(BuildAugmentedLabels(zero, 0.5), ErrorCode::kZeroEmbedding);
}

TEST(AugmentedLabels, DuplicateDirectionsAreReported) {
  TokenTable t = ParseTokenVectors("a 1 2\nb 2 4\nc 0 1\n");
  const std::vector<std::string> names{"a", "b", "c"};
  const AugmentedLabels out = BuildAugmentedLabels(BuildWordEmbedding(t, names), 0.4);
  ASSERT_EQ(out.duplicate_embeddings.size(), 1u);
  EXPECT_EQ(out.duplicate_embeddings[0], (std::pair<int, int>{0, 1}));
  EXPECT_GT(out.labels.values(0, 0), out.labels.values(0, 1));
}

TEST(AugmentedLabelsProperty, RowStochasticWithStrictDiagonalMax) {
  Rng rng(4242);
  for (int trial = 0; trial < 200; ++trial) {
    const int classes = 2 + static_cast<int>(rng.Below(12));
    const int dim = 1 + static_cast<int>(rng.Below(6));
    const EmbeddingMatrix em = RandomEmbedding(rng, classes, dim);
    const double beta = trial % 10 == 0 ? 1.0 : rng.Uniform(1e-3, 1.0);
    const AugmentedLabels out = BuildAugmentedLabels(em, beta);
    for (int i = 0; i < classes; ++i) {
      double sum = 0.0;
      for (int j = 0; j < classes; ++j) {
        const double v = out.labels.values(i, j);
        ASSERT_GE(v, 0.0);
        sum += v;
        if (j != i) ASSERT_GT(out.labels.values(i, i), v) << "beta " << beta;
      }
      ASSERT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(AugmentedLabelsProperty, HierarchyGramCountsSharedAncestors) {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const int levels = 2 + static_cast<int>(rng.Below(4));
    const Taxonomy tax = Taxonomy::Parse(testing::RandomTreeEdges(rng, levels, 3, 24));
    for (bool with_root : {false, true}) {
      const EmbeddingMatrix em = BuildHierarchyEmbedding(tax, {.include_root = with_root});
      const Matrix gram = MultiplyByTranspose(em.rows, em.rows);
      const int segments = with_root ? levels : std::max(levels - 1, 1);
      ASSERT_EQ(em.rows.cols(), static_cast<std::size_t>(segments * tax.num_classes()));
      for (int i = 0; i < tax.num_classes(); ++i) {
        for (int j = 0; j < tax.num_classes(); ++j) {
          int shared = 0;
          for (int level = 0; level < segments; ++level) {
            shared += tax.ancestor_at_level(i, level) == tax.ancestor_at_level(j, level);
          }
          ASSERT_EQ(gram(i, j), shared);
          ASSERT_EQ(gram(i, j), std::max(segments - tax.lca_height(i, j), 0));
        }
      }
    }
  }
}

TEST(AugmentedLabelsProperty, WithinSuperclassMassExceedsCrossSuperclass) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Taxonomy tax = Taxonomy::Parse(testing::RandomTreeEdges(rng, 3 + static_cast<int>(rng.Below(3)), 3, 24));
    const AugmentedLabels out = BuildAugmentedLabels(BuildHierarchyEmbedding(tax), 0.4);
    for (int i = 0; i < tax.num_classes(); ++i) {
      for (int j = 0; j < tax.num_classes(); ++j) {
        for (int k = 0; k < tax.num_classes(); ++k) {
          if (i == j || i == k) continue;
          const bool j_in = tax.ancestor_at_level(i, 1) == tax.ancestor_at_level(j, 1);
          const bool k_in = tax.ancestor_at_level(i, 1) == tax.ancestor_at_level(k, 1);
          if (j_in && !k_in) ASSERT_GT(out.labels.values(i, j), out.labels.values(i, k));
        }
      }
    }
  }
}

TEST(AugmentedLabelsProperty, PermutationEquivariance) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const int classes = 3 + static_cast<int>(rng.Below(8));
    const EmbeddingMatrix em = RandomEmbedding(rng, classes, 4);
    std::vector<int> perm(classes);
    std::iota(perm.begin(), perm.end(), 0);
    rng.Shuffle(std::span<int>(perm));
    EmbeddingMatrix permuted = em;
    for (int i = 0; i < classes; ++i) {
      for (int d = 0; d < 4; ++d) permuted.rows(i, d) = em.rows(perm[i], d);
    }
    const Matrix a = BuildAugmentedLabels(em, 0.3).labels.values;
    const Matrix b = BuildAugmentedLabels(permuted, 0.3).labels.values;
    for (int i = 0; i < classes; ++i) {
      for (int j = 0; j < classes; ++j) ASSERT_NEAR(b(i, j), a(perm[i], perm[j]), 1e-15);
    }
  }
}

TEST(AugmentedLabelsProperty, TaxonomyReorderingPermutesLabels) {
  const Taxonomy a = T4();
  const Taxonomy b = Taxonomy::Parse("d\tQ\nb\tP\nc\tQ\na\tP\nP\tR\nQ\tR\n");
  const Matrix la = BuildAugmentedLabels(BuildHierarchyEmbedding(a), 0.4).labels.values;
  const Matrix lb = BuildAugmentedLabels(BuildHierarchyEmbedding(b), 0.4).labels.values;
  auto index_in = [](const Taxonomy& t, const std::string& name) {
    const auto& n = t.class_names();
    return static_cast<int>(std::find(n.begin(), n.end(), name) - n.begin());
  };
  for (const auto& x : a.class_names()) {
    for (const auto& y : a.class_names()) {
      EXPECT_EQ(la(index_in(a, x), index_in(a, y)), lb(index_in(b, x), index_in(b, y)));
    }
  }
}

}  // namespace
}  // namespace semlabels
