#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semlabels/dataio.hpp"
#include "semlabels/matrix.hpp"
#include "semlabels/taxonomy.hpp"

namespace semlabels {

enum class EmbeddingSource { kHierarchy, kWordVectors };

std::string_view EmbeddingSourceName(EmbeddingSource source);

/// One auxiliary vector per class, stacked row-wise (C x D).
struct EmbeddingMatrix {
  Matrix rows;
  std::vector<std::string> class_names;
  EmbeddingSource source = EmbeddingSource::kHierarchy;
};

struct HierarchyEmbeddingOptions {
  // The root segment is one-hot at the same position for every class, so it
  // only adds a constant to every Gram entry. Off by default, which gives
  // D = C * (L - 1); on, D = C * L.
  bool include_root = false;
};

/// Stacked per-level one-hot encoding of each class's leaf-to-root path.
/// Segment k has width C and is hot at the level-k index of the ancestor;
/// positions past the level's node count stay zero.
EmbeddingMatrix BuildHierarchyEmbedding(const Taxonomy& tax,
                                        HierarchyEmbeddingOptions options = {});

/// Lowercases and maps spaces to underscores ("Aquarium Fish" ->
/// "aquarium_fish").
std::string NormalizeClassName(std::string_view name);

/// Rows are looked up by normalized class name, in class-index order.
EmbeddingMatrix BuildWordEmbedding(const TokenTable& vectors,
                                   std::span<const std::string> class_names);

struct AuxiliaryMatrix {
  Matrix values;  // C x C
  bool normalized = false;
};

struct AugmentedLabelMatrix {
  Matrix values;  // C x C, row i is the soft target for class i
  double beta = 1.0;
  EmbeddingSource provenance = EmbeddingSource::kHierarchy;

  std::size_t num_classes() const { return values.rows(); }
};

struct AugmentedLabels {
  AuxiliaryMatrix auxiliary;
  AugmentedLabelMatrix labels;
  // Distinct class pairs (i < j) whose embeddings have cosine 1. Their
  // auxiliary rows tie on the diagonal; beta > 0 restores a strict maximum.
  std::vector<std::pair<int, int>> duplicate_embeddings;
};

inline constexpr double kDefaultHierarchyBeta = 0.4;
inline constexpr double kDefaultWordVectorBeta = 0.7;

/// Cosine Gram matrix of the embedding rows with negatives clamped to zero
/// and rows scaled to sum to one, then S-AL = beta * I + (1 - beta) * AM.
AugmentedLabels BuildAugmentedLabels(const EmbeddingMatrix& em, double beta);

}  // namespace semlabels
