#include "semlabels/encoding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "semlabels/error.hpp"

namespace semlabels {

std::string_view EmbeddingSourceName(EmbeddingSource source) {
  switch (source) {
    case EmbeddingSource::kHierarchy: return "hierarchy";
    case EmbeddingSource::kWordVectors: return "word-vectors";
  }
  return "unknown";
}

EmbeddingMatrix BuildHierarchyEmbedding(const Taxonomy& tax, HierarchyEmbeddingOptions options) {
  const int num_classes = tax.num_classes();
  const int segments =
      options.include_root ? tax.num_levels() : std::max(tax.num_levels() - 1, 1);

  EmbeddingMatrix em;
  em.rows = Matrix(num_classes, static_cast<std::size_t>(num_classes) * segments);
  em.class_names = tax.class_names();
  em.source = EmbeddingSource::kHierarchy;
  for (int c = 0; c < num_classes; ++c) {
    for (int level = 0; level < segments; ++level) {
      em.rows(c, static_cast<std::size_t>(level) * num_classes + tax.ancestor_at_level(c, level)) =
          1.0;
    }
  }
  return em;
}

std::string NormalizeClassName(std::string_view name) {
  std::string out(name);
  for (char& ch : out) {
    if (ch == ' ') {
      ch = '_';
    } else {
      ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
  }
  return out;
}

EmbeddingMatrix BuildWordEmbedding(const TokenTable& vectors,
                                   std::span<const std::string> class_names) {
  EmbeddingMatrix em;
  em.source = EmbeddingSource::kWordVectors;
  em.rows = Matrix(class_names.size(), static_cast<std::size_t>(vectors.dim));
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    const std::string key = NormalizeClassName(class_names[c]);
    const auto it = vectors.vectors.find(key);
    if (it == vectors.vectors.end()) {
      throw Error(ErrorCode::kMissingToken,
                  "class '" + class_names[c] + "' (token '" + key + "') not in vector table");
    }
    if (it->second.size() != static_cast<std::size_t>(vectors.dim)) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "token '" + key + "' has dimension " + std::to_string(it->second.size()) +
                      ", table dimension is " + std::to_string(vectors.dim));
    }
    std::copy(it->second.begin(), it->second.end(), em.rows.row(c).begin());
    em.class_names.push_back(class_names[c]);
  }
  return em;
}

AugmentedLabels BuildAugmentedLabels(const EmbeddingMatrix& em, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw Error(ErrorCode::kBadBeta, "beta must lie in [0, 1], got " + std::to_string(beta));
  }
  const std::size_t n = em.rows.rows();

  Matrix unit = em.rows;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = unit.row(i);
    const double norm = Norm2(row);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      const std::string name = i < em.class_names.size() ? em.class_names[i] : std::to_string(i);
      throw Error(ErrorCode::kZeroEmbedding, "embedding row for class '" + name +
                                                 "' is all-zero or non-finite");
    }
    for (double& v : row) v /= norm;
  }

  AugmentedLabels out;
  Matrix gram = MultiplyByTranspose(unit, unit);
  for (std::size_t i = 0; i < n; ++i) {
    gram(i, i) = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      gram(i, j) = std::clamp(gram(i, j), 0.0, 1.0);
      if (i < j && gram(i, j) >= 1.0 - 1e-12) {
        out.duplicate_embeddings.emplace_back(static_cast<int>(i), static_cast<int>(j));
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto row = gram.row(i);
    double sum = 0.0;
    for (double v : row) sum += v;
    for (double& v : row) v /= sum;
  }
  out.auxiliary = AuxiliaryMatrix{gram, true};

  Matrix sal(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      sal(i, j) = (1.0 - beta) * gram(i, j) + (i == j ? beta : 0.0);
    }
  }
  out.labels = AugmentedLabelMatrix{std::move(sal), beta, em.source};
  return out;
}

}  // namespace semlabels
