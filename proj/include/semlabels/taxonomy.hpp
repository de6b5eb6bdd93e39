#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace semlabels {

/// Rooted class tree with uniform leaf depth.
///
/// Levels are counted bottom-up: level 0 holds the leaves (one per class),
/// level num_levels()-1 holds the single root. Nodes are addressed by
/// (level, index) with indices contiguous per level. Immutable once built.
class Taxonomy {
 public:
  /// Parses `child<TAB>parent` edge lines. Lines whose first non-blank
  /// character is `#` and blank lines are skipped. Class order, and node
  /// order within every level, is order of first appearance in the text.
  static Taxonomy Parse(std::string_view edge_text);
  static Taxonomy Load(const std::filesystem::path& path);

  int num_classes() const { return static_cast<int>(names_.front().size()); }
  int num_levels() const { return static_cast<int>(names_.size()); }
  int level_size(int level) const;

  const std::string& node_name(int level, int index) const;
  const std::vector<std::string>& class_names() const { return names_.front(); }
  const std::string& root_name() const { return names_.back().front(); }

  /// Index at level+1 of the parent of node (level, index).
  int parent(int level, int index) const;

  /// Index at `level` of the ancestor of class `cls`; level 0 is the class.
  int ancestor_at_level(int cls, int level) const;

  /// Level of the lowest common ancestor of two classes; 0 iff i == j.
  int lca_height(int class_i, int class_j) const;

  /// Serializes back to edge text that parses to identical indices.
  std::string ToEdgeText() const;

 private:
  Taxonomy() = default;

  void CheckClass(int cls) const;
  void CheckLevel(int level) const;

  std::vector<std::vector<std::string>> names_;   // [level][index]
  std::vector<std::vector<int>> parents_;         // [level][index], level < L-1
  std::vector<std::vector<int>> ancestors_;       // [class][level]
};

}  // namespace semlabels
