#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "semlabels/error.hpp"
#include "semlabels/rng.hpp"
#include "semlabels/taxonomy.hpp"

namespace semlabels::testing {

// a, b under P; c, d under Q; P, Q under R.
inline const char* const kT4Edges = "a\tP\nb\tP\nc\tQ\nd\tQ\nP\tR\nQ\tR\n";

inline Taxonomy T4() { return Taxonomy::Parse(kT4Edges); }

inline std::filesystem::path FixturePath(const std::string& name) {
  return std::filesystem::path(SEMLABELS_DATA_DIR) / name;
}

// Random uniform-depth tree with `levels` levels (root included). Returns the
// edge text; classes are named c0, c1, ... in the order they are written.
inline std::string RandomTreeEdges(Rng& rng, int levels, int max_children, int max_leaves) {
  std::vector<std::vector<int>> parents(levels);  // parents[level][node]
  std::vector<int> counts(levels, 0);
  counts[levels - 1] = 1;
  for (int level = levels - 2; level >= 0; --level) {
    const int parent_count = counts[level + 1];
    for (int p = 0; p < parent_count; ++p) {
      // Leave room for one child per remaining parent.
      const int room = max_leaves - static_cast<int>(parents[level].size()) - (parent_count - p - 1);
      const int kids = std::min(1 + static_cast<int>(rng.Below(max_children)), std::max(room, 1));
      for (int k = 0; k < kids; ++k) parents[level].push_back(p);
    }
    counts[level] = static_cast<int>(parents[level].size());
  }
  auto name = [&](int level, int node) {
    if (level == 0) return "c" + std::to_string(node);
    return "n" + std::to_string(level) + "_" + std::to_string(node);
  };
  std::string text;
  for (int level = 0; level + 1 < levels; ++level) {
    for (int node = 0; node < counts[level]; ++node) {
      text += name(level, node) + "\t" + name(level + 1, parents[level][node]) + "\n";
    }
  }
  return text;
}

class TempDir {
 public:
  TempDir() {
    Rng rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("semlabels_test_" + std::to_string(rng.NextU64()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace semlabels::testing

#define EXPECT_ERROR_CODE(stmt, expected)                                 \
  do {                                                                    \
    try {                                                                 \
      stmt;                                                               \
      ADD_FAILURE() << "expected " << ::semlabels::ErrorCodeName(expected); \
    } catch (const ::semlabels::Error& e) {                               \
      EXPECT_EQ(e.code(), expected) << e.what();                          \
    }                                                                     \
  } while (0)
