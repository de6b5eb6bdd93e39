#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "semlabels/matrix.hpp"
#include "semlabels/taxonomy.hpp"

namespace semlabels {

enum class Split : std::uint8_t { kTrain = 0, kTest = 1 };

struct Dataset {
  Matrix features;          // n x d
  std::vector<int> labels;  // n class indices
  Split split = Split::kTrain;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Checks n > 0, labels in [0, num_classes), finite features.
void ValidateDataset(const Dataset& data, int num_classes);

struct DatasetPair {
  Dataset train;
  Dataset test;
};

/// Hierarchy-respecting Gaussian data.
///
/// Node means are built top-down: the root mean is 0 and every child mean is
/// its parent mean plus N(0, I) * level_scales[child level]. `level_scales`
/// has one entry per non-root level (index 0 = leaves). Each class then
/// draws `per_leaf` samples of leaf mean + N(0, I). The split is stratified:
/// per class, a seeded shuffle puts floor(4 * per_leaf / 5) samples in train
/// and the rest in test. Both splits are ordered class-major.
DatasetPair GenerateHierarchicalDataset(const Taxonomy& tax, int dim, int per_leaf,
                                        std::span<const double> level_scales,
                                        std::uint64_t seed);

/// Word vector table. Duplicate tokens: last occurrence wins and a warning
/// naming the token and line is appended to `warnings`.
struct TokenTable {
  int dim = 0;
  std::unordered_map<std::string, std::vector<double>> vectors;
  std::vector<std::string> warnings;
};

/// Parses `token v1 ... vD` lines (space separated, GloVe style). D is taken
/// from the first line.
TokenTable ParseTokenVectors(std::string_view text);
TokenTable LoadTokenVectors(const std::filesystem::path& path);

// Matrix files. Binary: "SALX1", u32 rows, u32 cols, little-endian f64
// row-major. CSV: a header line `rows,cols`, then one line per row with 17
// significant digits. Readers sniff the magic; writers choose CSV when the
// path ends in ".csv".
enum class MatrixFormat { kBinary, kCsv };

MatrixFormat FormatForPath(const std::filesystem::path& path);
std::string EncodeMatrix(const Matrix& m, MatrixFormat format);
Matrix DecodeMatrix(std::string_view bytes);
void WriteMatrix(const std::filesystem::path& path, const Matrix& m);
Matrix ReadMatrix(const std::filesystem::path& path);

// Dataset files: "SALD1", u32 n, u32 d, u8 split, n x u32 labels, then n x d
// little-endian f64 row-major features.
std::string EncodeDataset(const Dataset& data);
Dataset DecodeDataset(std::string_view bytes);
void WriteDataset(const std::filesystem::path& path, const Dataset& data);
Dataset ReadDataset(const std::filesystem::path& path);

/// Whole-file helpers. WriteFileAtomic writes to a sibling temp file and
/// renames it over the destination.
std::string ReadFile(const std::filesystem::path& path);
void WriteFileAtomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace semlabels
