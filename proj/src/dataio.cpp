#include "semlabels/dataio.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "semlabels/error.hpp"
#include "semlabels/rng.hpp"

namespace semlabels {
namespace {

constexpr std::string_view kMatrixMagic = "SALX1";
constexpr std::string_view kDatasetMagic = "SALD1";

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void PutF64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class ByteReader {
 public:
  ByteReader(std::string_view bytes, std::string_view what) : bytes_(bytes), what_(what) {}

  void Need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::kTruncatedFile, std::string(what_) + " ends at byte " +
                                                 std::to_string(bytes_.size()) + ", needed " +
                                                 std::to_string(pos_ + n));
    }
  }
  std::string_view Take(std::size_t n) {
    Need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t U8() { return static_cast<std::uint8_t>(Take(1)[0]); }
  std::uint32_t U32() {
    auto s = Take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(s[i])) << (8 * i);
    return v;
  }
  double F64() {
    auto s = Take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(s[i])) << (8 * i);
    return std::bit_cast<double>(v);
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::string_view what_;
  std::size_t pos_ = 0;
};

std::string FormatDouble(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, n);
}

bool ParseDouble(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> SplitOn(std::string_view s, char sep, bool skip_empty) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto next = s.find(sep, pos);
    const auto piece = s.substr(pos, next == std::string_view::npos ? std::string_view::npos
                                                                    : next - pos);
    if (!(skip_empty && piece.empty())) parts.push_back(piece);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return parts;
}

std::vector<std::string_view> Lines(std::string_view text) {
  auto lines = SplitOn(text, '\n', false);
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace

void ValidateDataset(const Dataset& data, int num_classes) {
  if (data.labels.empty()) throw Error(ErrorCode::kEmptyDataset, "dataset has no items");
  if (data.features.rows() != data.labels.size()) {
    throw Error(ErrorCode::kDimMismatch, "feature rows and label count differ");
  }
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    if (data.labels[i] < 0 || data.labels[i] >= num_classes) {
      throw Error(ErrorCode::kClassOutOfRange, "item " + std::to_string(i) + " has label " +
                                                   std::to_string(data.labels[i]));
    }
  }
  for (double v : data.features.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNumericFailure, "non-finite feature value");
  }
}

DatasetPair GenerateHierarchicalDataset(const Taxonomy& tax, int dim, int per_leaf,
                                        std::span<const double> level_scales,
                                        std::uint64_t seed) {
  const int levels = tax.num_levels();
  if (dim < 1) throw Error(ErrorCode::kBadConfig, "dim must be >= 1");
  if (per_leaf < 2) throw Error(ErrorCode::kBadConfig, "per_leaf must be >= 2");
  if (static_cast<int>(level_scales.size()) != levels - 1) {
    throw Error(ErrorCode::kBadScale, "expected " + std::to_string(levels - 1) +
                                          " level scales, got " +
                                          std::to_string(level_scales.size()));
  }
  for (double s : level_scales) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw Error(ErrorCode::kBadScale, "level scales must be finite and >= 0");
    }
  }

  Rng rng(seed);
  // means[level] is level_size x dim; the root mean stays zero.
  std::vector<Matrix> means(levels);
  means[levels - 1] = Matrix(1, dim);
  for (int level = levels - 2; level >= 0; --level) {
    means[level] = Matrix(tax.level_size(level), dim);
    for (int node = 0; node < tax.level_size(level); ++node) {
      const auto parent_mean = means[level + 1].row(tax.parent(level, node));
      auto mean = means[level].row(node);
      for (int d = 0; d < dim; ++d) {
        mean[d] = parent_mean[d] + level_scales[level] * rng.Normal();
      }
    }
  }

  const int num_classes = tax.num_classes();
  const int train_per_class = (4 * per_leaf) / 5;
  const int test_per_class = per_leaf - train_per_class;
  DatasetPair out;
  out.train.split = Split::kTrain;
  out.test.split = Split::kTest;
  out.train.features = Matrix(static_cast<std::size_t>(num_classes) * train_per_class, dim);
  out.test.features = Matrix(static_cast<std::size_t>(num_classes) * test_per_class, dim);

  Matrix samples(per_leaf, dim);
  std::vector<int> order(per_leaf);
  std::size_t train_row = 0;
  std::size_t test_row = 0;
  for (int c = 0; c < num_classes; ++c) {
    const auto mean = means[0].row(c);
    for (int s = 0; s < per_leaf; ++s) {
      for (int d = 0; d < dim; ++d) samples(s, d) = mean[d] + rng.Normal();
    }
    for (int s = 0; s < per_leaf; ++s) order[s] = s;
    rng.Shuffle(std::span<int>(order));
    for (int s = 0; s < per_leaf; ++s) {
      const auto src = samples.row(order[s]);
      if (s < train_per_class) {
        std::copy(src.begin(), src.end(), out.train.features.row(train_row++).begin());
        out.train.labels.push_back(c);
      } else {
        std::copy(src.begin(), src.end(), out.test.features.row(test_row++).begin());
        out.test.labels.push_back(c);
      }
    }
  }
  return out;
}

TokenTable ParseTokenVectors(std::string_view text) {
  TokenTable table;
  const auto lines = Lines(text);
  std::size_t line_no = 0;
  for (const auto line : lines) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = SplitOn(line, ' ', true);
    if (fields.size() < 2) {
      throw Error(ErrorCode::kRaggedLine, "line " + std::to_string(line_no) + " has no values");
    }
    const int dim = static_cast<int>(fields.size()) - 1;
    if (table.dim == 0) {
      table.dim = dim;
    } else if (dim != table.dim) {
      throw Error(ErrorCode::kRaggedLine,
                  "line " + std::to_string(line_no) + " has " + std::to_string(dim) +
                      " values, expected " + std::to_string(table.dim));
    }
    std::vector<double> values(dim);
    for (int i = 0; i < dim; ++i) {
      if (!ParseDouble(fields[i + 1], values[i])) {
        throw Error(ErrorCode::kNonNumeric, "line " + std::to_string(line_no) + " value '" +
                                                std::string(fields[i + 1]) + "'");
      }
    }
    std::string token(fields[0]);
    auto [it, inserted] = table.vectors.try_emplace(token, std::move(values));
    if (!inserted) {
      table.warnings.push_back("duplicate token '" + token + "' on line " +
                               std::to_string(line_no) + "; keeping the last occurrence");
      it->second = std::move(values);
    }
  }
  if (table.vectors.empty()) throw Error(ErrorCode::kEmptyFile, "no token vectors");
  return table;
}

TokenTable LoadTokenVectors(const std::filesystem::path& path) {
  return ParseTokenVectors(ReadFile(path));
}

MatrixFormat FormatForPath(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? MatrixFormat::kCsv : MatrixFormat::kBinary;
}

std::string EncodeMatrix(const Matrix& m, MatrixFormat format) {
  std::string out;
  if (format == MatrixFormat::kBinary) {
    out.append(kMatrixMagic);
    PutU32(out, static_cast<std::uint32_t>(m.rows()));
    PutU32(out, static_cast<std::uint32_t>(m.cols()));
    for (double v : m.data()) PutF64(out, v);
    return out;
  }
  out += std::to_string(m.rows()) + "," + std::to_string(m.cols()) + "\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += FormatDouble(m(r, c));
    }
    out += '\n';
  }
  return out;
}

Matrix DecodeMatrix(std::string_view bytes) {
  if (bytes.substr(0, kMatrixMagic.size()) == kMatrixMagic) {
    ByteReader reader(bytes, "matrix file");
    reader.Take(kMatrixMagic.size());
    const std::uint32_t rows = reader.U32();
    const std::uint32_t cols = reader.U32();
    reader.Need(std::size_t(rows) * cols * 8);
    Matrix m(rows, cols);
    for (double& v : m.data()) v = reader.F64();
    return m;
  }
  const auto lines = Lines(bytes);
  if (lines.empty()) throw Error(ErrorCode::kEmptyFile, "empty matrix file");
  const auto header = SplitOn(lines[0], ',', false);
  std::size_t rows = 0;
  std::size_t cols = 0;
  auto parse_size = [](std::string_view s, std::size_t& out) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
  };
  if (header.size() != 2 || !parse_size(header[0], rows) || !parse_size(header[1], cols)) {
    throw Error(ErrorCode::kBadMagic, "neither SALX1 binary nor a `rows,cols` CSV header");
  }
  if (lines.size() - 1 < rows) {
    throw Error(ErrorCode::kTruncatedFile, "CSV header promises " + std::to_string(rows) +
                                               " rows, found " + std::to_string(lines.size() - 1));
  }
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto fields = SplitOn(lines[r + 1], ',', false);
    if (fields.size() != cols) {
      throw Error(ErrorCode::kRaggedLine, "line " + std::to_string(r + 2) + " has " +
                                              std::to_string(fields.size()) + " fields");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!ParseDouble(fields[c], m(r, c))) {
        throw Error(ErrorCode::kNonNumeric, "line " + std::to_string(r + 2) + " value '" +
                                                std::string(fields[c]) + "'");
      }
    }
  }
  return m;
}

void WriteMatrix(const std::filesystem::path& path, const Matrix& m) {
  WriteFileAtomic(path, EncodeMatrix(m, FormatForPath(path)));
}

Matrix ReadMatrix(const std::filesystem::path& path) { return DecodeMatrix(ReadFile(path)); }

std::string EncodeDataset(const Dataset& data) {
  std::string out(kDatasetMagic);
  PutU32(out, static_cast<std::uint32_t>(data.size()));
  PutU32(out, static_cast<std::uint32_t>(data.dim()));
  out.push_back(static_cast<char>(data.split));
  for (int label : data.labels) PutU32(out, static_cast<std::uint32_t>(label));
  for (double v : data.features.data()) PutF64(out, v);
  return out;
}

Dataset DecodeDataset(std::string_view bytes) {
  if (bytes.substr(0, kDatasetMagic.size()) != kDatasetMagic) {
    throw Error(ErrorCode::kBadMagic, "not a SALD1 dataset file");
  }
  ByteReader reader(bytes, "dataset file");
  reader.Take(kDatasetMagic.size());
  const std::uint32_t n = reader.U32();
  const std::uint32_t d = reader.U32();
  const std::uint8_t split = reader.U8();
  if (split > 1) throw Error(ErrorCode::kBadMagic, "unknown split tag");
  reader.Need(std::size_t(n) * 4 + std::size_t(n) * d * 8);
  Dataset data;
  data.split = static_cast<Split>(split);
  data.labels.resize(n);
  for (auto& label : data.labels) label = static_cast<int>(reader.U32());
  data.features = Matrix(n, d);
  for (double& v : data.features.data()) v = reader.F64();
  return data;
}

void WriteDataset(const std::filesystem::path& path, const Dataset& data) {
  WriteFileAtomic(path, EncodeDataset(data));
}

Dataset ReadDataset(const std::filesystem::path& path) { return DecodeDataset(ReadFile(path)); }

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFileAtomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIoError, "cannot rename onto " + path.string());
  }
}

}  // namespace semlabels
