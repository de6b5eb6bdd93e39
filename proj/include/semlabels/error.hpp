#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace semlabels {

enum class ErrorCode {
  // taxonomy
  kMalformedLine,
  kEmptyTaxonomy,
  kMultipleRoots,
  kMultipleParents,
  kCycleDetected,
  kNonUniformLeafDepth,
  kDuplicateEdge,
  kLevelOutOfRange,
  kClassOutOfRange,
  // encoding
  kMissingToken,
  kDimensionMismatch,
  kZeroEmbedding,
  kBadBeta,
  // tinynet
  kBadShape,
  kDimMismatch,
  kEmptyDataset,
  kBadK,
  kNoHiddenLayer,
  kBadEpsilon,
  kBadConfig,
  kNumericFailure,
  // clustermetrics
  kSingleCluster,
  kBadClusterLabels,
  // attribution
  kShapeMismatch,
  kUnknownMetric,
  kUnknownExplainer,
  // dataio
  kBadScale,
  kRaggedLine,
  kEmptyFile,
  kNonNumeric,
  kBadMagic,
  kTruncatedFile,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

/// Every failure in the library is reported through this type. The message
/// names the offending input (node, line number, token) where one exists.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace semlabels
