#include "semlabels/error.hpp"

namespace semlabels {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kEmptyTaxonomy: return "EmptyTaxonomy";
    case ErrorCode::kMultipleRoots: return "MultipleRoots";
    case ErrorCode::kMultipleParents: return "MultipleParents";
    case ErrorCode::kCycleDetected: return "CycleDetected";
    case ErrorCode::kNonUniformLeafDepth: return "NonUniformLeafDepth";
    case ErrorCode::kDuplicateEdge: return "DuplicateEdge";
    case ErrorCode::kLevelOutOfRange: return "LevelOutOfRange";
    case ErrorCode::kClassOutOfRange: return "ClassOutOfRange";
    case ErrorCode::kMissingToken: return "MissingToken";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroEmbedding: return "ZeroEmbedding";
    case ErrorCode::kBadBeta: return "BadBeta";
    case ErrorCode::kBadShape: return "BadShape";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kBadK: return "BadK";
    case ErrorCode::kNoHiddenLayer: return "NoHiddenLayer";
    case ErrorCode::kBadEpsilon: return "BadEpsilon";
    case ErrorCode::kBadConfig: return "BadConfig";
    case ErrorCode::kNumericFailure: return "NumericFailure";
    case ErrorCode::kSingleCluster: return "SingleCluster";
    case ErrorCode::kBadClusterLabels: return "BadClusterLabels";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kUnknownMetric: return "UnknownMetric";
    case ErrorCode::kUnknownExplainer: return "UnknownExplainer";
    case ErrorCode::kBadScale: return "BadScale";
    case ErrorCode::kRaggedLine: return "RaggedLine";
    case ErrorCode::kEmptyFile: return "EmptyFile";
    case ErrorCode::kNonNumeric: return "NonNumeric";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace semlabels
