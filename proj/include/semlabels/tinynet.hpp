#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semlabels/dataio.hpp"
#include "semlabels/encoding.hpp"
#include "semlabels/matrix.hpp"

namespace semlabels {

struct DenseLayer {
  Matrix weights;            // out x in
  std::vector<double> bias;  // out

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Fully connected network: rectifier on hidden layers, identity on the
/// output layer. layer_sizes = {d_in, h_1, ..., C}.
struct ModelParams {
  std::vector<int> layer_sizes;
  std::vector<DenseLayer> layers;
  std::uint64_t seed = 0;

  int input_dim() const { return layer_sizes.front(); }
  int num_classes() const { return layer_sizes.back(); }
  int num_hidden_layers() const { return static_cast<int>(layer_sizes.size()) - 2; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Weights ~ U(-sqrt(6 / fan_in), +sqrt(6 / fan_in)) drawn layer by layer,
/// row-major; biases zero.
ModelParams InitModel(std::span<const int> layer_sizes, std::uint64_t seed);

struct ForwardCache {
  // activations[0] is the input, activations[k] the (rectified) output of
  // layer k-1; the last entry is the logits.
  std::vector<std::vector<double>> activations;
};

struct ForwardResult {
  std::vector<double> logits;
  ForwardCache cache;
};

ForwardResult ForwardLogits(const ModelParams& params, std::span<const double> x);

/// Max-subtracted softmax.
std::vector<double> Softmax(std::span<const double> logits);

struct SoftCrossEntropy {
  double loss = 0.0;
  std::vector<double> dlogits;  // softmax(logits) - target
};

/// -sum_i target_i * log softmax(logits)_i. The gradient form assumes the
/// target row sums to one.
SoftCrossEntropy SoftCrossEntropyLoss(std::span<const double> target,
                                      std::span<const double> logits);

struct Gradients {
  std::vector<DenseLayer> layers;
  std::vector<double> input;
};

Gradients Backward(const ModelParams& params, const ForwardCache& cache,
                   std::span<const double> dlogits);

/// d logit[cls] / d x.
std::vector<double> LogitInputGradient(const ModelParams& params, std::span<const double> x,
                                       int cls);

struct TrainConfig {
  std::vector<int> hidden_sizes{64};
  int epochs = 30;
  int batch_size = 32;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

struct EpochStats {
  double mean_loss = 0.0;
  double train_error = 0.0;  // top-1, measured during the epoch
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochStats> history;
};

/// Mini-batch SGD with momentum on soft cross-entropy. The target for an
/// item with label y is row y of `targets`. The model is initialised from
/// cfg.seed and the per-epoch shuffle uses an independent stream derived
/// from the same seed.
TrainResult Train(const Dataset& data, const AugmentedLabelMatrix& targets,
                  const TrainConfig& cfg);

/// Classes by descending logit, ties to the lower index, truncated to k.
std::vector<int> RankLogits(std::span<const double> logits, int k);
std::vector<int> PredictTopK(const ModelParams& params, std::span<const double> x, int k);

/// Output of the last hidden layer.
std::vector<double> ExtractFeatures(const ModelParams& params, std::span<const double> x);

/// Largest relative difference between backprop gradients and central
/// finite differences of the soft cross-entropy over every parameter.
double GradCheck(const ModelParams& params, std::span<const double> x,
                 std::span<const double> target, double epsilon);

// Checkpoint: "SALM1", u32 layer count, u32 sizes, then per layer the
// weights (row-major) followed by the biases as little-endian f64.
std::string EncodeModel(const ModelParams& params);
ModelParams DecodeModel(std::string_view bytes);
void SaveModel(const std::filesystem::path& path, const ModelParams& params);
ModelParams LoadModel(const std::filesystem::path& path);

}  // namespace semlabels
