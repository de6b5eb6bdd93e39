#include "semlabels/tinynet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "semlabels/error.hpp"
#include "semlabels/rng.hpp"

namespace semlabels {
namespace {

constexpr std::string_view kModelMagic = "SALM1";
constexpr std::uint64_t kShuffleStreamSalt = 0x9E3779B97F4A7C15ULL;

void CheckInput(const ModelParams& params, std::span<const double> x) {
  if (static_cast<int>(x.size()) != params.input_dim()) {
    throw Error(ErrorCode::kDimMismatch, "input has " + std::to_string(x.size()) +
                                             " features, model expects " +
                                             std::to_string(params.input_dim()));
  }
}

Gradients ZeroGradients(const ModelParams& params) {
  Gradients g;
  for (const auto& layer : params.layers) {
    g.layers.push_back(DenseLayer{Matrix(layer.weights.rows(), layer.weights.cols()),
                                  std::vector<double>(layer.bias.size(), 0.0)});
  }
  return g;
}

// Accumulates scale * (backprop gradient) into `acc`.
void Accumulate(const ModelParams& params, const ForwardCache& cache,
                std::span<const double> dlogits, double scale, Gradients& acc,
                bool want_input) {
  std::vector<double> delta(dlogits.begin(), dlogits.end());
  for (int l = static_cast<int>(params.layers.size()) - 1; l >= 0; --l) {
    const auto& layer = params.layers[l];
    const auto& in = cache.activations[l];
    auto& g = acc.layers[l];
    for (std::size_t o = 0; o < delta.size(); ++o) {
      const double d = scale * delta[o];
      if (d == 0.0) continue;
      auto grow = g.weights.row(o);
      for (std::size_t i = 0; i < in.size(); ++i) grow[i] += d * in[i];
      g.bias[o] += d;
    }
    if (l == 0 && !want_input) break;
    std::vector<double> prev(in.size(), 0.0);
    for (std::size_t o = 0; o < delta.size(); ++o) {
      if (delta[o] == 0.0) continue;
      const auto wrow = layer.weights.row(o);
      for (std::size_t i = 0; i < in.size(); ++i) prev[i] += wrow[i] * delta[o];
    }
    if (l > 0) {
      for (std::size_t i = 0; i < in.size(); ++i) {
        if (!(in[i] > 0.0)) prev[i] = 0.0;
      }
    } else {
      acc.input = prev;
      for (double& v : acc.input) v *= scale;
    }
    delta = std::move(prev);
  }
}

}  // namespace

ModelParams InitModel(std::span<const int> layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2) {
    throw Error(ErrorCode::kBadShape, "a model needs at least an input and an output size");
  }
  for (int s : layer_sizes) {
    if (s < 1) throw Error(ErrorCode::kBadShape, "layer sizes must be positive");
  }
  ModelParams params;
  params.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
  params.seed = seed;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / fan_in);
    DenseLayer layer{Matrix(fan_out, fan_in), std::vector<double>(fan_out, 0.0)};
    for (double& w : layer.weights.data()) w = rng.Uniform(-limit, limit);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

ForwardResult ForwardLogits(const ModelParams& params, std::span<const double> x) {
  CheckInput(params, x);
  ForwardResult result;
  auto& acts = result.cache.activations;
  acts.reserve(params.layers.size() + 1);
  acts.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    const auto& in = acts.back();
    std::vector<double> out(layer.bias);
    for (std::size_t o = 0; o < out.size(); ++o) out[o] += Dot(layer.weights.row(o), in);
    if (l + 1 < params.layers.size()) {
      for (double& v : out) v = v > 0.0 ? v : 0.0;
    }
    acts.push_back(std::move(out));
  }
  result.logits = acts.back();
  return result;
}

std::vector<double> Softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double max = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - max);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

SoftCrossEntropy SoftCrossEntropyLoss(std::span<const double> target,
                                      std::span<const double> logits) {
  if (target.size() != logits.size()) {
    throw Error(ErrorCode::kDimMismatch, "target and logits differ in length");
  }
  const double max = logits.empty() ? 0.0 : *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - max);
  const double log_sum = max + std::log(sum);

  SoftCrossEntropy out;
  out.dlogits.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double log_p = logits[i] - log_sum;
    if (target[i] != 0.0) out.loss -= target[i] * log_p;
    out.dlogits[i] = std::exp(log_p) - target[i];
  }
  return out;
}

Gradients Backward(const ModelParams& params, const ForwardCache& cache,
                   std::span<const double> dlogits) {
  Gradients g = ZeroGradients(params);
  Accumulate(params, cache, dlogits, 1.0, g, true);
  return g;
}

std::vector<double> LogitInputGradient(const ModelParams& params, std::span<const double> x,
                                       int cls) {
  if (cls < 0 || cls >= params.num_classes()) {
    throw Error(ErrorCode::kClassOutOfRange, "class " + std::to_string(cls));
  }
  const ForwardResult fwd = ForwardLogits(params, x);
  std::vector<double> onehot(params.num_classes(), 0.0);
  onehot[cls] = 1.0;
  return Backward(params, fwd.cache, onehot).input;
}

TrainResult Train(const Dataset& data, const AugmentedLabelMatrix& targets,
                  const TrainConfig& cfg) {
  if (data.size() == 0) throw Error(ErrorCode::kEmptyDataset, "training set is empty");
  if (cfg.epochs < 1 || cfg.batch_size < 1 || !(cfg.learning_rate > 0.0) ||
      !(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) {
    throw Error(ErrorCode::kBadConfig,
                "epochs and batch size must be >= 1, learning rate > 0, momentum in [0, 1)");
  }
  const int num_classes = static_cast<int>(targets.num_classes());
  if (targets.values.cols() != targets.values.rows()) {
    throw Error(ErrorCode::kBadShape, "target matrix must be square");
  }
  ValidateDataset(data, num_classes);

  std::vector<int> sizes{static_cast<int>(data.dim())};
  sizes.insert(sizes.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
  sizes.push_back(num_classes);

  TrainResult result;
  result.params = InitModel(sizes, cfg.seed);
  ModelParams& params = result.params;
  Gradients velocity = ZeroGradients(params);
  Gradients grad = ZeroGradients(params);
  Rng shuffle_rng(cfg.seed ^ kShuffleStreamSalt);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.Shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t errors = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (auto& layer : grad.layers) {
        std::fill(layer.weights.data().begin(), layer.weights.data().end(), 0.0);
        std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
      }
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t item = order[b];
        const int label = data.labels[item];
        const ForwardResult fwd = ForwardLogits(params, data.features.row(item));
        const SoftCrossEntropy ce = SoftCrossEntropyLoss(targets.values.row(label), fwd.logits);
        if (!std::isfinite(ce.loss)) {
          throw Error(ErrorCode::kNumericFailure,
                      "non-finite loss in epoch " + std::to_string(epoch + 1));
        }
        loss_sum += ce.loss;
        if (RankLogits(fwd.logits, 1).front() != label) ++errors;
        Accumulate(params, fwd.cache, ce.dlogits, scale, grad, false);
      }
      for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& w = params.layers[l].weights.data();
        auto& vw = velocity.layers[l].weights.data();
        const auto& gw = grad.layers[l].weights.data();
        for (std::size_t i = 0; i < w.size(); ++i) {
          vw[i] = cfg.momentum * vw[i] - cfg.learning_rate * gw[i];
          w[i] += vw[i];
        }
        auto& bias = params.layers[l].bias;
        auto& vb = velocity.layers[l].bias;
        const auto& gb = grad.layers[l].bias;
        for (std::size_t i = 0; i < bias.size(); ++i) {
          vb[i] = cfg.momentum * vb[i] - cfg.learning_rate * gb[i];
          bias[i] += vb[i];
        }
      }
    }
    result.history.push_back(EpochStats{loss_sum / static_cast<double>(data.size()),
                                        static_cast<double>(errors) /
                                            static_cast<double>(data.size())});
  }
  return result;
}

std::vector<int> RankLogits(std::span<const double> logits, int k) {
  if (k < 1 || k > static_cast<int>(logits.size())) {
    throw Error(ErrorCode::kBadK, "k = " + std::to_string(k) + " with " +
                                      std::to_string(logits.size()) + " classes");
  }
  std::vector<int> idx(logits.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return logits[a] > logits[b]; });
  idx.resize(k);
  return idx;
}

std::vector<int> PredictTopK(const ModelParams& params, std::span<const double> x, int k) {
  return RankLogits(ForwardLogits(params, x).logits, k);
}

std::vector<double> ExtractFeatures(const ModelParams& params, std::span<const double> x) {
  if (params.num_hidden_layers() < 1) {
    throw Error(ErrorCode::kNoHiddenLayer, "model has no hidden layer to extract");
  }
  ForwardResult fwd = ForwardLogits(params, x);
  auto& acts = fwd.cache.activations;
  return std::move(acts[acts.size() - 2]);
}

double GradCheck(const ModelParams& params, std::span<const double> x,
                 std::span<const double> target, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kBadEpsilon, "epsilon must be > 0");
  const ForwardResult fwd = ForwardLogits(params, x);
  const SoftCrossEntropy ce = SoftCrossEntropyLoss(target, fwd.logits);
  const Gradients analytic = Backward(params, fwd.cache, ce.dlogits);

  ModelParams probe = params;
  auto loss_at = [&]() {
    return SoftCrossEntropyLoss(target, ForwardLogits(probe, x).logits).loss;
  };
  double worst = 0.0;
  auto check = [&](double& slot, double a) {
    const double saved = slot;
    slot = saved + epsilon;
    const double up = loss_at();
    slot = saved - epsilon;
    const double down = loss_at();
    slot = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double scale = std::max(std::abs(a), std::abs(numeric));
    const double diff = std::abs(a - numeric);
    worst = std::max(worst, scale > 1e-10 ? diff / scale : diff);
  };
  for (std::size_t l = 0; l < probe.layers.size(); ++l) {
    auto& w = probe.layers[l].weights.data();
    const auto& gw = analytic.layers[l].weights.data();
    for (std::size_t i = 0; i < w.size(); ++i) check(w[i], gw[i]);
    auto& b = probe.layers[l].bias;
    for (std::size_t i = 0; i < b.size(); ++i) check(b[i], analytic.layers[l].bias[i]);
  }
  return worst;
}

std::string EncodeModel(const ModelParams& params) {
  std::string out(kModelMagic);
  auto put_u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  auto put_f64 = [&](double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  };
  put_u32(static_cast<std::uint32_t>(params.layer_sizes.size()));
  for (int s : params.layer_sizes) put_u32(static_cast<std::uint32_t>(s));
  for (const auto& layer : params.layers) {
    for (double w : layer.weights.data()) put_f64(w);
    for (double b : layer.bias) put_f64(b);
  }
  return out;
}

ModelParams DecodeModel(std::string_view bytes) {
  if (bytes.substr(0, kModelMagic.size()) != kModelMagic) {
    throw Error(ErrorCode::kBadMagic, "not a SALM1 model checkpoint");
  }
  std::size_t pos = kModelMagic.size();
  auto need = [&](std::size_t n) {
    if (bytes.size() - pos < n) {
      throw Error(ErrorCode::kTruncatedFile, "model checkpoint ends at byte " +
                                                 std::to_string(bytes.size()));
    }
  };
  auto get_u32 = [&]() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= std::uint32_t(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    }
    pos += 4;
    return v;
  };
  auto get_f64 = [&]() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= std::uint64_t(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    }
    pos += 8;
    return std::bit_cast<double>(v);
  };
  const std::uint32_t count = get_u32();
  if (count < 2 || count > 64) throw Error(ErrorCode::kBadShape, "implausible layer count");
  std::vector<int> sizes(count);
  for (auto& s : sizes) s = static_cast<int>(get_u32());
  std::size_t num_values = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    num_values += std::size_t(sizes[l] + 1) * static_cast<std::size_t>(sizes[l + 1]);
  }
  need(num_values * 8);
  ModelParams params = InitModel(sizes, 0);
  for (auto& layer : params.layers) {
    for (double& w : layer.weights.data()) w = get_f64();
    for (double& b : layer.bias) b = get_f64();
  }
  return params;
}

void SaveModel(const std::filesystem::path& path, const ModelParams& params) {
  WriteFileAtomic(path, EncodeModel(params));
}

ModelParams LoadModel(const std::filesystem::path& path) { return DecodeModel(ReadFile(path)); }

}  // namespace semlabels
