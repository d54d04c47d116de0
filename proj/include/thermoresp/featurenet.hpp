#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Convolutional embedding used by the Siamese tracker: five valid
// convolutions, two max-pools, ReLU after the first four convolutions.
// Weights are seeded random values (zero-mean Gaussian, variance 1/fan_in);
// there is no training, so only geometry and the correlation mechanism are
// meaningful.

namespace thermoresp::tracker {

enum class LayerKind { conv, maxpool, relu };

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::conv;
  int in_channels = 0;  // conv only
  int out_channels = 0;
  int kernel = 1;
  int stride = 1;
};

struct FeatureNetSpec {
  std::vector<LayerSpec> layers;
  std::uint64_t weight_seed = 0;

  /// Conv-1 (1->96, k11, s2), MaxPool-1 (k3, s2), Conv-2 (96->256, k5),
  /// MaxPool-2 (k3, s2), Conv-3 (256->384, k3), Conv-4 (384->384, k3),
  /// Conv-5 (384->256, k3), with ReLU after Conv-1..Conv-4. Conv-1 takes a
  /// single thermal channel instead of three colour channels.
  static FeatureNetSpec standard(std::uint64_t weight_seed);

  /// Channel chaining and positive kernel/stride; throws invariant_violation.
  void validate() const;
  int total_stride() const noexcept;
  int output_channels() const noexcept;
};

struct LayerShape {
  std::string name;
  int h = 0;
  int w = 0;
  int c = 0;
};

/// Output shape after every conv and maxpool layer (ReLU layers keep shape
/// and are omitted), with s_out = floor((s_in - k) / stride) + 1. Throws
/// input_too_small when any layer would produce fewer than one position.
std::vector<LayerShape> feature_shapes(const FeatureNetSpec& spec, int input_side);
std::vector<LayerShape> feature_shapes(const FeatureNetSpec& spec, int input_h, int input_w);

/// Channel-major dense tensor: data[(c * h + y) * w + x].
struct Tensor {
  int c = 0;
  int h = 0;
  int w = 0;
  std::vector<float> data;

  float at(int ch, int y, int x) const noexcept {
    return data[(static_cast<std::size_t>(ch) * h + y) * w + x];
  }
  bool operator==(const Tensor&) const = default;
};

class FeatureNet {
 public:
  explicit FeatureNet(FeatureNetSpec spec);

  const FeatureNetSpec& spec() const noexcept { return spec_; }
  /// Weights of conv layer i in declaration order, laid out [out][in][ky][kx].
  const std::vector<std::vector<float>>& weights() const noexcept { return weights_; }

  Tensor embed(const Tensor& input) const;

 private:
  FeatureNetSpec spec_;
  std::vector<std::vector<float>> weights_;
};

/// Dense valid cross-correlation of exemplar features over search features,
/// summed over channels and divided by the exemplar element count. Result is
/// a single-channel (search - exemplar + 1)^2 map.
Tensor cross_correlate(const Tensor& exemplar, const Tensor& search);

}  // namespace thermoresp::tracker
