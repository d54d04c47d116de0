#include "thermoresp/featurenet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "thermoresp/error.hpp"
#include "thermoresp/rng.hpp"

namespace thermoresp::tracker {

namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

int out_size(int in, int kernel, int stride) noexcept {
  return in < kernel ? 0 : (in - kernel) / stride + 1;
}

Tensor conv2d(const Tensor& in, const LayerSpec& layer, const std::vector<float>& weights) {
  const int k = layer.kernel;
  const int s = layer.stride;
  const int oh = out_size(in.h, k, s);
  const int ow = out_size(in.w, k, s);
  const int patch = in.c * k * k;
  const int positions = oh * ow;

  // im2col: column p holds the receptive field of output position p.
  Eigen::MatrixXf cols(patch, positions);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      float* col = cols.col(y * ow + x).data();
      for (int ci = 0; ci < in.c; ++ci) {
        for (int ky = 0; ky < k; ++ky) {
          const float* src = &in.data[(static_cast<std::size_t>(ci) * in.h + y * s + ky) * in.w + x * s];
          std::copy(src, src + k, col);
          col += k;
        }
      }
    }
  }
  const Eigen::Map<const RowMatrix> w(weights.data(), layer.out_channels, patch);
  RowMatrix out = w * cols;

  Tensor result{layer.out_channels, oh, ow, {}};
  result.data.assign(out.data(), out.data() + out.size());
  return result;
}

Tensor max_pool(const Tensor& in, const LayerSpec& layer) {
  const int k = layer.kernel;
  const int s = layer.stride;
  Tensor out{in.c, out_size(in.h, k, s), out_size(in.w, k, s), {}};
  out.data.resize(static_cast<std::size_t>(out.c) * out.h * out.w);
  for (int c = 0; c < in.c; ++c) {
    for (int y = 0; y < out.h; ++y) {
      for (int x = 0; x < out.w; ++x) {
        float best = -std::numeric_limits<float>::infinity();
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) best = std::max(best, in.at(c, y * s + ky, x * s + kx));
        }
        out.data[(static_cast<std::size_t>(c) * out.h + y) * out.w + x] = best;
      }
    }
  }
  return out;
}

}  // namespace

FeatureNetSpec FeatureNetSpec::standard(std::uint64_t weight_seed) {
  FeatureNetSpec spec;
  spec.weight_seed = weight_seed;
  spec.layers = {
      {"Conv-1", LayerKind::conv, 1, 96, 11, 2},
      {"ReLU-1", LayerKind::relu, 0, 0, 1, 1},
      {"MaxPool-1", LayerKind::maxpool, 0, 0, 3, 2},
      {"Conv-2", LayerKind::conv, 96, 256, 5, 1},
      {"ReLU-2", LayerKind::relu, 0, 0, 1, 1},
      {"MaxPool-2", LayerKind::maxpool, 0, 0, 3, 2},
      {"Conv-3", LayerKind::conv, 256, 384, 3, 1},
      {"ReLU-3", LayerKind::relu, 0, 0, 1, 1},
      {"Conv-4", LayerKind::conv, 384, 384, 3, 1},
      {"ReLU-4", LayerKind::relu, 0, 0, 1, 1},
      {"Conv-5", LayerKind::conv, 384, 256, 3, 1},
  };
  return spec;
}

void FeatureNetSpec::validate() const {
  int channels = -1;
  for (const auto& layer : layers) {
    if (layer.kernel < 1 || layer.stride < 1) {
      fail(ErrorCode::invariant_violation, layer.name + ": kernel and stride must be >= 1");
    }
    if (layer.kind == LayerKind::conv) {
      if (channels >= 0 && layer.in_channels != channels) {
        fail(ErrorCode::invariant_violation,
             layer.name + ": in_channels " + std::to_string(layer.in_channels) +
                 " does not chain from " + std::to_string(channels));
      }
      if (layer.in_channels < 1 || layer.out_channels < 1) {
        fail(ErrorCode::invariant_violation, layer.name + ": channel counts must be >= 1");
      }
      channels = layer.out_channels;
    }
  }
}

int FeatureNetSpec::total_stride() const noexcept {
  int s = 1;
  for (const auto& layer : layers) {
    if (layer.kind != LayerKind::relu) s *= layer.stride;
  }
  return s;
}

int FeatureNetSpec::output_channels() const noexcept {
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    if (it->kind == LayerKind::conv) return it->out_channels;
  }
  return 1;
}

std::vector<LayerShape> feature_shapes(const FeatureNetSpec& spec, int input_h, int input_w) {
  spec.validate();
  std::vector<LayerShape> shapes;
  int h = input_h;
  int w = input_w;
  int c = 1;
  for (const auto& layer : spec.layers) {
    if (layer.kind == LayerKind::relu) continue;
    h = out_size(h, layer.kernel, layer.stride);
    w = out_size(w, layer.kernel, layer.stride);
    if (layer.kind == LayerKind::conv) c = layer.out_channels;
    if (h < 1 || w < 1) {
      fail(ErrorCode::input_too_small,
           "input " + std::to_string(input_h) + "x" + std::to_string(input_w) +
               " collapses below 1x1 at " + layer.name);
    }
    shapes.push_back({layer.name, h, w, c});
  }
  return shapes;
}

std::vector<LayerShape> feature_shapes(const FeatureNetSpec& spec, int input_side) {
  return feature_shapes(spec, input_side, input_side);
}

FeatureNet::FeatureNet(FeatureNetSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  std::uint64_t layer_index = 0;
  for (const auto& layer : spec_.layers) {
    if (layer.kind != LayerKind::conv) continue;
    const std::size_t fan_in = static_cast<std::size_t>(layer.in_channels) * layer.kernel * layer.kernel;
    const float scale = static_cast<float>(1.0 / std::sqrt(static_cast<double>(fan_in)));
    rng::SplitMix64 stream(rng::derive(spec_.weight_seed, 0x636F6E76ULL, layer_index++));
    std::vector<float> w(fan_in * layer.out_channels);
    for (float& v : w) v = static_cast<float>(stream.normal()) * scale;
    weights_.push_back(std::move(w));
  }
}

Tensor FeatureNet::embed(const Tensor& input) const {
  Tensor x = input;
  std::size_t conv_index = 0;
  for (const auto& layer : spec_.layers) {
    switch (layer.kind) {
      case LayerKind::conv:
        if (x.c != layer.in_channels) {
          fail(ErrorCode::invariant_violation, layer.name + ": input channel mismatch");
        }
        if (x.h < layer.kernel || x.w < layer.kernel) {
          fail(ErrorCode::input_too_small, "input collapses at " + layer.name);
        }
        x = conv2d(x, layer, weights_[conv_index++]);
        break;
      case LayerKind::maxpool:
        if (x.h < layer.kernel || x.w < layer.kernel) {
          fail(ErrorCode::input_too_small, "input collapses at " + layer.name);
        }
        x = max_pool(x, layer);
        break;
      case LayerKind::relu:
        for (float& v : x.data) v = std::max(v, 0.0f);
        break;
    }
  }
  return x;
}

Tensor cross_correlate(const Tensor& exemplar, const Tensor& search) {
  if (exemplar.c != search.c) fail(ErrorCode::invariant_violation, "feature channel mismatch");
  if (search.h < exemplar.h || search.w < exemplar.w) {
    fail(ErrorCode::search_window_too_small, "search features smaller than exemplar features");
  }
  Tensor out{1, search.h - exemplar.h + 1, search.w - exemplar.w + 1, {}};
  out.data.assign(static_cast<std::size_t>(out.h) * out.w, 0.0f);
  const double norm = static_cast<double>(exemplar.data.size());
  for (int r = 0; r < out.h; ++r) {
    for (int c = 0; c < out.w; ++c) {
      double acc = 0.0;
      for (int ch = 0; ch < exemplar.c; ++ch) {
        for (int i = 0; i < exemplar.h; ++i) {
          const float* e = &exemplar.data[(static_cast<std::size_t>(ch) * exemplar.h + i) * exemplar.w];
          const float* s = &search.data[(static_cast<std::size_t>(ch) * search.h + r + i) * search.w + c];
          for (int j = 0; j < exemplar.w; ++j) acc += static_cast<double>(e[j]) * s[j];
        }
      }
      out.data[static_cast<std::size_t>(r) * out.w + c] = static_cast<float>(acc / norm);
    }
  }
  return out;
}

}  // namespace thermoresp::tracker
