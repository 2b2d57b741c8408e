#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rdnet/common/rng.hpp"
#include "rdnet/dataset/rd_map.hpp"
#include "rdnet/nn/checkpoint.hpp"
#include "rdnet/nn/layers.hpp"
#include "rdnet/sim/radar.hpp"

namespace rdnet::model {

enum class StemKind {
  /// Global linear projection of (I, Q) onto the shifted 2D DFT bank
  /// (Re, Im per range-Doppler cell), followed by the stem convolutions.
  matched_filter,
  /// Stem convolutions applied to the raw (I, Q) planes.
  conv,
};

enum class HeadKind { dense, conv1x1 };

struct BlockSpec {
  std::size_t repeats = 3;  // U
  std::size_t kernel = 3;   // V
  std::size_t width = 32;
};

struct ModelConfig {
  std::size_t n_rows = 64;  // N
  std::size_t n_cols = 8;   // M
  std::size_t in_channels = 2;

  StemKind stem = StemKind::matched_filter;
  bool stem_trainable = false;  // matched-filter projection weights
  std::size_t stem_layers = 1;
  std::size_t stem_width = 32;
  std::size_t stem_kernel = 3;

  std::vector<BlockSpec> blocks = {{3, 3, 32}, {3, 3, 64}, {3, 3, 64}};
  HeadKind head = HeadKind::conv1x1;
  /// Variance gain of the head initialization; 0 starts the head at zero.
  double head_init_gain = 0.0;
  /// Fixed gain applied after the head. Labels reach a few hundred, so the
  /// head works in units of output_scale.
  double output_scale = 100.0;
  double dropout = 0.5;
  std::uint64_t seed = 1;

  void validate() const;
  /// key=value lines, parseable by from_text().
  std::string to_text() const;
  static ModelConfig from_text(const std::string& text);
};

/// Applies one configuration key; returns false when the key is unknown.
bool apply_model_key(ModelConfig& cfg, const std::string& key, const std::string& value);

/// Range-Doppler estimator network:
///   (B, 2, N, M) -> stem -> 3 residual blocks -> dropout -> head -> (B, 1, N, M).
/// Each block is U x (conv VxV -> batch-norm -> ReLU) plus a shortcut
/// (identity, or 1x1 projection when the width changes).
template <typename T>
class RdNet final : public nn::Layer<T> {
 public:
  explicit RdNet(const ModelConfig& cfg);

  std::string kind() const override { return "rdnet"; }
  nn::Shape output_shape(const nn::Shape& in) const override { return net_.output_shape(in); }
  nn::Tensor<T> forward(const nn::Tensor<T>& x, nn::Mode mode) override {
    return net_.forward(x, mode);
  }
  nn::Tensor<T> backward(const nn::Tensor<T>& g) override { return net_.backward(g); }
  void collect_params(const std::string& prefix, std::vector<nn::ParamRef<T>>& out) override {
    net_.collect_params(prefix, out);
  }
  void collect_buffers(const std::string& prefix, std::vector<nn::ParamRef<T>>& out) override {
    net_.collect_buffers(prefix, out);
  }
  void freeze_randomness(bool frozen) override { net_.freeze_randomness(frozen); }

  const ModelConfig& config() const { return cfg_; }
  nn::Sequential<T>& net() { return net_; }
  std::vector<nn::ResidualBlock<T>*>& residual_blocks() { return blocks_; }
  void set_shortcuts_enabled(bool on);
  std::size_t parameter_count();

  nn::Checkpoint to_checkpoint();
  /// Rebuilds the model described by the checkpoint metadata and loads it.
  static RdNet from_checkpoint(const nn::Checkpoint& ckpt);

 private:
  ModelConfig cfg_;
  nn::Sequential<T> net_;
  std::vector<nn::ResidualBlock<T>*> blocks_;
};

/// Weights of the matched-filter projection: row (c, u, v) holds the real
/// (c = 0) or imaginary (c = 1) part of the unitary DFT coefficient at
/// shifted bin (u, v), as a function of the flattened (I, Q) input.
template <typename T>
void init_matched_filter(nn::Dense<T>& dense, std::size_t n_rows, std::size_t n_cols);

/// (I, Q) planes of a channel estimate into sample `index` of x.
template <typename T>
void load_input(const sim::ChannelEstimate& h, nn::Tensor<T>& x, std::size_t index);
template <typename T>
void load_target(const RdMap& map, nn::Tensor<T>& y, std::size_t index);

/// Eval-mode prediction. The raw variant returns the linear head output;
/// predict() clamps negative cells to zero.
template <typename T>
std::vector<RdMap> predict_raw(RdNet<T>& model, std::span<const sim::ChannelEstimate> inputs,
                               std::size_t batch_size = 64);
template <typename T>
std::vector<RdMap> predict(RdNet<T>& model, std::span<const sim::ChannelEstimate> inputs,
                           std::size_t batch_size = 64);
template <typename T>
RdMap predict(RdNet<T>& model, const sim::ChannelEstimate& h);

}  // namespace rdnet::model
