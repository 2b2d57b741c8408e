#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rdnet/common/rng.hpp"
#include "rdnet/nn/tensor.hpp"

namespace rdnet::nn {

enum class Mode { train, eval };

/// Named view of a parameter (value + gradient) or of a non-trainable buffer
/// such as batch-norm running statistics (grad == nullptr).
template <typename T>
struct ParamRef {
  std::string name;
  Tensor<T>* value = nullptr;
  Tensor<T>* grad = nullptr;
  bool trainable = true;
};

/// A differentiable layer. forward() caches whatever backward() needs;
/// backward() takes dL/d(output), accumulates parameter gradients and
/// returns dL/d(input).
template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string kind() const = 0;
  virtual Shape output_shape(const Shape& in) const = 0;
  virtual Tensor<T> forward(const Tensor<T>& x, Mode mode) = 0;
  virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;

  virtual void collect_params(const std::string& /*prefix*/, std::vector<ParamRef<T>>& /*out*/) {}
  virtual void collect_buffers(const std::string& /*prefix*/, std::vector<ParamRef<T>>& /*out*/) {}
  /// While frozen, stochastic layers replay their last random draw. Used by
  /// the gradient checker.
  virtual void freeze_randomness(bool /*frozen*/) {}

  std::vector<ParamRef<T>> params(const std::string& prefix = "") {
    std::vector<ParamRef<T>> out;
    collect_params(prefix, out);
    return out;
  }
  std::vector<ParamRef<T>> buffers(const std::string& prefix = "") {
    std::vector<ParamRef<T>> out;
    collect_buffers(prefix, out);
    return out;
  }
  void zero_grad() {
    for (auto& p : params()) p.grad->zero();
  }
};

template <typename T>
using LayerPtr = std::unique_ptr<Layer<T>>;

/// 2D cross-correlation, stride 1, zero "same" padding (odd kernels).
/// Weights are (out, in, kh, kw).
template <typename T>
class Conv2d final : public Layer<T> {
 public:
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kh, std::size_t kw);

  std::string kind() const override { return "conv2d"; }
  Shape output_shape(const Shape& in) const override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  void collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out) override;

  /// Fan-in scaled Gaussian weights (std = sqrt(gain / fan_in)), zero bias.
  void init(Rng& rng, double gain = 2.0);

  Tensor<T>& weight() { return weight_; }
  Tensor<T>& bias() { return bias_; }
  std::size_t in_channels() const { return in_c_; }
  std::size_t out_channels() const { return out_c_; }

 private:
  // Column-masked, row-padded copies of one input sample, one per
  // horizontal kernel offset. A tap (oy, ox) is then a strided view of the
  // copy for ox shifted by oy * W + ox in flat index.
  void pack_shifted(const T* x, T* buf) const;
  std::size_t pad() const { return (kh_ / 2) * w_ + kw_ / 2; }
  std::size_t channel_stride() const { return h_ * w_ + 2 * pad(); }

  std::size_t in_c_, out_c_, kh_, kw_;
  Tensor<T> weight_, bias_, grad_weight_, grad_bias_;
  Tensor<T> input_;
  std::size_t h_ = 0, w_ = 0;
};

/// Per-channel batch normalisation over (batch, height, width).
/// Running statistics follow r <- momentum * r + (1 - momentum) * batch_stat.
template <typename T>
class BatchNorm2d final : public Layer<T> {
 public:
  explicit BatchNorm2d(std::size_t channels, double eps = 1e-5, double momentum = 0.9);

  std::string kind() const override { return "batchnorm2d"; }
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  void collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out) override;
  void collect_buffers(const std::string& prefix, std::vector<ParamRef<T>>& out) override;

  Tensor<T>& gamma() { return gamma_; }
  Tensor<T>& beta() { return beta_; }
  Tensor<T>& running_mean() { return running_mean_; }
  Tensor<T>& running_var() { return running_var_; }

 private:
  std::size_t channels_;
  double eps_, momentum_;
  Tensor<T> gamma_, beta_, grad_gamma_, grad_beta_;
  Tensor<T> running_mean_, running_var_;
  Tensor<T> xhat_;
  AlignedVector<T> inv_std_;
  Mode last_mode_ = Mode::eval;
};

template <typename T>
class ReLU final : public Layer<T> {
 public:
  std::string kind() const override { return "relu"; }
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;

 private:
  Tensor<T> output_;
};

/// Inverted dropout: in train mode units are zeroed with probability `rate`
/// and survivors scaled by 1/(1 - rate); eval mode is the identity.
template <typename T>
class Dropout final : public Layer<T> {
 public:
  Dropout(double rate, std::uint64_t seed);

  std::string kind() const override { return "dropout"; }
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  void freeze_randomness(bool frozen) override { frozen_ = frozen; }

  double rate() const { return rate_; }
  void reseed(std::uint64_t seed) { rng_ = Rng(seed); }

 private:
  double rate_;
  Rng rng_;
  Tensor<T> mask_;
  bool frozen_ = false;
  bool identity_ = true;
};

/// Fully connected layer over the flattened (c, h, w) features of each
/// sample; output shape (n, out_features, 1, 1). Weights are (out, in).
template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(std::size_t in_features, std::size_t out_features);

  std::string kind() const override { return "dense"; }
  Shape output_shape(const Shape& in) const override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  void collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out) override;

  void init(Rng& rng, double gain = 1.0);
  void set_trainable(bool trainable) { trainable_ = trainable; }
  bool trainable() const { return trainable_; }

  Tensor<T>& weight() { return weight_; }
  Tensor<T>& bias() { return bias_; }

 private:
  std::size_t in_, out_;
  Tensor<T> weight_, bias_, grad_weight_, grad_bias_;
  Tensor<T> input_;
  bool trainable_ = true;
};

/// Reinterprets each sample as (c, h, w).
template <typename T>
class Reshape final : public Layer<T> {
 public:
  Reshape(std::size_t c, std::size_t h, std::size_t w) : c_(c), h_(h), w_(w) {}

  std::string kind() const override { return "reshape"; }
  Shape output_shape(const Shape& in) const override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;

 private:
  std::size_t c_, h_, w_;
  Shape in_shape_;
};

/// Ordered chain of layers. Parameter names are "<prefix><index>.<name>".
/// Multiplies by a fixed constant.
template <typename T>
class Scale final : public Layer<T> {
 public:
  explicit Scale(double factor) : factor_(factor) {}

  std::string kind() const override { return "scale"; }
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  double factor() const { return factor_; }

 private:
  double factor_;
};

template <typename T>
class Sequential : public Layer<T> {
 public:
  Sequential() = default;

  template <typename L, typename... Args>
  L& add(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }
  void push(LayerPtr<T> layer) { layers_.push_back(std::move(layer)); }

  std::string kind() const override { return "sequential"; }
  Shape output_shape(const Shape& in) const override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  void collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out) override;
  void collect_buffers(const std::string& prefix, std::vector<ParamRef<T>>& out) override;
  void freeze_randomness(bool frozen) override;

  std::size_t size() const { return layers_.size(); }
  Layer<T>& operator[](std::size_t i) { return *layers_[i]; }

 private:
  std::vector<LayerPtr<T>> layers_;
};

/// Elementwise x + skip. Throws ShapeError if the shapes differ.
template <typename T>
Tensor<T> residual_add(const Tensor<T>& x, const Tensor<T>& skip);

/// body(x) + shortcut(x), where the shortcut is the identity or, when the
/// channel count changes, a 1x1 projection convolution.
template <typename T>
class ResidualBlock final : public Layer<T> {
 public:
  ResidualBlock(std::size_t in_channels, std::size_t out_channels);

  std::string kind() const override { return "residual"; }
  Shape output_shape(const Shape& in) const override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  void collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out) override;
  void collect_buffers(const std::string& prefix, std::vector<ParamRef<T>>& out) override;
  void freeze_randomness(bool frozen) override { body_.freeze_randomness(frozen); }

  Sequential<T>& body() { return body_; }
  Conv2d<T>* projection() { return projection_.get(); }
  /// Ablation switch: with the shortcut disabled the block is body(x) only.
  void set_shortcut_enabled(bool on) { shortcut_enabled_ = on; }
  bool shortcut_enabled() const { return shortcut_enabled_; }

 private:
  Sequential<T> body_;
  std::unique_ptr<Conv2d<T>> projection_;
  bool shortcut_enabled_ = true;
};

}  // namespace rdnet::nn
