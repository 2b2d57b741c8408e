#pragma once

#include <cstdint>
#include <vector>

#include "rdnet/nn/layers.hpp"

namespace rdnet::nn {

struct AdamConfig {
  double lr = 8e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adaptive-moment optimizer with bias correction. Moment buffers are
/// created on the first step and tied to parameter order thereafter.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  /// Updates every trainable parameter from its accumulated gradient.
  /// Non-trainable entries are skipped but keep their slot.
  void step(const std::vector<ParamRef<T>>& params);

  std::uint64_t step_count() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }

 private:
  AdamConfig cfg_;
  std::uint64_t t_ = 0;
  std::vector<Tensor<T>> m_, v_;
};

}  // namespace rdnet::nn
