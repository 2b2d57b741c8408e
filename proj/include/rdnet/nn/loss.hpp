#pragma once

#include "rdnet/nn/tensor.hpp"

namespace rdnet::nn {

template <typename T>
struct LossResult {
  double value = 0.0;
  Tensor<T> grad;  // dL/dpred
};

/// Squared error summed over every map cell and averaged over the batch:
///   L = (1/B) sum_b sum_{k,l} (pred - gt)^2,   dL/dpred = 2 (pred - gt) / B.
template <typename T>
LossResult<T> sse_loss(const Tensor<T>& pred, const Tensor<T>& gt);

}  // namespace rdnet::nn
