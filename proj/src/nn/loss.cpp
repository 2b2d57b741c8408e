#include "rdnet/nn/loss.hpp"

namespace rdnet::nn {

template <typename T>
LossResult<T> sse_loss(const Tensor<T>& pred, const Tensor<T>& gt) {
  require_shape(gt.shape(), pred.shape(), "sse_loss");
  const std::size_t batch = pred.shape().n;
  if (batch == 0) throw ShapeError("sse_loss: empty batch");
  const double inv_b = 1.0 / static_cast<double>(batch);
  LossResult<T> r{0.0, Tensor<T>(pred.shape())};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred[i]) - static_cast<double>(gt[i]);
    r.value += d * d;
    r.grad[i] = static_cast<T>(2.0 * d * inv_b);
  }
  r.value *= inv_b;
  return r;
}

template LossResult<float> sse_loss(const Tensor<float>&, const Tensor<float>&);
template LossResult<double> sse_loss(const Tensor<double>&, const Tensor<double>&);

}  // namespace rdnet::nn
