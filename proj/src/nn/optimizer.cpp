#include "rdnet/nn/optimizer.hpp"

#include <Eigen/Core>
#include <cmath>

namespace rdnet::nn {

template <typename T>
void Adam<T>::step(const std::vector<ParamRef<T>>& params) {
  if (m_.empty()) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto& p : params) {
      m_.emplace_back(p.value->shape());
      v_.emplace_back(p.value->shape());
    }
  }
  if (m_.size() != params.size()) {
    throw ShapeError("Adam: parameter list changed between steps");
  }
  ++t_;
  const double b1 = cfg_.beta1;
  const double b2 = cfg_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const ParamRef<T>& p = params[i];
    if (!p.trainable) continue;
    require_shape(p.grad->shape(), p.value->shape(), "Adam: gradient");
    require_shape(m_[i].shape(), p.value->shape(), "Adam: moment");
    const std::size_t n = p.value->size();
    Eigen::Map<Eigen::Array<T, Eigen::Dynamic, 1>> w(p.value->data(), n), m(m_[i].data(), n),
        v(v_[i].data(), n);
    Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>> g(p.grad->data(), n);
    m = static_cast<T>(b1) * m + static_cast<T>(1.0 - b1) * g;
    v = static_cast<T>(b2) * v + static_cast<T>(1.0 - b2) * g.square();
    w -= static_cast<T>(cfg_.lr / c1) * m /
         ((v * static_cast<T>(1.0 / c2)).sqrt() + static_cast<T>(cfg_.eps));
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace rdnet::nn
