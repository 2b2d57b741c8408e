#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rdnet/common/errors.hpp"

namespace rdnet::nn {

/// Buffers start on Eigen's vector boundary, so the blocking of vectorised
/// kernels, and with it the rounding, does not depend on where the
/// allocator happened to place them.
template <typename T>
using AlignedVector = std::vector<T, Eigen::aligned_allocator<T>>;

/// (batch, channels, height, width).
struct Shape {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  std::size_t size() const { return n * c * h * w; }
  std::size_t per_sample() const { return c * h * w; }
  std::size_t plane() const { return h * w; }
  std::string str() const {
    return "(" + std::to_string(n) + ", " + std::to_string(c) + ", " + std::to_string(h) + ", " +
           std::to_string(w) + ")";
  }
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Dense NCHW tensor with contiguous storage.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T{0}) : shape_(shape), data_(shape.size(), fill) {}

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> span() { return data_; }
  std::span<const T> span() const { return data_; }

  /// Contiguous slice of sample i.
  T* sample(std::size_t i) { return data_.data() + i * shape_.per_sample(); }
  const T* sample(std::size_t i) const { return data_.data() + i * shape_.per_sample(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[((n * shape_.c + c) * shape_.h + h) * shape_.w + w];
  }
  const T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[((n * shape_.c + c) * shape_.h + h) * shape_.w + w];
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }
  void zero() { fill(T{0}); }

  /// Reinterprets the storage; the element count must not change.
  void reshape(Shape s) {
    if (s.size() != data_.size()) {
      throw ShapeError("reshape " + shape_.str() + " -> " + s.str() + " changes element count");
    }
    shape_ = s;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(shape_);
    std::transform(data_.begin(), data_.end(), out.data(), [](T v) { return static_cast<U>(v); });
    return out;
  }

 private:
  Shape shape_;
  AlignedVector<T> data_;
};

inline void require_shape(const Shape& got, const Shape& want, const char* where) {
  if (got != want) {
    throw ShapeError(std::string(where) + ": expected " + want.str() + ", got " + got.str());
  }
}

/// NaN/Inf guard, active in debug builds only.
template <typename T>
void debug_check_finite([[maybe_unused]] const Tensor<T>& t, [[maybe_unused]] const char* where) {
#ifndef NDEBUG
  if (!t.all_finite()) throw std::runtime_error(std::string("non-finite values after ") + where);
#endif
}

}  // namespace rdnet::nn
