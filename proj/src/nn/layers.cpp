#include "rdnet/nn/layers.hpp"

#include <Eigen/Core>
#include <cmath>

namespace rdnet::nn {

namespace {

template <typename T>
using MatR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapR = Eigen::Map<MatR<T>>;
template <typename T>
using CMapR = Eigen::Map<const MatR<T>>;
template <typename T>
using CVec = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;
template <typename T>
using Vec = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;
template <typename T>
using Arr = Eigen::Map<Eigen::Array<T, Eigen::Dynamic, 1>>;
template <typename T>
using CArr = Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>>;
template <typename T>
using StridedMap = Eigen::Map<MatR<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using StridedCMap = Eigen::Map<const MatR<T>, 0, Eigen::OuterStride<>>;

template <typename T>
void fill_gaussian(Tensor<T>& t, Rng& rng, double stddev) {
  if (stddev == 0.0) {
    t.zero();
    return;
  }
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(rng.normal(0.0, stddev));
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

template <typename T>
Conv2d<T>::Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kh,
                  std::size_t kw)
    : in_c_(in_channels),
      out_c_(out_channels),
      kh_(kh),
      kw_(kw),
      weight_({out_channels, in_channels, kh, kw}),
      bias_({1, out_channels, 1, 1}),
      grad_weight_({out_channels, in_channels, kh, kw}),
      grad_bias_({1, out_channels, 1, 1}) {
  if (kh % 2 == 0 || kw % 2 == 0) throw DomainError("Conv2d: kernel sizes must be odd");
  if (in_channels == 0 || out_channels == 0) throw DomainError("Conv2d: zero channels");
}

template <typename T>
void Conv2d<T>::init(Rng& rng, double gain) {
  const double fan_in = static_cast<double>(in_c_ * kh_ * kw_);
  fill_gaussian(weight_, rng, std::sqrt(gain / fan_in));
  bias_.zero();
}

template <typename T>
Shape Conv2d<T>::output_shape(const Shape& in) const {
  if (in.c != in_c_) {
    throw ShapeError("Conv2d: expected " + std::to_string(in_c_) + " input channels, got " +
                     std::to_string(in.c));
  }
  return {in.n, out_c_, in.h, in.w};
}

template <typename T>
void Conv2d<T>::pack_shifted(const T* x, T* buf) const {
  const std::size_t p = h_ * w_;
  const std::size_t stride = channel_stride();
  const auto pw = static_cast<std::ptrdiff_t>(kw_ / 2);
  const auto W = static_cast<std::ptrdiff_t>(w_);
  for (std::size_t dx = 0; dx < kw_; ++dx) {
    const std::ptrdiff_t ox = static_cast<std::ptrdiff_t>(dx) - pw;
    // Columns whose values would be read across a row boundary.
    const std::ptrdiff_t bad_lo = ox < 0 ? std::max<std::ptrdiff_t>(0, W + ox) : 0;
    const std::ptrdiff_t bad_hi = ox < 0 ? W : std::min(W, ox);
    T* var = buf + dx * in_c_ * stride;
    for (std::size_t ci = 0; ci < in_c_; ++ci) {
      T* dst = var + ci * stride;
      std::fill(dst, dst + pad(), T{0});
      std::copy(x + ci * p, x + (ci + 1) * p, dst + pad());
      std::fill(dst + pad() + p, dst + stride, T{0});
      if (bad_hi > bad_lo) {
        for (std::size_t base = pad(); base < pad() + p; base += w_) {
          std::fill(dst + base + bad_lo, dst + base + bad_hi, T{0});
        }
      }
    }
  }
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x, Mode /*mode*/) {
  const Shape out_shape = output_shape(x.shape());
  input_ = x;
  h_ = x.shape().h;
  w_ = x.shape().w;
  const std::size_t p = h_ * w_;
  Tensor<T> y(out_shape);
  CVec<T> b(bias_.data(), out_c_);

  if (kh_ == 1 && kw_ == 1) {
    CMapR<T> wm(weight_.data(), out_c_, in_c_);
    for (std::size_t n = 0; n < x.shape().n; ++n) {
      MapR<T> ym(y.sample(n), out_c_, p);
      ym.noalias() = wm * CMapR<T>(x.sample(n), in_c_, p);
      ym.colwise() += b;
    }
    return y;
  }

  const std::size_t stride = channel_stride();
  const auto W = static_cast<std::ptrdiff_t>(w_);
  AlignedVector<T> buf(kw_ * in_c_ * stride);
  // Per-tap weight matrices (out_c, in_c).
  std::vector<MatR<T>> taps(kh_ * kw_);
  for (std::size_t t = 0; t < taps.size(); ++t) {
    taps[t].resize(out_c_, in_c_);
    for (std::size_t o = 0; o < out_c_; ++o) {
      for (std::size_t i = 0; i < in_c_; ++i) {
        taps[t](o, i) = weight_[(o * in_c_ + i) * kh_ * kw_ + t];
      }
    }
  }
  for (std::size_t n = 0; n < x.shape().n; ++n) {
    pack_shifted(x.sample(n), buf.data());
    MapR<T> ym(y.sample(n), out_c_, p);
    ym.colwise() = b;
    for (std::size_t dy = 0; dy < kh_; ++dy) {
      const std::ptrdiff_t oy = static_cast<std::ptrdiff_t>(dy) - static_cast<std::ptrdiff_t>(kh_ / 2);
      for (std::size_t dx = 0; dx < kw_; ++dx) {
        const std::ptrdiff_t ox = static_cast<std::ptrdiff_t>(dx) - static_cast<std::ptrdiff_t>(kw_ / 2);
        const T* base = buf.data() + dx * in_c_ * stride + pad() + oy * W + ox;
        StridedCMap<T> xv(base, in_c_, p, Eigen::OuterStride<>(stride));
        ym.noalias() += taps[dy * kw_ + dx] * xv;
      }
    }
  }
  debug_check_finite(y, "conv2d");
  return y;
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& grad_out) {
  require_shape(grad_out.shape(), output_shape(input_.shape()), "Conv2d::backward");
  const std::size_t p = h_ * w_;
  Tensor<T> dx(input_.shape());
  Vec<T> db(grad_bias_.data(), out_c_);

  if (kh_ == 1 && kw_ == 1) {
    CMapR<T> wm(weight_.data(), out_c_, in_c_);
    MapR<T> dw(grad_weight_.data(), out_c_, in_c_);
    for (std::size_t n = 0; n < input_.shape().n; ++n) {
      CMapR<T> dy(grad_out.sample(n), out_c_, p);
      dw.noalias() += dy * CMapR<T>(input_.sample(n), in_c_, p).transpose();
      db += dy.rowwise().sum();
      MapR<T>(dx.sample(n), in_c_, p).noalias() = wm.transpose() * dy;
    }
    return dx;
  }

  const std::size_t stride = channel_stride();
  const std::size_t n_taps = kh_ * kw_;
  const auto W = static_cast<std::ptrdiff_t>(w_);
  const auto pw = static_cast<std::ptrdiff_t>(kw_ / 2);
  AlignedVector<T> buf(kw_ * in_c_ * stride);
  AlignedVector<T> dbuf(kw_ * in_c_ * stride);
  std::vector<MatR<T>> taps(n_taps), dtaps(n_taps);
  for (std::size_t t = 0; t < n_taps; ++t) {
    taps[t].resize(out_c_, in_c_);
    dtaps[t] = MatR<T>::Zero(out_c_, in_c_);
    for (std::size_t o = 0; o < out_c_; ++o) {
      for (std::size_t i = 0; i < in_c_; ++i) {
        taps[t](o, i) = weight_[(o * in_c_ + i) * n_taps + t];
      }
    }
  }

  for (std::size_t n = 0; n < input_.shape().n; ++n) {
    CMapR<T> dy(grad_out.sample(n), out_c_, p);
    db += dy.rowwise().sum();
    pack_shifted(input_.sample(n), buf.data());
    std::fill(dbuf.begin(), dbuf.end(), T{0});
    for (std::size_t ky = 0; ky < kh_; ++ky) {
      const std::ptrdiff_t oy = static_cast<std::ptrdiff_t>(ky) - static_cast<std::ptrdiff_t>(kh_ / 2);
      for (std::size_t kx = 0; kx < kw_; ++kx) {
        const std::ptrdiff_t ox = static_cast<std::ptrdiff_t>(kx) - pw;
        const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(kx * in_c_ * stride + pad()) + oy * W + ox;
        StridedCMap<T> xv(buf.data() + off, in_c_, p, Eigen::OuterStride<>(stride));
        StridedMap<T> dxv(dbuf.data() + off, in_c_, p, Eigen::OuterStride<>(stride));
        const std::size_t t = ky * kw_ + kx;
        dtaps[t].noalias() += dy * xv.transpose();
        dxv.noalias() += taps[t].transpose() * dy;
      }
    }
    // Fold the per-offset copies back, dropping the masked columns.
    T* dxs = dx.sample(n);
    for (std::size_t kx = 0; kx < kw_; ++kx) {
      const std::ptrdiff_t ox = static_cast<std::ptrdiff_t>(kx) - pw;
      const std::ptrdiff_t bad_lo = ox < 0 ? std::max<std::ptrdiff_t>(0, W + ox) : 0;
      const std::ptrdiff_t bad_hi = ox < 0 ? W : std::min(W, ox);
      const T* var = dbuf.data() + kx * in_c_ * stride;
      for (std::size_t ci = 0; ci < in_c_; ++ci) {
        const T* src = var + ci * stride + pad();
        T* dst = dxs + ci * p;
        for (std::size_t row = 0; row < h_; ++row) {
          for (std::ptrdiff_t col = 0; col < W; ++col) {
            if (col >= bad_lo && col < bad_hi) continue;
            dst[row * w_ + col] += src[row * w_ + col];
          }
        }
      }
    }
  }

  for (std::size_t t = 0; t < n_taps; ++t) {
    for (std::size_t o = 0; o < out_c_; ++o) {
      for (std::size_t i = 0; i < in_c_; ++i) {
        grad_weight_[(o * in_c_ + i) * n_taps + t] += dtaps[t](o, i);
      }
    }
  }
  return dx;
}

template <typename T>
void Conv2d<T>::collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out) {
  out.push_back({prefix + "weight", &weight_, &grad_weight_, true});
  out.push_back({prefix + "bias", &bias_, &grad_bias_, true});
}

// ----------------------------------------------------------- BatchNorm2d

template <typename T>
BatchNorm2d<T>::BatchNorm2d(std::size_t channels, double eps, double momentum)
    : channels_(channels),
      eps_(eps),
      momentum_(momentum),
      gamma_({1, channels, 1, 1}, T{1}),
      beta_({1, channels, 1, 1}),
      grad_gamma_({1, channels, 1, 1}),
      grad_beta_({1, channels, 1, 1}),
      running_mean_({1, channels, 1, 1}),
      running_var_({1, channels, 1, 1}, T{1}),
      inv_std_(channels) {}

template <typename T>
Tensor<T> BatchNorm2d<T>::forward(const Tensor<T>& x, Mode mode) {
  const Shape& s = x.shape();
  if (s.c != channels_) throw ShapeError("BatchNorm2d: channel mismatch, got " + s.str());
  const std::size_t plane = s.plane();
  const double count = static_cast<double>(s.n * plane);
  last_mode_ = mode;
  xhat_ = Tensor<T>(s);
  Tensor<T> y(s);

  for (std::size_t c = 0; c < channels_; ++c) {
    double mean = 0.0;
    double var = 0.0;
    if (mode == Mode::train) {
      // Per-plane partial sums in T, accumulated across the batch in double.
      for (std::size_t n = 0; n < s.n; ++n) {
        mean += static_cast<double>(CArr<T>(x.sample(n) + c * plane, plane).sum());
      }
      mean /= count;
      const T mean_t = static_cast<T>(mean);
      for (std::size_t n = 0; n < s.n; ++n) {
        var += static_cast<double>(
            (CArr<T>(x.sample(n) + c * plane, plane) - mean_t).square().sum());
      }
      var /= count;
      running_mean_[c] =
          static_cast<T>(momentum_ * static_cast<double>(running_mean_[c]) + (1.0 - momentum_) * mean);
      running_var_[c] =
          static_cast<T>(momentum_ * static_cast<double>(running_var_[c]) + (1.0 - momentum_) * var);
    } else {
      mean = static_cast<double>(running_mean_[c]);
      var = static_cast<double>(running_var_[c]);
    }
    const T inv_std = static_cast<T>(1.0 / std::sqrt(var + eps_));
    const T mean_t = static_cast<T>(mean);
    inv_std_[c] = inv_std;
    const T g = gamma_[c];
    const T b = beta_[c];
    for (std::size_t n = 0; n < s.n; ++n) {
      Arr<T> xh(xhat_.sample(n) + c * plane, plane);
      xh = (CArr<T>(x.sample(n) + c * plane, plane) - mean_t) * inv_std;
      Arr<T>(y.sample(n) + c * plane, plane) = xh * g + b;
    }
  }
  debug_check_finite(y, "batchnorm2d");
  return y;
}

template <typename T>
Tensor<T> BatchNorm2d<T>::backward(const Tensor<T>& grad_out) {
  const Shape& s = xhat_.shape();
  require_shape(grad_out.shape(), s, "BatchNorm2d::backward");
  const std::size_t plane = s.plane();
  const double count = static_cast<double>(s.n * plane);
  Tensor<T> dx(s);

  for (std::size_t c = 0; c < channels_; ++c) {
    double sum_dy = 0.0;
    double sum_dy_xhat = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      CArr<T> dy(grad_out.sample(n) + c * plane, plane);
      CArr<T> xh(xhat_.sample(n) + c * plane, plane);
      sum_dy += static_cast<double>(dy.sum());
      sum_dy_xhat += static_cast<double>((dy * xh).sum());
    }
    grad_gamma_[c] += static_cast<T>(sum_dy_xhat);
    grad_beta_[c] += static_cast<T>(sum_dy);

    const T scale = static_cast<T>(static_cast<double>(gamma_[c]) * static_cast<double>(inv_std_[c]));
    const T mean_dy = static_cast<T>(sum_dy / count);
    const T mean_dy_xhat = static_cast<T>(sum_dy_xhat / count);
    for (std::size_t n = 0; n < s.n; ++n) {
      CArr<T> dy(grad_out.sample(n) + c * plane, plane);
      Arr<T> dxc(dx.sample(n) + c * plane, plane);
      if (last_mode_ == Mode::train) {
        CArr<T> xh(xhat_.sample(n) + c * plane, plane);
        dxc = scale * (dy - mean_dy - xh * mean_dy_xhat);
      } else {
        dxc = scale * dy;
      }
    }
  }
  return dx;
}

template <typename T>
void BatchNorm2d<T>::collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out) {
  out.push_back({prefix + "gamma", &gamma_, &grad_gamma_, true});
  out.push_back({prefix + "beta", &beta_, &grad_beta_, true});
}

template <typename T>
void BatchNorm2d<T>::collect_buffers(const std::string& prefix, std::vector<ParamRef<T>>& out) {
  out.push_back({prefix + "running_mean", &running_mean_, nullptr, false});
  out.push_back({prefix + "running_var", &running_var_, nullptr, false});
}

// ------------------------------------------------------------------ ReLU

template <typename T>
Tensor<T> ReLU<T>::forward(const Tensor<T>& x, Mode /*mode*/) {
  Tensor<T> y(x.shape());
  Arr<T>(y.data(), y.size()) = CArr<T>(x.data(), x.size()).max(T{0});
  output_ = y;
  return y;
}

template <typename T>
Tensor<T> ReLU<T>::backward(const Tensor<T>& grad_out) {
  require_shape(grad_out.shape(), output_.shape(), "ReLU::backward");
  Tensor<T> dx(output_.shape());
  CArr<T> out(output_.data(), output_.size());
  Arr<T>(dx.data(), dx.size()) = (out > T{0}).select(CArr<T>(grad_out.data(), grad_out.size()), T{0});
  return dx;
}

// --------------------------------------------------------------- Dropout

template <typename T>
Dropout<T>::Dropout(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw DomainError("Dropout: rate must be in [0, 1)");
}

template <typename T>
Tensor<T> Dropout<T>::forward(const Tensor<T>& x, Mode mode) {
  identity_ = mode == Mode::eval || rate_ == 0.0;
  if (identity_) return x;
  if (!frozen_ || mask_.shape() != x.shape()) {
    mask_ = Tensor<T>(x.shape());
    const T keep_scale = static_cast<T>(1.0 / (1.0 - rate_));
    // Each 64-bit draw yields two 32-bit uniforms.
    const auto threshold = static_cast<std::uint64_t>(std::llround(rate_ * 4294967296.0));
    for (std::size_t i = 0; i < mask_.size(); i += 2) {
      const std::uint64_t bits = rng_.next_u64();
      mask_[i] = (bits & 0xffffffffull) < threshold ? T{0} : keep_scale;
      if (i + 1 < mask_.size()) mask_[i + 1] = (bits >> 32) < threshold ? T{0} : keep_scale;
    }
  }
  Tensor<T> y(x.shape());
  Arr<T>(y.data(), y.size()) = CArr<T>(x.data(), x.size()) * CArr<T>(mask_.data(), mask_.size());
  return y;
}

template <typename T>
Tensor<T> Dropout<T>::backward(const Tensor<T>& grad_out) {
  if (identity_) return grad_out;
  require_shape(grad_out.shape(), mask_.shape(), "Dropout::backward");
  Tensor<T> dx(grad_out.shape());
  Arr<T>(dx.data(), dx.size()) =
      CArr<T>(grad_out.data(), grad_out.size()) * CArr<T>(mask_.data(), mask_.size());
  return dx;
}

// ----------------------------------------------------------------- Dense

template <typename T>
Dense<T>::Dense(std::size_t in_features, std::size_t out_features)
    : in_(in_features),
      out_(out_features),
      weight_({out_features, in_features, 1, 1}),
      bias_({1, out_features, 1, 1}),
      grad_weight_({out_features, in_features, 1, 1}),
      grad_bias_({1, out_features, 1, 1}) {
  if (in_features == 0 || out_features == 0) throw DomainError("Dense: zero features");
}

template <typename T>
void Dense<T>::init(Rng& rng, double gain) {
  fill_gaussian(weight_, rng, std::sqrt(gain / static_cast<double>(in_)));
  bias_.zero();
}

template <typename T>
Shape Dense<T>::output_shape(const Shape& in) const {
  if (in.per_sample() != in_) {
    throw ShapeError("Dense: expected " + std::to_string(in_) + " features per sample, got " +
                     in.str());
  }
  return {in.n, out_, 1, 1};
}

template <typename T>
Tensor<T> Dense<T>::forward(const Tensor<T>& x, Mode /*mode*/) {
  Tensor<T> y(output_shape(x.shape()));
  input_ = x;
  const std::size_t n = x.shape().n;
  MapR<T> ym(y.data(), n, out_);
  ym.noalias() = CMapR<T>(x.data(), n, in_) * CMapR<T>(weight_.data(), out_, in_).transpose();
  ym.rowwise() += CVec<T>(bias_.data(), out_).transpose();
  debug_check_finite(y, "dense");
  return y;
}

template <typename T>
Tensor<T> Dense<T>::backward(const Tensor<T>& grad_out) {
  const std::size_t n = input_.shape().n;
  require_shape(grad_out.shape(), Shape{n, out_, 1, 1}, "Dense::backward");
  CMapR<T> dy(grad_out.data(), n, out_);
  if (trainable_) {
    MapR<T>(grad_weight_.data(), out_, in_).noalias() += dy.transpose() * CMapR<T>(input_.data(), n, in_);
    Vec<T>(grad_bias_.data(), out_) += dy.colwise().sum().transpose();
  }
  Tensor<T> dx(input_.shape());
  MapR<T>(dx.data(), n, in_).noalias() = dy * CMapR<T>(weight_.data(), out_, in_);
  return dx;
}

template <typename T>
void Dense<T>::collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out) {
  out.push_back({prefix + "weight", &weight_, &grad_weight_, trainable_});
  out.push_back({prefix + "bias", &bias_, &grad_bias_, trainable_});
}

// ----------------------------------------------------------------- Scale

template <typename T>
Tensor<T> Scale<T>::forward(const Tensor<T>& x, Mode /*mode*/) {
  Tensor<T> y(x.shape());
  Arr<T>(y.data(), y.size()) = CArr<T>(x.data(), x.size()) * static_cast<T>(factor_);
  return y;
}

template <typename T>
Tensor<T> Scale<T>::backward(const Tensor<T>& grad_out) {
  Tensor<T> dx(grad_out.shape());
  Arr<T>(dx.data(), dx.size()) = CArr<T>(grad_out.data(), grad_out.size()) * static_cast<T>(factor_);
  return dx;
}

// --------------------------------------------------------------- Reshape

template <typename T>
Shape Reshape<T>::output_shape(const Shape& in) const {
  if (in.per_sample() != c_ * h_ * w_) {
    throw ShapeError("Reshape: cannot view " + in.str() + " as (" + std::to_string(c_) + ", " +
                     std::to_string(h_) + ", " + std::to_string(w_) + ")");
  }
  return {in.n, c_, h_, w_};
}

template <typename T>
Tensor<T> Reshape<T>::forward(const Tensor<T>& x, Mode /*mode*/) {
  in_shape_ = x.shape();
  Tensor<T> y = x;
  y.reshape(output_shape(x.shape()));
  return y;
}

template <typename T>
Tensor<T> Reshape<T>::backward(const Tensor<T>& grad_out) {
  Tensor<T> dx = grad_out;
  dx.reshape(in_shape_);
  return dx;
}

// ------------------------------------------------------------ Sequential

template <typename T>
Shape Sequential<T>::output_shape(const Shape& in) const {
  Shape s = in;
  for (const auto& l : layers_) s = l->output_shape(s);
  return s;
}

template <typename T>
Tensor<T> Sequential<T>::forward(const Tensor<T>& x, Mode mode) {
  if (layers_.empty()) return x;
  Tensor<T> h = layers_.front()->forward(x, mode);
  for (std::size_t i = 1; i < layers_.size(); ++i) h = layers_[i]->forward(h, mode);
  return h;
}

template <typename T>
Tensor<T> Sequential<T>::backward(const Tensor<T>& grad_out) {
  if (layers_.empty()) return grad_out;
  Tensor<T> g = layers_.back()->backward(grad_out);
  for (std::size_t i = layers_.size() - 1; i-- > 0;) g = layers_[i]->backward(g);
  return g;
}

template <typename T>
void Sequential<T>::collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->collect_params(prefix + std::to_string(i) + ".", out);
  }
}

template <typename T>
void Sequential<T>::collect_buffers(const std::string& prefix, std::vector<ParamRef<T>>& out) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->collect_buffers(prefix + std::to_string(i) + ".", out);
  }
}

template <typename T>
void Sequential<T>::freeze_randomness(bool frozen) {
  for (auto& l : layers_) l->freeze_randomness(frozen);
}

// -------------------------------------------------------------- Residual

template <typename T>
Tensor<T> residual_add(const Tensor<T>& x, const Tensor<T>& skip) {
  require_shape(skip.shape(), x.shape(), "residual_add");
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + skip[i];
  return y;
}

template <typename T>
ResidualBlock<T>::ResidualBlock(std::size_t in_channels, std::size_t out_channels) {
  if (in_channels != out_channels) {
    projection_ = std::make_unique<Conv2d<T>>(in_channels, out_channels, 1, 1);
  }
}

template <typename T>
Shape ResidualBlock<T>::output_shape(const Shape& in) const {
  const Shape body_out = body_.output_shape(in);
  const Shape skip_out = projection_ ? projection_->output_shape(in) : in;
  if (body_out != skip_out) {
    throw ShapeError("ResidualBlock: body output " + body_out.str() + " does not match shortcut " +
                     skip_out.str());
  }
  return body_out;
}

template <typename T>
Tensor<T> ResidualBlock<T>::forward(const Tensor<T>& x, Mode mode) {
  Tensor<T> body_out = body_.forward(x, mode);
  if (!shortcut_enabled_) return body_out;
  if (projection_) return residual_add(body_out, projection_->forward(x, mode));
  return residual_add(body_out, x);
}

template <typename T>
Tensor<T> ResidualBlock<T>::backward(const Tensor<T>& grad_out) {
  Tensor<T> dx = body_.backward(grad_out);
  if (!shortcut_enabled_) return dx;
  if (projection_) return residual_add(dx, projection_->backward(grad_out));
  return residual_add(dx, grad_out);
}

template <typename T>
void ResidualBlock<T>::collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out) {
  body_.collect_params(prefix + "body.", out);
  if (projection_) projection_->collect_params(prefix + "proj.", out);
}

template <typename T>
void ResidualBlock<T>::collect_buffers(const std::string& prefix,
                                       std::vector<ParamRef<T>>& out) {
  body_.collect_buffers(prefix + "body.", out);
}

#define RDNET_INSTANTIATE(T)                                                    \
  template class Conv2d<T>;                                                     \
  template class BatchNorm2d<T>;                                                \
  template class ReLU<T>;                                                       \
  template class Dropout<T>;                                                    \
  template class Dense<T>;                                                      \
  template class Reshape<T>;                                                    \
  template class Scale<T>;                                                      \
  template class Sequential<T>;                                                 \
  template class ResidualBlock<T>;                                              \
  template Tensor<T> residual_add<T>(const Tensor<T>&, const Tensor<T>&);

RDNET_INSTANTIATE(float)
RDNET_INSTANTIATE(double)

#undef RDNET_INSTANTIATE

}  // namespace rdnet::nn
