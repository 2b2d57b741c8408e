#include "rdnet/model/rdnet.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "rdnet/common/errors.hpp"
#include "rdnet/common/rng.hpp"
#include "rdnet/common/key_value.hpp"

namespace rdnet::model {

namespace {

std::string stem_name(StemKind k) { return k == StemKind::matched_filter ? "matched_filter" : "conv"; }
std::string head_name(HeadKind k) { return k == HeadKind::dense ? "dense" : "conv1x1"; }

StemKind parse_stem(const std::string& s) {
  if (s == "matched_filter") return StemKind::matched_filter;
  if (s == "conv") return StemKind::conv;
  throw DomainError("unknown stem kind '" + s + "'");
}

HeadKind parse_head(const std::string& s) {
  if (s == "dense") return HeadKind::dense;
  if (s == "conv1x1") return HeadKind::conv1x1;
  throw DomainError("unknown head kind '" + s + "'");
}

std::string blocks_text(const std::vector<BlockSpec>& blocks) {
  std::string out;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(blocks[i].repeats) + 'x' + std::to_string(blocks[i].kernel) + 'x' +
           std::to_string(blocks[i].width);
  }
  return out;
}

std::vector<BlockSpec> parse_blocks(const std::string& text) {
  std::vector<BlockSpec> out;
  std::istringstream list(text);
  std::string item;
  while (std::getline(list, item, ',')) {
    BlockSpec b;
    char x1 = 0, x2 = 0;
    std::istringstream is(item);
    if (!(is >> b.repeats >> x1 >> b.kernel >> x2 >> b.width) || x1 != 'x' || x2 != 'x') {
      throw DomainError("malformed block spec '" + item + "', expected UxVxWIDTH");
    }
    out.push_back(b);
  }
  return out;
}

std::uint64_t layer_seed(std::uint64_t seed, std::uint64_t slot) {
  return Rng::substream(seed, 0x6d6f64656cull, slot).next_u64();
}

}  // namespace

void ModelConfig::validate() const {
  if (n_rows == 0 || n_cols == 0) throw DomainError("model: map dimensions must be positive");
  if (in_channels != 2) throw DomainError("model: input must have 2 channels (I, Q)");
  if (blocks.size() != 3) {
    throw DomainError("model: exactly 3 residual blocks are required, got " +
                      std::to_string(blocks.size()));
  }
  for (const auto& b : blocks) {
    if (b.repeats == 0) throw DomainError("model: residual block needs at least one conv layer");
    if (b.kernel == 0 || b.kernel % 2 == 0) throw DomainError("model: kernel size must be odd");
    if (b.width == 0) throw DomainError("model: block width must be positive");
  }
  if (stem_layers == 0 || stem_width == 0) throw DomainError("model: stem must have a conv layer");
  if (stem_kernel == 0 || stem_kernel % 2 == 0) throw DomainError("model: stem kernel must be odd");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw DomainError("model: dropout must be in [0, 1)");
  if (!(head_init_gain >= 0.0) || !std::isfinite(head_init_gain)) {
    throw DomainError("model: head init gain must be non-negative");
  }
  if (!(output_scale > 0.0) || !std::isfinite(output_scale)) {
    throw DomainError("model: output scale must be positive");
  }
}

std::string ModelConfig::to_text() const {
  std::ostringstream os;
  os << "n_rows=" << n_rows << '\n'
     << "n_cols=" << n_cols << '\n'
     << "in_channels=" << in_channels << '\n'
     << "stem=" << stem_name(stem) << '\n'
     << "stem_trainable=" << (stem_trainable ? "true" : "false") << '\n'
     << "stem_layers=" << stem_layers << '\n'
     << "stem_width=" << stem_width << '\n'
     << "stem_kernel=" << stem_kernel << '\n'
     << "blocks=" << blocks_text(blocks) << '\n'
     << "head=" << head_name(head) << '\n'
     << "head_init_gain=" << format_double(head_init_gain) << '\n'
     << "output_scale=" << format_double(output_scale) << '\n'
     << "dropout=" << format_double(dropout) << '\n'
     << "seed=" << seed << '\n';
  return os.str();
}

ModelConfig ModelConfig::from_text(const std::string& text) {
  ModelConfig cfg;
  for (const auto& [key, value] : parse_key_values(text)) {
    apply_model_key(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

bool apply_model_key(ModelConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "n_rows") cfg.n_rows = parse_size(key, value);
  else if (key == "n_cols") cfg.n_cols = parse_size(key, value);
  else if (key == "in_channels") cfg.in_channels = parse_size(key, value);
  else if (key == "stem") cfg.stem = parse_stem(value);
  else if (key == "stem_trainable") cfg.stem_trainable = parse_bool(key, value);
  else if (key == "stem_layers") cfg.stem_layers = parse_size(key, value);
  else if (key == "stem_width") cfg.stem_width = parse_size(key, value);
  else if (key == "stem_kernel") cfg.stem_kernel = parse_size(key, value);
  else if (key == "blocks") cfg.blocks = parse_blocks(value);
  else if (key == "head") cfg.head = parse_head(value);
  else if (key == "head_init_gain") cfg.head_init_gain = parse_double(key, value);
  else if (key == "output_scale") cfg.output_scale = parse_double(key, value);
  else if (key == "dropout") cfg.dropout = parse_double(key, value);
  else if (key == "seed") cfg.seed = parse_u64(key, value);
  else return false;
  return true;
}

template <typename T>
void init_matched_filter(nn::Dense<T>& dense, std::size_t n_rows, std::size_t n_cols) {
  const std::size_t nm = n_rows * n_cols;
  auto& w = dense.weight();
  if (w.shape() != nn::Shape{2 * nm, 2 * nm, 1, 1}) {
    throw ShapeError("matched filter: projection must be square over 2*N*M features");
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(nm));
  const auto shift_k = static_cast<long>(n_rows / 2);
  const auto shift_l = static_cast<long>(n_cols / 2);
  T* wd = w.data();
  for (std::size_t u = 0; u < n_rows; ++u) {
    const long uu = static_cast<long>(u) - shift_k;
    for (std::size_t v = 0; v < n_cols; ++v) {
      const long vv = static_cast<long>(v) - shift_l;
      T* re = wd + (u * n_cols + v) * 2 * nm;
      T* im = wd + (nm + u * n_cols + v) * 2 * nm;
      for (std::size_t k = 0; k < n_rows; ++k) {
        // Reduce the phase index exactly before converting to an angle.
        const long pk = (uu * static_cast<long>(k)) % static_cast<long>(n_rows);
        for (std::size_t l = 0; l < n_cols; ++l) {
          const long pl = (vv * static_cast<long>(l)) % static_cast<long>(n_cols);
          const double theta = 2.0 * std::numbers::pi *
                               (static_cast<double>(pk) / static_cast<double>(n_rows) -
                                static_cast<double>(pl) / static_cast<double>(n_cols));
          const double c = std::cos(theta) * scale;
          const double s = std::sin(theta) * scale;
          const std::size_t i = k * n_cols + l;
          re[i] = static_cast<T>(c);
          re[nm + i] = static_cast<T>(-s);
          im[i] = static_cast<T>(s);
          im[nm + i] = static_cast<T>(c);
        }
      }
    }
  }
  dense.bias().zero();
}

template <typename T>
RdNet<T>::RdNet(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const std::size_t n = cfg_.n_rows, m = cfg_.n_cols, nm = n * m;
  std::uint64_t slot = 0;
  auto conv_init = [&](nn::Conv2d<T>& conv, double gain) {
    Rng rng(layer_seed(cfg_.seed, slot++));
    conv.init(rng, gain);
  };

  if (cfg_.stem == StemKind::matched_filter) {
    auto& proj = net_.template add<nn::Dense<T>>(2 * nm, 2 * nm);
    init_matched_filter(proj, n, m);
    proj.set_trainable(cfg_.stem_trainable);
    net_.template add<nn::Reshape<T>>(2, n, m);
  }
  std::size_t width = cfg_.in_channels;
  for (std::size_t i = 0; i < cfg_.stem_layers; ++i) {
    auto& conv = net_.template add<nn::Conv2d<T>>(width, cfg_.stem_width, cfg_.stem_kernel,
                                                  cfg_.stem_kernel);
    conv_init(conv, 2.0);
    net_.template add<nn::BatchNorm2d<T>>(cfg_.stem_width);
    net_.template add<nn::ReLU<T>>();
    width = cfg_.stem_width;
  }

  for (const auto& spec : cfg_.blocks) {
    auto& block = net_.template add<nn::ResidualBlock<T>>(width, spec.width);
    std::size_t c = width;
    for (std::size_t r = 0; r < spec.repeats; ++r) {
      auto& conv = block.body().template add<nn::Conv2d<T>>(c, spec.width, spec.kernel, spec.kernel);
      conv_init(conv, 2.0);
      block.body().template add<nn::BatchNorm2d<T>>(spec.width);
      block.body().template add<nn::ReLU<T>>();
      c = spec.width;
    }
    if (block.projection()) conv_init(*block.projection(), 1.0);
    blocks_.push_back(&block);
    width = spec.width;
  }

  net_.template add<nn::Dropout<T>>(cfg_.dropout, layer_seed(cfg_.seed, 1000));

  if (cfg_.head == HeadKind::dense) {
    auto& head = net_.template add<nn::Dense<T>>(width * nm, nm);
    Rng rng(layer_seed(cfg_.seed, slot++));
    head.init(rng, cfg_.head_init_gain);
    net_.template add<nn::Reshape<T>>(1, n, m);
  } else {
    auto& head = net_.template add<nn::Conv2d<T>>(width, 1, 1, 1);
    conv_init(head, cfg_.head_init_gain);
  }
  if (cfg_.output_scale != 1.0) net_.template add<nn::Scale<T>>(cfg_.output_scale);
}

template <typename T>
void RdNet<T>::set_shortcuts_enabled(bool on) {
  for (auto* b : blocks_) b->set_shortcut_enabled(on);
}

template <typename T>
std::size_t RdNet<T>::parameter_count() {
  std::size_t total = 0;
  for (const auto& p : this->params()) total += p.value->size();
  return total;
}

template <typename T>
nn::Checkpoint RdNet<T>::to_checkpoint() {
  return nn::capture(*this, cfg_.to_text());
}

template <typename T>
RdNet<T> RdNet<T>::from_checkpoint(const nn::Checkpoint& ckpt) {
  RdNet<T> model(ModelConfig::from_text(ckpt.meta));
  nn::restore(model, ckpt);
  return model;
}

template <typename T>
void load_input(const sim::ChannelEstimate& h, nn::Tensor<T>& x, std::size_t index) {
  const auto& s = x.shape();
  if (s.c != 2 || s.h != h.rows() || s.w != h.cols() || index >= s.n) {
    throw ShapeError("load_input: channel " + std::to_string(h.rows()) + "x" +
                         std::to_string(h.cols()) + " does not fit tensor " + s.str());
  }
  T* dst = x.sample(index);
  const std::size_t plane = s.plane();
  const double* i_src = h.i_plane.data();
  const double* q_src = h.q_plane.data();
  for (std::size_t i = 0; i < plane; ++i) {
    dst[i] = static_cast<T>(i_src[i]);
    dst[plane + i] = static_cast<T>(q_src[i]);
  }
}

template <typename T>
void load_target(const RdMap& map, nn::Tensor<T>& y, std::size_t index) {
  const auto& s = y.shape();
  if (s.c != 1 || s.h != map.rows() || s.w != map.cols() || index >= s.n) {
    throw ShapeError("load_target: map does not fit tensor " + s.str());
  }
  T* dst = y.sample(index);
  const double* src = map.values.data();
  for (std::size_t i = 0; i < s.plane(); ++i) dst[i] = static_cast<T>(src[i]);
}

template <typename T>
std::vector<RdMap> predict_raw(RdNet<T>& model, std::span<const sim::ChannelEstimate> inputs,
                               std::size_t batch_size) {
  if (batch_size == 0) throw DomainError("predict: batch size must be positive");
  const std::size_t n = model.config().n_rows, m = model.config().n_cols;
  std::vector<RdMap> out;
  out.reserve(inputs.size());
  for (std::size_t start = 0; start < inputs.size(); start += batch_size) {
    const std::size_t count = std::min(batch_size, inputs.size() - start);
    nn::Tensor<T> x({count, 2, n, m});
    for (std::size_t i = 0; i < count; ++i) load_input(inputs[start + i], x, i);
    const nn::Tensor<T> y = model.forward(x, nn::Mode::eval);
    for (std::size_t i = 0; i < count; ++i) {
      RdMap map{Plane(n, m)};
      const T* src = y.sample(i);
      for (std::size_t j = 0; j < n * m; ++j) map.values.data()[j] = static_cast<double>(src[j]);
      out.push_back(std::move(map));
    }
  }
  return out;
}

template <typename T>
std::vector<RdMap> predict(RdNet<T>& model, std::span<const sim::ChannelEstimate> inputs,
                           std::size_t batch_size) {
  auto maps = predict_raw(model, inputs, batch_size);
  for (auto& map : maps) map.values = map.values.cwiseMax(0.0);
  return maps;
}

template <typename T>
RdMap predict(RdNet<T>& model, const sim::ChannelEstimate& h) {
  return std::move(predict(model, std::span<const sim::ChannelEstimate>(&h, 1), 1).front());
}

#define RDNET_INSTANTIATE(T)                                                                     \
  template class RdNet<T>;                                                                       \
  template void init_matched_filter<T>(nn::Dense<T>&, std::size_t, std::size_t);                \
  template void load_input<T>(const sim::ChannelEstimate&, nn::Tensor<T>&, std::size_t);        \
  template void load_target<T>(const RdMap&, nn::Tensor<T>&, std::size_t);                      \
  template std::vector<RdMap> predict_raw<T>(RdNet<T>&, std::span<const sim::ChannelEstimate>,  \
                                             std::size_t);                                       \
  template std::vector<RdMap> predict<T>(RdNet<T>&, std::span<const sim::ChannelEstimate>,      \
                                         std::size_t);                                           \
  template RdMap predict<T>(RdNet<T>&, const sim::ChannelEstimate&);

RDNET_INSTANTIATE(float)
RDNET_INSTANTIATE(double)

}  // namespace rdnet::model
