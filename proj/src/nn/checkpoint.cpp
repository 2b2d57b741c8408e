#include "rdnet/nn/checkpoint.hpp"

#include <fstream>

#include "rdnet/common/binary_io.hpp"

namespace rdnet::nn {

namespace {

constexpr char kMagic[5] = "RDCK";
constexpr std::uint32_t kMaxString = 1u << 24;

std::string read_string(std::istream& is, const char* what) {
  const auto len = io::read_le<std::uint32_t>(is, what);
  if (len > kMaxString) throw FormatError(std::string("implausible length for ") + what);
  std::string s(len, '\0');
  is.read(s.data(), len);
  if (is.gcount() != static_cast<std::streamsize>(len)) {
    throw FormatError(std::string("truncated input while reading ") + what);
  }
  return s;
}

void write_string(std::ostream& os, const std::string& s) {
  io::write_le(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  io::write_magic(os, kMagic);
  io::write_le(os, kCheckpointVersion);
  write_string(os, ckpt.meta);
  io::write_le(os, static_cast<std::uint32_t>(ckpt.blocks.size()));
  for (const auto& b : ckpt.blocks) {
    if (b.data.size() != b.shape.size()) {
      throw ShapeError("checkpoint block " + b.name + " has inconsistent size");
    }
    write_string(os, b.name);
    io::write_le(os, static_cast<std::uint32_t>(b.kind));
    for (std::size_t d : {b.shape.n, b.shape.c, b.shape.h, b.shape.w}) {
      io::write_le(os, static_cast<std::uint32_t>(d));
    }
    for (float v : b.data) io::write_le(os, v);
  }
  if (!os) throw IoError("write failed on " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  io::expect_magic(is, kMagic);
  const auto version = io::read_le<std::uint32_t>(is, "version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported RDCK version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.meta = read_string(is, "meta");
  const auto count = io::read_le<std::uint32_t>(is, "block count");
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointBlock b;
    b.name = read_string(is, "block name");
    const auto kind = io::read_le<std::uint32_t>(is, "block kind");
    if (kind > 1) throw FormatError("unknown block kind " + std::to_string(kind));
    b.kind = static_cast<BlockKind>(kind);
    b.shape.n = io::read_le<std::uint32_t>(is, "dim");
    b.shape.c = io::read_le<std::uint32_t>(is, "dim");
    b.shape.h = io::read_le<std::uint32_t>(is, "dim");
    b.shape.w = io::read_le<std::uint32_t>(is, "dim");
    if (b.shape.size() > (std::size_t{1} << 31)) throw FormatError("implausible block size");
    b.data.resize(b.shape.size());
    for (float& v : b.data) v = io::read_le<float>(is, "block data");
    ckpt.blocks.push_back(std::move(b));
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes in checkpoint " + path.string());
  }
  return ckpt;
}

template <typename T>
Checkpoint capture(Layer<T>& layer, std::string meta) {
  Checkpoint ckpt;
  ckpt.meta = std::move(meta);
  auto add = [&](const std::vector<ParamRef<T>>& refs, BlockKind kind) {
    for (const auto& p : refs) {
      CheckpointBlock b{p.name, kind, p.value->shape(), std::vector<float>(p.value->size())};
      for (std::size_t i = 0; i < b.data.size(); ++i) b.data[i] = static_cast<float>((*p.value)[i]);
      ckpt.blocks.push_back(std::move(b));
    }
  };
  add(layer.params(), BlockKind::parameter);
  add(layer.buffers(), BlockKind::buffer);
  return ckpt;
}

template <typename T>
void restore(Layer<T>& layer, const Checkpoint& ckpt) {
  auto refs = layer.params();
  auto bufs = layer.buffers();
  refs.insert(refs.end(), bufs.begin(), bufs.end());
  if (refs.size() != ckpt.blocks.size()) {
    throw FormatError("checkpoint has " + std::to_string(ckpt.blocks.size()) +
                      " blocks, model expects " + std::to_string(refs.size()));
  }
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& b = ckpt.blocks[i];
    if (b.name != refs[i].name) {
      throw FormatError("checkpoint block " + std::to_string(i) + " is '" + b.name +
                        "', model expects '" + refs[i].name + "'");
    }
    if (b.shape != refs[i].value->shape()) {
      throw FormatError("checkpoint block " + b.name + " has shape " + b.shape.str() +
                        ", model expects " + refs[i].value->shape().str());
    }
    for (std::size_t j = 0; j < b.data.size(); ++j) (*refs[i].value)[j] = static_cast<T>(b.data[j]);
  }
}

template Checkpoint capture(Layer<float>&, std::string);
template Checkpoint capture(Layer<double>&, std::string);
template void restore(Layer<float>&, const Checkpoint&);
template void restore(Layer<double>&, const Checkpoint&);

}  // namespace rdnet::nn
