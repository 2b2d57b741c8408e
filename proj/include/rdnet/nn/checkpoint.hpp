#pragma once

// RDCK checkpoint. All fields little-endian.
//
//   char[4] "RDCK" | u32 version | u32 meta_len | meta bytes (UTF-8 text)
//   u32 block_count
//   block: u32 name_len | name | u32 kind (0 = parameter, 1 = buffer)
//          | u32 n | u32 c | u32 h | u32 w | f32 data[n*c*h*w]

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rdnet/nn/layers.hpp"

namespace rdnet::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class BlockKind : std::uint32_t { parameter = 0, buffer = 1 };

struct CheckpointBlock {
  std::string name;
  BlockKind kind = BlockKind::parameter;
  Shape shape;
  std::vector<float> data;
};

struct Checkpoint {
  std::string meta;  // free-form text, e.g. the model configuration
  std::vector<CheckpointBlock> blocks;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Snapshot of a layer's parameters and buffers, in collection order.
template <typename T>
Checkpoint capture(Layer<T>& layer, std::string meta);

/// Copies blocks back into the layer. Names, order and shapes must match.
template <typename T>
void restore(Layer<T>& layer, const Checkpoint& ckpt);

}  // namespace rdnet::nn
