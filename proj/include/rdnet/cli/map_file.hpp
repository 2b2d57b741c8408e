#pragma once

// RDMP raw map file, little-endian:
//   char[4] "RDMP" | u32 version | u32 rows | u32 cols | f32 values[rows*cols] (row-major)

#include <cstdint>
#include <filesystem>
#include <string>

#include "rdnet/dataset/rd_map.hpp"

namespace rdnet::cli {

inline constexpr std::uint32_t kMapFileVersion = 1;

void write_map_file(const std::filesystem::path& path, const RdMap& map);
RdMap read_map_file(const std::filesystem::path& path);

/// Binary PGM (P5), 8-bit, one pixel per cell, row-major. Cells are scaled
/// by 255 / max and rounded; negative cells and all-nonpositive maps give 0.
std::string render_pgm(const RdMap& map);
void write_pgm(const std::filesystem::path& path, const RdMap& map);

}  // namespace rdnet::cli
