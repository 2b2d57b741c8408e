#include "rdnet/cli/map_file.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "rdnet/common/binary_io.hpp"
#include "rdnet/common/errors.hpp"

namespace rdnet::cli {

void write_map_file(const std::filesystem::path& path, const RdMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create map file " + path.string());
  io::write_magic(out, "RDMP");
  io::write_le<std::uint32_t>(out, kMapFileVersion);
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(map.rows()));
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(map.cols()));
  for (Eigen::Index i = 0; i < map.values.size(); ++i) {
    io::write_le<float>(out, static_cast<float>(map.values.data()[i]));
  }
  out.flush();
  if (!out) throw IoError("failed writing map file " + path.string());
}

RdMap read_map_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open map file " + path.string());
  io::expect_magic(in, "RDMP");
  const auto version = io::read_le<std::uint32_t>(in, "version");
  if (version != kMapFileVersion) {
    throw FormatError("unsupported map file version " + std::to_string(version));
  }
  const auto rows = io::read_le<std::uint32_t>(in, "rows");
  const auto cols = io::read_le<std::uint32_t>(in, "cols");
  if (rows == 0 || cols == 0 || rows > 65536 || cols > 65536) {
    throw FormatError("implausible map dimensions");
  }
  RdMap map{Plane(rows, cols)};
  for (Eigen::Index i = 0; i < map.values.size(); ++i) {
    map.values.data()[i] = static_cast<double>(io::read_le<float>(in, "map values"));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes after map data in " + path.string());
  }
  return map;
}

std::string render_pgm(const RdMap& map) {
  std::string out = "P5\n" + std::to_string(map.cols()) + " " + std::to_string(map.rows()) + "\n255\n";
  const double peak = map.values.size() ? map.values.maxCoeff() : 0.0;
  for (std::size_t r = 0; r < map.rows(); ++r) {
    for (std::size_t c = 0; c < map.cols(); ++c) {
      const double v = map.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      long px = 0;
      if (peak > 0.0 && v > 0.0) px = std::lround(255.0 * v / peak);
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::clamp(px, 0L, 255L))));
    }
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const RdMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create image " + path.string());
  const std::string data = render_pgm(map);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out) throw IoError("failed writing image " + path.string());
}

}  // namespace rdnet::cli
