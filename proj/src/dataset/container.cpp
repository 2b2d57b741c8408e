#include "rdnet/dataset/container.hpp"

#include <string>

#include "rdnet/common/binary_io.hpp"
#include "rdnet/common/errors.hpp"

namespace rdnet::dataset {

namespace {

constexpr char kMagic[5] = "RDDS";
constexpr std::uint32_t kMaxTargets = 1u << 16;

void write_plane(std::ostream& os, const Plane& p) {
  for (Eigen::Index k = 0; k < p.rows(); ++k) {
    for (Eigen::Index l = 0; l < p.cols(); ++l) {
      io::write_le(os, static_cast<float>(p(k, l)));
    }
  }
}

Plane read_plane(std::istream& is, std::uint32_t rows, std::uint32_t cols, const char* what) {
  Plane p(rows, cols);
  for (Eigen::Index k = 0; k < p.rows(); ++k) {
    for (Eigen::Index l = 0; l < p.cols(); ++l) {
      p(k, l) = static_cast<double>(io::read_le<float>(is, what));
    }
  }
  return p;
}

void check_dims(const Plane& p, std::uint32_t rows, std::uint32_t cols, const char* what) {
  if (p.rows() != static_cast<Eigen::Index>(rows) || p.cols() != static_cast<Eigen::Index>(cols)) {
    throw ShapeError(std::string("dataset record: ") + what + " is " + std::to_string(p.rows()) +
                     "x" + std::to_string(p.cols()) + ", container expects " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

DatasetWriter::DatasetWriter(const std::filesystem::path& path, std::size_t n_rows,
                             std::size_t n_cols)
    : path_(path),
      out_(path, std::ios::binary | std::ios::trunc),
      n_rows_(static_cast<std::uint32_t>(n_rows)),
      n_cols_(static_cast<std::uint32_t>(n_cols)) {
  if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  io::write_magic(out_, kMagic);
  io::write_le(out_, kContainerVersion);
  io::write_le(out_, n_rows_);
  io::write_le(out_, n_cols_);
  io::write_le(out_, std::uint64_t{0});
}

DatasetWriter::~DatasetWriter() {
  try {
    finish();
  } catch (...) {
  }
}

void DatasetWriter::write(const DatasetRecord& r) {
  if (finished_) throw IoError("DatasetWriter: write after finish");
  check_dims(r.channel.i_plane, n_rows_, n_cols_, "I plane");
  check_dims(r.channel.q_plane, n_rows_, n_cols_, "Q plane");
  check_dims(r.gt.values, n_rows_, n_cols_, "GT map");
  write_plane(out_, r.channel.i_plane);
  write_plane(out_, r.channel.q_plane);
  write_plane(out_, r.gt.values);
  io::write_le(out_, r.snr_db);
  io::write_le(out_, r.scene_id);
  io::write_le(out_, r.scene.phi);
  io::write_le(out_, static_cast<std::uint32_t>(r.scene.targets.size()));
  for (const sim::Target& t : r.scene.targets) {
    io::write_le(out_, t.b);
    io::write_le(out_, t.f1);
    io::write_le(out_, t.f2);
  }
  if (!out_) throw IoError("write failed on " + path_.string());
  ++count_;
}

void DatasetWriter::finish() {
  if (finished_) return;
  finished_ = true;
  out_.seekp(4 + 3 * sizeof(std::uint32_t));
  io::write_le(out_, count_);
  out_.close();
  if (!out_) throw IoError("failed to finalise " + path_.string());
}

DatasetReader::DatasetReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open " + path.string());
  io::expect_magic(in_, kMagic);
  header_.version = io::read_le<std::uint32_t>(in_, "version");
  if (header_.version != kContainerVersion) {
    throw FormatError("unsupported RDDS version " + std::to_string(header_.version));
  }
  header_.n_rows = io::read_le<std::uint32_t>(in_, "N");
  header_.n_cols = io::read_le<std::uint32_t>(in_, "M");
  header_.record_count = io::read_le<std::uint64_t>(in_, "record count");
  if (header_.n_rows == 0 || header_.n_cols == 0) {
    throw FormatError("RDDS header has zero map dimension");
  }
}

std::optional<DatasetRecord> DatasetReader::next() {
  if (read_ == header_.record_count) {
    if (in_.peek() != std::char_traits<char>::eof()) {
      throw FormatError("RDDS file has trailing bytes after " + std::to_string(read_) +
                        " records");
    }
    return std::nullopt;
  }
  DatasetRecord r;
  r.channel.i_plane = read_plane(in_, header_.n_rows, header_.n_cols, "I plane");
  r.channel.q_plane = read_plane(in_, header_.n_rows, header_.n_cols, "Q plane");
  r.gt.values = read_plane(in_, header_.n_rows, header_.n_cols, "GT map");
  r.snr_db = io::read_le<double>(in_, "snr_db");
  r.channel.snr_db = r.snr_db;
  r.scene_id = io::read_le<std::uint64_t>(in_, "scene_id");
  r.scene.phi = io::read_le<double>(in_, "phi");
  const auto n_targets = io::read_le<std::uint32_t>(in_, "target count");
  if (n_targets > kMaxTargets) {
    throw FormatError("implausible target count " + std::to_string(n_targets));
  }
  r.scene.targets.resize(n_targets);
  for (sim::Target& t : r.scene.targets) {
    t.b = io::read_le<double>(in_, "target b");
    t.f1 = io::read_le<double>(in_, "target f1");
    t.f2 = io::read_le<double>(in_, "target f2");
  }
  ++read_;
  return r;
}

void write_dataset(const std::filesystem::path& path, std::span<const DatasetRecord> records) {
  std::size_t rows = 0;
  std::size_t cols = 0;
  if (!records.empty()) {
    rows = records.front().gt.rows();
    cols = records.front().gt.cols();
  }
  if (rows == 0 || cols == 0) throw ShapeError("write_dataset: cannot infer map dimensions");
  DatasetWriter writer(path, rows, cols);
  for (const auto& r : records) writer.write(r);
  writer.finish();
}

std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path) {
  DatasetReader reader(path);
  std::vector<DatasetRecord> out;
  out.reserve(reader.header().record_count);
  while (auto r = reader.next()) out.push_back(std::move(*r));
  return out;
}

DatasetHeader for_each_record(const std::filesystem::path& path,
                              const std::function<void(const DatasetRecord&)>& fn) {
  DatasetReader reader(path);
  while (auto r = reader.next()) fn(*r);
  return reader.header();
}

}  // namespace rdnet::dataset
