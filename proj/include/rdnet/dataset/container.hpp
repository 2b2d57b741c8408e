#pragma once

// RDDS dataset container. All fields little-endian.
//
//   header:  char[4] "RDDS" | u32 version | u32 N | u32 M | u64 record_count
//   record:  f32 I[N*M] | f32 Q[N*M] | f32 GT[N*M]      (row-major, k major)
//            f64 snr_db (+inf for noise-free) | u64 scene_id | f64 phi
//            u32 n_targets | n_targets x { f64 b | f64 f1 | f64 f2 }

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rdnet/dataset/rd_map.hpp"
#include "rdnet/sim/radar.hpp"

namespace rdnet::dataset {

inline constexpr std::uint32_t kContainerVersion = 1;

struct DatasetRecord {
  sim::ChannelEstimate channel;
  RdMap gt;
  double snr_db = sim::kNoiseFree;
  std::uint64_t scene_id = 0;
  sim::TargetScene scene;
};

struct DatasetHeader {
  std::uint32_t version = kContainerVersion;
  std::uint32_t n_rows = 0;
  std::uint32_t n_cols = 0;
  std::uint64_t record_count = 0;
};

/// Streaming writer. The record count in the header is patched by finish(),
/// which the destructor calls if it was not called explicitly.
class DatasetWriter {
 public:
  DatasetWriter(const std::filesystem::path& path, std::size_t n_rows, std::size_t n_cols);
  ~DatasetWriter();
  DatasetWriter(const DatasetWriter&) = delete;
  DatasetWriter& operator=(const DatasetWriter&) = delete;

  void write(const DatasetRecord& record);
  void finish();
  std::uint64_t count() const { return count_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::uint32_t n_rows_;
  std::uint32_t n_cols_;
  std::uint64_t count_ = 0;
  bool finished_ = false;
};

/// Streaming reader; holds one record at a time.
class DatasetReader {
 public:
  explicit DatasetReader(const std::filesystem::path& path);

  const DatasetHeader& header() const { return header_; }
  /// Next record, or nullopt after the last one. Throws FormatError if the
  /// file ends early or carries trailing bytes.
  std::optional<DatasetRecord> next();

 private:
  std::ifstream in_;
  DatasetHeader header_;
  std::uint64_t read_ = 0;
};

void write_dataset(const std::filesystem::path& path, std::span<const DatasetRecord> records);
std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path);
/// Calls fn for every record without materialising the file.
DatasetHeader for_each_record(const std::filesystem::path& path,
                              const std::function<void(const DatasetRecord&)>& fn);

}  // namespace rdnet::dataset
