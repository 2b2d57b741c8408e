#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rdnet/dataset/container.hpp"
#include "rdnet/dataset/labels.hpp"
#include "rdnet/sim/radar.hpp"

namespace rdnet::dataset {

/// `count` SNR values evenly spaced over [lo, hi] (inclusive).
std::vector<double> even_snr_levels(double lo_db, double hi_db, std::size_t count);

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;

  void validate() const;
};

struct DatasetParams {
  sim::RadarConfig radar;
  GridSpec grid = GridSpec::for_radar(sim::RadarConfig{});
  SamplingRule sampling = SamplingRule::for_radar(sim::RadarConfig{});
  LabelParams label;
  std::size_t clean_count = 3000;
  std::size_t n_targets = 5;
  std::vector<double> snr_levels = even_snr_levels(-15.0, 30.0, 10);
  SplitFractions split;
  std::uint64_t seed = 1;
  /// Build noisy records through the QAM spectral-division path instead of
  /// adding noise to the directly synthesised channel.
  bool qam_path = false;
  std::size_t qam_order = 4;

  void validate() const;
};

enum class Split { train, val, test };
const char* split_name(Split s);

/// Scene ids of each split. Scenes, not records, are partitioned so that
/// all noisy copies of a scene land in the same split.
struct SplitAssignment {
  std::vector<std::uint64_t> train;
  std::vector<std::uint64_t> val;
  std::vector<std::uint64_t> test;

  const std::vector<std::uint64_t>& of(Split s) const;
};

SplitAssignment assign_splits(std::size_t clean_count, const SplitFractions& f,
                              std::uint64_t seed);

/// The clean scene and its noisy records, one per SNR level. Pure function
/// of (params, scene_id).
std::vector<DatasetRecord> make_scene_records(const DatasetParams& params,
                                              std::uint64_t scene_id);

struct GenerationSummary {
  std::map<Split, std::uint64_t> records_per_split;
  std::map<double, std::uint64_t> records_per_snr;
  std::uint64_t total_records = 0;
};

/// Writes train.rdds, val.rdds, test.rdds and manifest.txt into out_dir.
GenerationSummary generate_dataset(const DatasetParams& params,
                                   const std::filesystem::path& out_dir);

/// Text manifest: config echo, seed, grid, SNR levels and per-SNR counts.
std::string render_manifest(const DatasetParams& params, const GenerationSummary& summary);

std::string format_snr(double snr_db);

}  // namespace rdnet::dataset
