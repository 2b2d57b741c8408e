#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "rdnet/dataset/generate.hpp"
#include "rdnet/model/rdnet.hpp"
#include "rdnet/model/train.hpp"

namespace rdnet::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Everything a subcommand needs. Built from defaults, then a config file,
/// then command-line overrides, then the RDNET_SEED environment variable.
///
/// Config keys (flat key=value, sections prefix keys with "<section>."):
///   seed, verbosity
///   paths.dataset, paths.checkpoint, paths.out
///   radar.{n_subcarriers, n_symbols, delta_f, f_c, n_cp}
///   data.{clean_count, n_targets, snr_min, snr_max, snr_count, snr_levels,
///         split_train, split_val, split_test, amp_offset, random_phase,
///         noise_path (awgn|qam), qam_order}
///   model.<key> as in ModelConfig::to_text(), train.<key> as in TrainConfig.
/// `seed` sets the dataset, model and training seeds together.
struct RunConfig {
  std::filesystem::path dataset_dir = "data";
  std::filesystem::path checkpoint = "model.rdck";
  std::filesystem::path out_dir = "out";

  dataset::DatasetParams data;
  model::ModelConfig model;
  model::TrainConfig train;
  std::uint64_t seed = 1;
  int verbosity = 1;

  /// Applies one (section-prefixed) key. Throws DomainError on unknown keys
  /// or malformed values.
  void apply(const std::string& key, const std::string& value);
  void apply_text(const std::string& text);
  void set_seed(std::uint64_t s);
  /// Re-derives grid, sampling rule and model map size from the radar block
  /// and validates everything.
  void finalize();

  /// Canonical key=value echo of the configuration.
  std::string render() const;
};

/// Reads a config file (empty path: defaults only), applies `overrides`
/// ("key=value" each), then RDNET_SEED when set, then finalizes.
RunConfig load_run_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides = {});

std::optional<std::uint64_t> seed_from_env();

}  // namespace rdnet::cli
