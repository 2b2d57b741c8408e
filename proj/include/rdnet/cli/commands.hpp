#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rdnet/cli/run_config.hpp"
#include "rdnet/dataset/generate.hpp"

namespace rdnet::cli {

// Each command writes its artifacts (files are written to a temporary name
// and renamed into place) and returns 0, or throws. Invalid arguments throw
// std::invalid_argument subclasses; I/O and format problems throw
// std::runtime_error subclasses.

/// Dataset splits, manifest.txt, and a per-SNR histogram on `out`.
int cmd_gen(const RunConfig& cfg, std::ostream& out);

/// Checkpoint at cfg.checkpoint; loss.csv, train_timing.txt and
/// manifest_train.txt under cfg.out_dir.
int cmd_train(const RunConfig& cfg, std::ostream& out);

struct EvalRequest {
  std::vector<std::string> estimators = {"cnn", "periodogram"};  // cnn | periodogram | gt
  dataset::Split split = dataset::Split::test;
};
/// metrics_<estimator>.csv, timing_<estimator>.txt and manifest_eval.txt
/// under cfg.out_dir.
int cmd_eval(const RunConfig& cfg, const EvalRequest& req, std::ostream& out);

struct PredictRequest {
  dataset::Split split = dataset::Split::test;
  std::size_t index = 0;
  std::string estimator = "cnn";
  std::filesystem::path output;  // default: <out_dir>/<split>_<index>_<estimator>.rdmp
  bool raw = false;              // cnn only: skip clamping negatives
};
int cmd_predict(const RunConfig& cfg, const PredictRequest& req, std::ostream& out);

int cmd_render(const std::filesystem::path& map_file, const std::filesystem::path& image,
               std::ostream& out);

/// Trains per cfg, then times prediction over the test split for the CNN
/// and the periodogram. Writes bench.txt, bench.rdck and manifest_bench.txt
/// under cfg.out_dir.
int cmd_bench(const RunConfig& cfg, std::ostream& out);

struct BenchRow {
  std::string model;
  double training_seconds = -1.0;  // < 0: not applicable
  double seconds_per_epoch = -1.0;
  double prediction_seconds = 0.0;
  std::size_t records = 0;
};
/// "Model | Training time (s) | Time/epoch (s) | Prediction time (s)" table.
std::string render_bench_table(const std::vector<BenchRow>& rows);

dataset::Split parse_split(const std::string& name);
std::filesystem::path split_path(const RunConfig& cfg, dataset::Split split);

/// Writes via a sibling temporary file and renames it into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace rdnet::cli
