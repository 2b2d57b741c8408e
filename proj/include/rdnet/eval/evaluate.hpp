#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rdnet/baseline/periodogram.hpp"
#include "rdnet/dataset/container.hpp"
#include "rdnet/dataset/labels.hpp"
#include "rdnet/eval/metrics.hpp"
#include "rdnet/model/rdnet.hpp"

namespace rdnet::eval {

/// Produces one range-Doppler map per record.
class Estimator {
 public:
  virtual ~Estimator() = default;
  virtual std::string name() const = 0;
  virtual std::vector<RdMap> estimate(std::span<const dataset::DatasetRecord> records) = 0;
};

/// Returns each record's own ground-truth map.
class GroundTruthEstimator final : public Estimator {
 public:
  std::string name() const override { return "gt"; }
  std::vector<RdMap> estimate(std::span<const dataset::DatasetRecord> records) override;
};

class PeriodogramEstimator final : public Estimator {
 public:
  explicit PeriodogramEstimator(baseline::PeriodogramSpec spec = {}) : spec_(spec) {}
  std::string name() const override { return "periodogram"; }
  std::vector<RdMap> estimate(std::span<const dataset::DatasetRecord> records) override;
  const baseline::PeriodogramSpec& spec() const { return spec_; }

 private:
  baseline::PeriodogramSpec spec_;
};

class CnnEstimator final : public Estimator {
 public:
  explicit CnnEstimator(model::RdNet<float>& net, std::size_t batch_size = 64)
      : net_(net), batch_size_(batch_size) {}
  std::string name() const override { return "cnn"; }
  std::vector<RdMap> estimate(std::span<const dataset::DatasetRecord> records) override;

 private:
  model::RdNet<float>& net_;
  std::size_t batch_size_;
};

struct MetricRow {
  double snr_db = 0.0;
  double rmse_range_index = 0.0;     // bins
  double rmse_velocity_index = 0.0;  // bins
  double psnr_db = 0.0;              // mean over records
  double mean_predict_time = 0.0;    // seconds per record
  std::size_t count = 0;
};

struct EvalOptions {
  /// Peak separation applied to every estimator's output map.
  baseline::PeakGuard guard = baseline::PeakGuard::half_min_separation();
  /// Records handed to the estimator per call.
  std::size_t chunk_size = 64;
};

struct EvalFailure {
  std::size_t record_index = 0;
  std::string message;
};

struct EvalResult {
  std::string estimator;
  std::vector<MetricRow> rows;  // ascending SNR, noise-free last
  double total_predict_seconds = 0.0;
  std::size_t records = 0;
  std::size_t flagged = 0;
  std::vector<EvalFailure> failures;
};

/// Runs the estimator over all records, extracts as many peaks as each
/// scene has targets, and aggregates per SNR level: RMSE over all pooled
/// residuals of the level and mean PSNR. A record whose estimate fails is
/// listed in failures and excluded from the rows.
EvalResult evaluate(Estimator& estimator, std::span<const dataset::DatasetRecord> records,
                    const dataset::GridSpec& grid, const EvalOptions& options = {});

/// Header "snr_db,rmse_range_index,rmse_velocity_index,psnr_db,mean_predict_time_s,count".
/// Without timing the mean_predict_time_s column is dropped, which makes
/// the output reproducible.
std::string render_results_csv(const std::vector<MetricRow>& rows, bool include_timing = true);

}  // namespace rdnet::eval
