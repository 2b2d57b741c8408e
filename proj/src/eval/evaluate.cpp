#include "rdnet/eval/evaluate.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "rdnet/common/errors.hpp"
#include "rdnet/common/key_value.hpp"

namespace rdnet::eval {

namespace {

using Clock = std::chrono::steady_clock;

struct Bin {
  double sum_sq_k = 0.0;
  double sum_sq_l = 0.0;
  std::size_t pairs = 0;
  double psnr_sum = 0.0;
  std::size_t count = 0;
};

std::string format_snr(double snr) {
  if (std::isinf(snr)) return snr > 0 ? "inf" : "-inf";
  return format_double(snr);
}

}  // namespace

std::vector<RdMap> GroundTruthEstimator::estimate(std::span<const dataset::DatasetRecord> records) {
  std::vector<RdMap> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.gt);
  return out;
}

std::vector<RdMap> PeriodogramEstimator::estimate(std::span<const dataset::DatasetRecord> records) {
  std::vector<RdMap> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(baseline::periodogram_2d(r.channel, spec_));
  return out;
}

std::vector<RdMap> CnnEstimator::estimate(std::span<const dataset::DatasetRecord> records) {
  std::vector<sim::ChannelEstimate> inputs;
  inputs.reserve(records.size());
  for (const auto& r : records) inputs.push_back(r.channel);
  return model::predict(net_, std::span<const sim::ChannelEstimate>(inputs), batch_size_);
}

EvalResult evaluate(Estimator& estimator, std::span<const dataset::DatasetRecord> records,
                    const dataset::GridSpec& grid, const EvalOptions& options) {
  if (options.chunk_size == 0) throw DomainError("evaluate: chunk size must be positive");
  EvalResult result;
  result.estimator = estimator.name();
  result.records = records.size();
  std::map<double, Bin> bins;

  auto score = [&](const dataset::DatasetRecord& rec, const RdMap& map) {
    const std::size_t n_t = rec.scene.targets.size();
    baseline::PeakList gt_peaks;
    for (const auto& c : dataset::target_cells(rec.scene, grid)) gt_peaks.push_back({c.k, c.l, 0.0});
    const auto pred_peaks = baseline::extract_peaks(map, n_t, options.guard);
    const MatchResult m = match_and_rmse(pred_peaks, gt_peaks, map.rows(), map.cols());
    Bin& bin = bins[rec.snr_db];
    bin.sum_sq_k += m.sum_sq_k;
    bin.sum_sq_l += m.sum_sq_l;
    bin.pairs += m.pairs;
    bin.psnr_sum += psnr(map, rec.gt);
    ++bin.count;
    if (m.flagged) ++result.flagged;
  };

  for (std::size_t start = 0; start < records.size(); start += options.chunk_size) {
    const std::size_t count = std::min(options.chunk_size, records.size() - start);
    const auto chunk = records.subspan(start, count);
    std::vector<RdMap> maps;
    bool chunk_ok = true;
    const auto t0 = Clock::now();
    try {
      maps = estimator.estimate(chunk);
      if (maps.size() != count) throw std::runtime_error("estimator returned wrong map count");
    } catch (const std::exception&) {
      chunk_ok = false;
    }
    result.total_predict_seconds += std::chrono::duration<double>(Clock::now() - t0).count();

    for (std::size_t i = 0; i < count; ++i) {
      try {
        if (chunk_ok) {
          score(chunk[i], maps[i]);
        } else {
          // Retry alone so a single bad record does not sink its chunk.
          const auto t1 = Clock::now();
          auto single = estimator.estimate(chunk.subspan(i, 1));
          result.total_predict_seconds += std::chrono::duration<double>(Clock::now() - t1).count();
          if (single.size() != 1) throw std::runtime_error("estimator returned wrong map count");
          score(chunk[i], single.front());
        }
      } catch (const std::exception& e) {
        result.failures.push_back({start + i, e.what()});
      }
    }
  }

  const std::size_t scored = records.size() - result.failures.size();
  const double per_record =
      scored > 0 ? result.total_predict_seconds / static_cast<double>(scored) : 0.0;
  for (const auto& [snr, bin] : bins) {
    MetricRow row;
    row.snr_db = snr;
    row.count = bin.count;
    if (bin.pairs > 0) {
      row.rmse_range_index = std::sqrt(bin.sum_sq_k / static_cast<double>(bin.pairs));
      row.rmse_velocity_index = std::sqrt(bin.sum_sq_l / static_cast<double>(bin.pairs));
    }
    row.psnr_db = bin.psnr_sum / static_cast<double>(bin.count);
    row.mean_predict_time = per_record;
    result.rows.push_back(row);
  }
  return result;
}

std::string render_results_csv(const std::vector<MetricRow>& rows, bool include_timing) {
  std::ostringstream os;
  os << "snr_db,rmse_range_index,rmse_velocity_index,psnr_db,"
     << (include_timing ? "mean_predict_time_s," : "") << "count\n";
  for (const auto& r : rows) {
    os << format_snr(r.snr_db) << ',' << format_double(r.rmse_range_index) << ','
       << format_double(r.rmse_velocity_index) << ',' << format_snr(r.psnr_db) << ',';
    if (include_timing) os << format_double(r.mean_predict_time) << ',';
    os << r.count << '\n';
  }
  return os.str();
}

}  // namespace rdnet::eval
