#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "rdnet/baseline/periodogram.hpp"
#include "rdnet/dataset/rd_map.hpp"

namespace rdnet::eval {

/// Returned by psnr() when the normalized maps are identical.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

struct MatchResult {
  double rmse_k = 0.0;
  double rmse_l = 0.0;
  /// Pooled sums, so results over many records can be combined exactly.
  double sum_sq_k = 0.0;
  double sum_sq_l = 0.0;
  std::size_t pairs = 0;
  /// Set when the ground truth was empty but peaks were predicted.
  bool flagged = false;
  /// (gt index, pred index) per matched pair; pred index == npos marks a
  /// missing prediction charged at the sentinel cost.
  std::vector<std::pair<std::size_t, std::size_t>> assignment;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Wrap-around index distance on a circular axis of `size` bins.
std::size_t wrap_distance(std::size_t a, std::size_t b, std::size_t size);

/// Optimal one-to-one matching of predicted to ground-truth peaks minimizing
/// the total squared wrap-around index distance, then per-axis RMSE over the
/// matched residuals. Missing predictions cost the largest possible residual
/// (floor(rows/2), floor(cols/2)); surplus predictions are left unmatched.
MatchResult match_and_rmse(const baseline::PeakList& pred, const baseline::PeakList& gt,
                           std::size_t rows, std::size_t cols);

/// Greedy nearest-pair matching, kept as a reference for tests.
MatchResult match_greedy(const baseline::PeakList& pred, const baseline::PeakList& gt,
                         std::size_t rows, std::size_t cols);

/// Minimum-cost assignment of every row to a distinct column of a
/// rows <= cols cost matrix (row-major). Returns the column of each row.
std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t rows,
                                          std::size_t cols);

/// Min-max normalizes both maps to [0, 1] (a constant map becomes all
/// zeros), then 20 log10(peak / sqrt(MSE)) with peak = 1, the top of the
/// normalized range. Returns kPsnrIdentical when the MSE is zero.
double psnr(const RdMap& pred, const RdMap& gt);

/// Copy scaled to [0, 1]; constant maps map to all zeros.
RdMap min_max_normalize(const RdMap& map);

}  // namespace rdnet::eval
