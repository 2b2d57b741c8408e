#pragma once

#include <cstddef>
#include <vector>

#include "rdnet/dataset/rd_map.hpp"
#include "rdnet/sim/radar.hpp"

namespace rdnet::baseline {

enum class Window { none, hann };

struct PeriodogramSpec {
  std::size_t zp_k = 1;  // zero-padding factor along k (rows)
  std::size_t zp_l = 1;  // along l (columns)
  Window window = Window::none;

  void validate() const;
};

/// 2D periodogram
///   P(u, v) = |sum_k sum_l w[k,l] h[k,l] e^{+j2pi uk/N'} e^{-j2pi vl/M'}|^2 / (N M)
/// on the zero-padded N' x M' grid, with both axes shifted so that output
/// bin i corresponds to frequency -0.5 + i/N'. The per-axis signs undo the
/// delay and Doppler phase rotations of the channel model, so a target at
/// (f1, f2) lands on bin ((f1 + 0.5) N', (f2 + 0.5) M').
RdMap periodogram_2d(const sim::ChannelEstimate& h, const PeriodogramSpec& spec = {});

/// Same definition evaluated by direct summation, O(N M N' M').
RdMap periodogram_naive(const sim::ChannelEstimate& h, const PeriodogramSpec& spec = {});

struct Peak {
  std::size_t k = 0;
  std::size_t l = 0;
  double magnitude = 0.0;
};

using PeakList = std::vector<Peak>;

/// Minimum wrap-around separation, in bins, between extracted peaks.
struct PeakGuard {
  double k = 0.0;
  double l = 0.0;

  /// Half the scene minimum separation (1/(3N), 1/(3M)) expressed in bins
  /// of a map padded by (zp_k, zp_l).
  static PeakGuard half_min_separation(std::size_t zp_k = 1, std::size_t zp_l = 1) {
    return {static_cast<double>(zp_k) / 6.0, static_cast<double>(zp_l) / 6.0};
  }
};

/// Greedy extraction of up to n peaks. Cells are visited by descending
/// magnitude (ties: smaller k, then smaller l); a cell is accepted when it is
/// positive and at least guard.k bins from every accepted peak along k and
/// guard.l bins along l, mirroring the per-axis separation of scene targets.
/// Returns fewer than n peaks when the map runs out of candidates.
PeakList extract_peaks(const RdMap& map, std::size_t n,
                       const PeakGuard& guard = PeakGuard::half_min_separation());

}  // namespace rdnet::baseline
