#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rdnet/common/rng.hpp"
#include "rdnet/dataset/rd_map.hpp"
#include "rdnet/sim/radar.hpp"

namespace rdnet::dataset {

/// Discrete frequency sets F1 = {-0.5 + i/n_f1} and F2 = {-0.5 + j/n_f2}
/// together with the (n_rows x n_cols) label map they are projected onto.
struct GridSpec {
  std::size_t n_rows = 64;  // N
  std::size_t n_cols = 8;   // M
  std::size_t n_f1 = 64;
  std::size_t n_f2 = 8;

  /// Default grid: one frequency per map cell.
  static GridSpec for_radar(const sim::RadarConfig& cfg) {
    return {cfg.n_subcarriers, cfg.n_symbols, cfg.n_subcarriers, cfg.n_symbols};
  }

  double f1(std::size_t i) const;
  double f2(std::size_t j) const;
  /// Index of f in F1 / F2, or nullopt when f is not a grid value.
  std::optional<std::size_t> index_f1(double f) const;
  std::optional<std::size_t> index_f2(double f) const;
  /// Map cell for grid indices (i, j): k = floor(i N / n_f1), l = floor(j M / n_f2).
  std::size_t row_of(std::size_t i) const { return i * n_rows / n_f1; }
  std::size_t col_of(std::size_t j) const { return j * n_cols / n_f2; }

  void validate() const;
};

struct SamplingRule {
  double amp_offset = 0.1;  // b = |amp_offset + r|, r ~ N(0, 1)
  double min_sep_f1 = 1.0 / (3.0 * 64.0);
  double min_sep_f2 = 1.0 / (3.0 * 8.0);
  bool random_phase = false;  // phi = 0 when false, U[0, 2pi) otherwise
  std::size_t max_attempts = 10000;

  static SamplingRule for_radar(const sim::RadarConfig& cfg) {
    SamplingRule r;
    r.min_sep_f1 = 1.0 / (3.0 * static_cast<double>(cfg.n_subcarriers));
    r.min_sep_f2 = 1.0 / (3.0 * static_cast<double>(cfg.n_symbols));
    return r;
  }
};

/// Thrown when targets cannot be placed under the separation rule.
class PlacementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Draws n_targets on-grid targets. Each new target is redrawn until it
/// keeps the wrap-around separations on both axes from all earlier ones.
sim::TargetScene sample_scene(Rng& rng, const GridSpec& grid, std::size_t n_targets,
                              const SamplingRule& rule = {});

/// Log-compressed amplitude label beta * ln(gamma * b + 1).
struct LabelParams {
  double beta = 100.0;
  double gamma = 100.0;

  double value(double b) const;
  /// Inverse of value().
  double amplitude(double label) const;
};

struct Cell {
  std::size_t k = 0;
  std::size_t l = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Map cells of the scene's targets, in scene order. Throws DomainError for
/// an off-grid frequency.
std::vector<Cell> target_cells(const sim::TargetScene& scene, const GridSpec& grid);

/// Ideal map: zero except beta ln(gamma b_p + 1) at each target cell.
RdMap build_gt_map(const sim::TargetScene& scene, const GridSpec& grid,
                   const LabelParams& label = {});

}  // namespace rdnet::dataset
