#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rdnet/nn/layers.hpp"

namespace rdnet::nn {

struct GradCheckOptions {
  double step = 1e-5;          // central-difference half step
  double tolerance = 1e-4;     // on the block-normalised error
  // Floor on a block's scale, relative to the largest gradient of any block,
  // so blocks whose true gradient is zero are judged against roundoff.
  double zero_floor = 1e-3;
  std::size_t max_entries = 24;  // sampled entries per block (0 = all)
  std::uint64_t seed = 7;
  Mode mode = Mode::train;
  bool check_input = true;
};

struct BlockReport {
  std::string name;
  std::size_t checked = 0;
  /// max_i |analytic_i - numeric_i| / max(zero_floor * G, max_i |analytic_i|, max_i |numeric_i|),
  /// where G is the largest gradient magnitude over all blocks
  double max_rel_error = 0.0;
  bool passed = false;
};

struct GradCheckReport {
  std::vector<BlockReport> blocks;
  double max_rel_error = 0.0;
  bool passed = false;

  std::string summary() const;
};

/// Compares back-propagated gradients of L = sum(r * fragment(input)), with a
/// fixed random r, against central differences for the input and every
/// trainable parameter block. Stochastic layers are frozen for the duration.
GradCheckReport grad_check(Layer<double>& fragment, const Tensor<double>& input,
                           const GradCheckOptions& opts = {});

}  // namespace rdnet::nn
