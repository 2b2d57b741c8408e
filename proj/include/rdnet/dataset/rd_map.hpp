#pragma once

#include <cstddef>

#include "rdnet/common/plane.hpp"

namespace rdnet {

/// Real range-Doppler map; rows are range bins k, columns velocity bins l.
struct RdMap {
  Plane values;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
};

}  // namespace rdnet
