#pragma once

#include <Eigen/Core>

namespace rdnet {

/// Real row-major matrix used for I/Q planes and range-Doppler maps.
/// Row index is the subcarrier (range) index k, column index the symbol
/// (Doppler) index l.
using Plane = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace rdnet
