#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "rdnet/common/plane.hpp"
#include "rdnet/common/rng.hpp"

namespace rdnet::sim {

/// OFDM frame and propagation parameters of the monostatic radar.
struct RadarConfig {
  std::size_t n_subcarriers = 64;  // N, rows of the channel estimate
  std::size_t n_symbols = 8;       // M, columns
  double delta_f = 15e3;           // subcarrier spacing [Hz]
  double f_c = 3e9;                // carrier [Hz]
  std::size_t n_cp = 16;           // cyclic prefix length [samples]
  double c = 299792458.0;          // propagation speed [m/s]
  double sigma_rcs = 1.0;          // radar cross section [m^2]

  std::size_t n_s() const { return n_subcarriers + n_cp; }
  double bandwidth() const { return static_cast<double>(n_subcarriers) * delta_f; }
  double symbol_time() const { return 1.0 / delta_f; }
  /// Total OFDM symbol duration including the cyclic prefix.
  double t_s() const {
    return static_cast<double>(n_s()) / (static_cast<double>(n_subcarriers) * delta_f);
  }
  double t_cp() const { return t_s() - symbol_time(); }

  /// Throws DomainError if any invariant is violated.
  void validate() const;
};

struct Target {
  double b = 0.0;   // amplitude
  double f1 = 0.0;  // normalized delay frequency, cycles per subcarrier
  double f2 = 0.0;  // normalized Doppler frequency, cycles per symbol
};

struct TargetScene {
  std::vector<Target> targets;
  double phi = 0.0;  // common reflection phase [rad]
};

/// Channel estimate H = I + jQ. snr_db is empty for a noise-free matrix.
struct ChannelEstimate {
  Plane i_plane;
  Plane q_plane;
  std::optional<double> snr_db;

  std::size_t rows() const { return static_cast<std::size_t>(i_plane.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(i_plane.cols()); }
  std::complex<double> at(std::size_t k, std::size_t l) const {
    return {i_plane(k, l), q_plane(k, l)};
  }
};

/// Sentinel SNR meaning "no noise".
inline constexpr double kNoiseFree = std::numeric_limits<double>::infinity();

/// Reduce a normalized frequency into [-0.5, 0.5).
double wrap_frequency(double f);

/// Wrap-around distance between two normalized frequencies, in [0, 0.5].
double frequency_distance(double a, double b);

struct NormalizedFrequencies {
  double f1 = 0.0;
  double f2 = 0.0;
  double f1_unwrapped = 0.0;
  double f2_unwrapped = 0.0;
  bool aliased = false;  // an unwrapped value left [-0.5, 0.5)
};

/// Range/velocity to (f1, f2) using the round-trip delay 2d/c and Doppler
/// 2 v f_c / c.
NormalizedFrequencies map_physical_to_normalized(double range_m, double velocity_mps,
                                                 const RadarConfig& cfg);

/// Free-space two-way amplitude factor. Throws DomainError for range <= 0.
double friis_attenuation(double range_m, const RadarConfig& cfg);

/// Noise-free channel estimate
///   h[k,l] = sum_p b_p exp(-j 2 pi f1_p k) exp(j 2 pi f2_p l) exp(j phi).
ChannelEstimate synthesize_channel(const TargetScene& scene, const RadarConfig& cfg);

/// Mean squared magnitude over all entries.
double mean_power(const ChannelEstimate& h);

/// Adds circularly symmetric complex Gaussian noise with per-entry variance
/// mean_power(h) * 10^(-snr_db/10). snr_db = kNoiseFree returns h unchanged
/// (apart from the tag). Throws DomainError when h has zero power and
/// snr_db is finite.
ChannelEstimate add_awgn(const ChannelEstimate& h, double snr_db, Rng& rng);

/// Square QAM constellation of the given order (4, 16, 64, ...), scaled to
/// unit average energy.
std::vector<std::complex<double>> qam_constellation(std::size_t order);

/// Forms Y = S .* H + Z from random QAM symbols S and returns the spectral
/// division Y ./ S. Noise power is matched to add_awgn for the same snr_db.
ChannelEstimate qam_roundtrip(const TargetScene& scene, const RadarConfig& cfg, Rng& rng,
                              double snr_db = kNoiseFree, std::size_t qam_order = 4);

}  // namespace rdnet::sim
