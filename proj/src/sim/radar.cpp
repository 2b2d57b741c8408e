#include "rdnet/sim/radar.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rdnet/common/errors.hpp"

namespace rdnet::sim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

void RadarConfig::validate() const {
  if (n_subcarriers < 2) throw DomainError("RadarConfig: N must be >= 2");
  if (n_symbols < 2) throw DomainError("RadarConfig: M must be >= 2");
  if (!(delta_f > 0.0)) throw DomainError("RadarConfig: delta_f must be > 0");
  if (!(f_c > 0.0)) throw DomainError("RadarConfig: f_c must be > 0");
  if (!(c > 0.0)) throw DomainError("RadarConfig: c must be > 0");
  if (!(sigma_rcs >= 0.0)) throw DomainError("RadarConfig: sigma_rcs must be >= 0");
}

double wrap_frequency(double f) {
  double w = f - std::floor(f + 0.5);
  // floor can round up to exactly 0.5 for values just below a half-integer
  if (w >= 0.5) w -= 1.0;
  return w;
}

double frequency_distance(double a, double b) {
  const double d = std::abs(a - b);
  const double frac = d - std::floor(d);
  return std::min(frac, 1.0 - frac);
}

NormalizedFrequencies map_physical_to_normalized(double range_m, double velocity_mps,
                                                 const RadarConfig& cfg) {
  cfg.validate();
  const double tau = 2.0 * range_m / cfg.c;
  const double f_doppler = 2.0 * velocity_mps * cfg.f_c / cfg.c;
  NormalizedFrequencies out;
  out.f1_unwrapped = cfg.delta_f * tau;
  out.f2_unwrapped = cfg.t_s() * f_doppler;
  out.f1 = wrap_frequency(out.f1_unwrapped);
  out.f2 = wrap_frequency(out.f2_unwrapped);
  auto outside = [](double f) { return f < -0.5 || f >= 0.5; };
  out.aliased = outside(out.f1_unwrapped) || outside(out.f2_unwrapped);
  return out;
}

double friis_attenuation(double range_m, const RadarConfig& cfg) {
  if (!(range_m > 0.0)) {
    throw DomainError("friis_attenuation: range must be > 0, got " + std::to_string(range_m));
  }
  const double four_pi_cubed = std::pow(4.0 * std::numbers::pi, 3);
  const double d2 = range_m * range_m;
  return std::sqrt(cfg.c * cfg.sigma_rcs / (four_pi_cubed * d2 * d2 * cfg.f_c * cfg.f_c));
}

ChannelEstimate synthesize_channel(const TargetScene& scene, const RadarConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<Eigen::Index>(cfg.n_subcarriers);
  const auto m = static_cast<Eigen::Index>(cfg.n_symbols);
  ChannelEstimate h{Plane::Zero(n, m), Plane::Zero(n, m), std::nullopt};

  // Per-axis phasor tables; the separable product avoids an exp per entry.
  std::vector<std::complex<double>> row(static_cast<std::size_t>(n));
  std::vector<std::complex<double>> col(static_cast<std::size_t>(m));
  const std::complex<double> common = std::polar(1.0, scene.phi);
  for (const Target& t : scene.targets) {
    for (Eigen::Index k = 0; k < n; ++k) {
      row[k] = std::polar(t.b, -kTwoPi * t.f1 * static_cast<double>(k));
    }
    for (Eigen::Index l = 0; l < m; ++l) {
      col[l] = std::polar(1.0, kTwoPi * t.f2 * static_cast<double>(l)) * common;
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      for (Eigen::Index l = 0; l < m; ++l) {
        const std::complex<double> v = row[k] * col[l];
        h.i_plane(k, l) += v.real();
        h.q_plane(k, l) += v.imag();
      }
    }
  }
  return h;
}

double mean_power(const ChannelEstimate& h) {
  if (h.i_plane.size() == 0) return 0.0;
  return (h.i_plane.squaredNorm() + h.q_plane.squaredNorm()) /
         static_cast<double>(h.i_plane.size());
}

ChannelEstimate add_awgn(const ChannelEstimate& h, double snr_db, Rng& rng) {
  if (h.i_plane.rows() != h.q_plane.rows() || h.i_plane.cols() != h.q_plane.cols()) {
    throw ShapeError("add_awgn: I and Q planes differ in shape");
  }
  ChannelEstimate out = h;
  out.snr_db = snr_db;
  if (std::isinf(snr_db) && snr_db > 0) return out;

  const double p_sig = mean_power(h);
  if (!(p_sig > 0.0)) {
    throw DomainError("add_awgn: signal power is zero, SNR is undefined");
  }
  const double sigma2 = p_sig * std::pow(10.0, -snr_db / 10.0);
  const double per_axis = std::sqrt(sigma2 / 2.0);
  for (Eigen::Index k = 0; k < out.i_plane.rows(); ++k) {
    for (Eigen::Index l = 0; l < out.i_plane.cols(); ++l) {
      out.i_plane(k, l) += rng.normal(0.0, per_axis);
      out.q_plane(k, l) += rng.normal(0.0, per_axis);
    }
  }
  return out;
}

std::vector<std::complex<double>> qam_constellation(std::size_t order) {
  const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(order))));
  if (order < 4 || side * side != order) {
    throw DomainError("qam_constellation: order must be a square >= 4, got " +
                      std::to_string(order));
  }
  std::vector<std::complex<double>> points;
  points.reserve(order);
  double energy = 0.0;
  for (std::size_t a = 0; a < side; ++a) {
    for (std::size_t b = 0; b < side; ++b) {
      const double re = 2.0 * static_cast<double>(a) - static_cast<double>(side - 1);
      const double im = 2.0 * static_cast<double>(b) - static_cast<double>(side - 1);
      points.emplace_back(re, im);
      energy += re * re + im * im;
    }
  }
  const double scale = 1.0 / std::sqrt(energy / static_cast<double>(order));
  for (auto& p : points) p *= scale;
  return points;
}

ChannelEstimate qam_roundtrip(const TargetScene& scene, const RadarConfig& cfg, Rng& rng,
                              double snr_db, std::size_t qam_order) {
  const ChannelEstimate h = synthesize_channel(scene, cfg);
  const auto constellation = qam_constellation(qam_order);
  const bool noisy = !(std::isinf(snr_db) && snr_db > 0);
  double per_axis = 0.0;
  if (noisy) {
    const double p_sig = mean_power(h);
    if (!(p_sig > 0.0)) throw DomainError("qam_roundtrip: signal power is zero, SNR is undefined");
    per_axis = std::sqrt(p_sig * std::pow(10.0, -snr_db / 10.0) / 2.0);
  }

  ChannelEstimate out{Plane(h.i_plane.rows(), h.i_plane.cols()),
                      Plane(h.i_plane.rows(), h.i_plane.cols()), snr_db};
  for (Eigen::Index k = 0; k < h.i_plane.rows(); ++k) {
    for (Eigen::Index l = 0; l < h.i_plane.cols(); ++l) {
      const std::complex<double> s = constellation[rng.index(constellation.size())];
      if (std::norm(s) == 0.0) throw DomainError("qam_roundtrip: zero constellation point");
      std::complex<double> y = s * h.at(k, l);
      if (noisy) y += std::complex<double>(rng.normal(0.0, per_axis), rng.normal(0.0, per_axis));
      const std::complex<double> ratio = y / s;
      out.i_plane(k, l) = ratio.real();
      out.q_plane(k, l) = ratio.imag();
    }
  }
  if (!noisy) out.snr_db.reset();
  return out;
}

}  // namespace rdnet::sim
