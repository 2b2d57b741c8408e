#include "rdnet/baseline/periodogram.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <numeric>

#include "rdnet/common/errors.hpp"

namespace rdnet::baseline {

namespace {

std::vector<double> window_taps(Window w, std::size_t n) {
  std::vector<double> taps(n, 1.0);
  if (w == Window::hann && n > 1) {
    for (std::size_t i = 0; i < n; ++i) {
      taps[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(n - 1));
    }
  }
  return taps;
}

void check_input(const sim::ChannelEstimate& h) {
  if (h.i_plane.rows() != h.q_plane.rows() || h.i_plane.cols() != h.q_plane.cols()) {
    throw ShapeError("periodogram: I and Q planes differ in shape");
  }
  if (h.i_plane.size() == 0) throw ShapeError("periodogram: empty channel estimate");
}

struct FftwDeleter {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};

}  // namespace

void PeriodogramSpec::validate() const {
  if (zp_k < 1 || zp_l < 1) throw DomainError("PeriodogramSpec: zero-pad factors must be >= 1");
}

RdMap periodogram_2d(const sim::ChannelEstimate& h, const PeriodogramSpec& spec) {
  spec.validate();
  check_input(h);
  const std::size_t n = h.rows();
  const std::size_t m = h.cols();
  const std::size_t np = n * spec.zp_k;
  const std::size_t mp = m * spec.zp_l;
  const auto wk = window_taps(spec.window, n);
  const auto wl = window_taps(spec.window, m);

  std::unique_ptr<fftw_complex, FftwDeleter> buf(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * np * mp)));
  std::unique_ptr<fftw_plan_s, PlanDeleter> plan(
      fftw_plan_dft_2d(static_cast<int>(np), static_cast<int>(mp), buf.get(), buf.get(),
                       FFTW_FORWARD, FFTW_ESTIMATE));
  std::fill_n(&buf.get()[0][0], 2 * np * mp, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < m; ++l) {
      const double w = wk[k] * wl[l];
      buf.get()[k * mp + l][0] = w * h.i_plane(k, l);
      buf.get()[k * mp + l][1] = w * h.q_plane(k, l);
    }
  }
  fftw_execute(plan.get());

  // The forward transform uses e^{-j...} on both axes; the k axis needs
  // e^{+j...}, i.e. the forward bin -u. Output bin i maps to u = i - N'/2.
  const double norm = 1.0 / static_cast<double>(n * m);
  RdMap out{Plane(np, mp)};
  for (std::size_t i = 0; i < np; ++i) {
    const std::size_t u = (i + np - np / 2) % np;
    const std::size_t row = (np - u) % np;
    for (std::size_t j = 0; j < mp; ++j) {
      const std::size_t v = (j + mp - mp / 2) % mp;
      const fftw_complex& c = buf.get()[row * mp + v];
      out.values(i, j) = (c[0] * c[0] + c[1] * c[1]) * norm;
    }
  }
  return out;
}

RdMap periodogram_naive(const sim::ChannelEstimate& h, const PeriodogramSpec& spec) {
  spec.validate();
  check_input(h);
  const std::size_t n = h.rows();
  const std::size_t m = h.cols();
  const std::size_t np = n * spec.zp_k;
  const std::size_t mp = m * spec.zp_l;
  const auto wk = window_taps(spec.window, n);
  const auto wl = window_taps(spec.window, m);
  constexpr double kTwoPi = 2.0 * std::numbers::pi;

  // Exact twiddles: reduce the integer phase index before converting.
  std::vector<std::complex<double>> tw_k(np);
  std::vector<std::complex<double>> tw_l(mp);
  for (std::size_t r = 0; r < np; ++r) {
    tw_k[r] = std::polar(1.0, kTwoPi * static_cast<double>(r) / static_cast<double>(np));
  }
  for (std::size_t r = 0; r < mp; ++r) {
    tw_l[r] = std::polar(1.0, -kTwoPi * static_cast<double>(r) / static_cast<double>(mp));
  }

  RdMap out{Plane(np, mp)};
  for (std::size_t i = 0; i < np; ++i) {
    const std::size_t u = (i + np - np / 2) % np;
    for (std::size_t j = 0; j < mp; ++j) {
      const std::size_t v = (j + mp - mp / 2) % mp;
      std::complex<double> acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < m; ++l) {
          acc += wk[k] * wl[l] * h.at(k, l) * tw_k[(u * k) % np] * tw_l[(v * l) % mp];
        }
      }
      out.values(i, j) = std::norm(acc) / static_cast<double>(n * m);
    }
  }
  return out;
}

PeakList extract_peaks(const RdMap& map, std::size_t n, const PeakGuard& guard) {
  const std::size_t rows = map.rows();
  const std::size_t cols = map.cols();
  std::vector<std::size_t> order(rows * cols);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const double* v = map.values.data();
  // Row-major storage, so a smaller flat index means smaller k, then l.
  std::stable_sort(order.begin(), order.end(),
                   [v](std::size_t a, std::size_t b) { return v[a] > v[b]; });

  auto wrap_dist = [](std::size_t a, std::size_t b, std::size_t size) {
    const std::size_t d = a > b ? a - b : b - a;
    return static_cast<double>(std::min(d, size - d));
  };

  PeakList peaks;
  for (std::size_t idx : order) {
    if (peaks.size() >= n) break;
    if (!(v[idx] > 0.0)) break;
    const std::size_t k = idx / cols;
    const std::size_t l = idx % cols;
    const bool clear = std::all_of(peaks.begin(), peaks.end(), [&](const Peak& p) {
      return wrap_dist(k, p.k, rows) >= guard.k && wrap_dist(l, p.l, cols) >= guard.l;
    });
    if (clear) peaks.push_back({k, l, v[idx]});
  }
  return peaks;
}

}  // namespace rdnet::baseline
