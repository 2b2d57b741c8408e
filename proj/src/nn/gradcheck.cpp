#include "rdnet/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rdnet::nn {

namespace {

std::vector<std::size_t> sample_entries(std::size_t size, std::size_t max_entries, Rng& rng) {
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (max_entries == 0 || size <= max_entries) return idx;
  std::shuffle(idx.begin(), idx.end(), rng.engine());
  idx.resize(max_entries);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double weighted_sum(const Tensor<double>& y, const Tensor<double>& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
  return s;
}

BlockReport compare(const std::string& name, const std::vector<double>& analytic,
                    const std::vector<double>& numeric, double floor,
                    double tolerance) {
  BlockReport b;
  b.name = name;
  b.checked = analytic.size();
  double scale = floor;
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]));
  }
  b.max_rel_error = scale > 0.0 ? worst / scale : 0.0;
  b.passed = b.max_rel_error < tolerance;
  return b;
}

}  // namespace

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  os << (passed ? "PASS" : "FAIL") << " max_rel_error=" << max_rel_error << "\n";
  for (const auto& b : blocks) {
    os << "  " << (b.passed ? "ok  " : "BAD ") << b.name << " n=" << b.checked
       << " rel=" << b.max_rel_error << "\n";
  }
  return os.str();
}

GradCheckReport grad_check(Layer<double>& fragment, const Tensor<double>& input,
                           const GradCheckOptions& opts) {
  Rng rng(opts.seed);
  fragment.freeze_randomness(true);

  // The first forward draws any dropout mask; later forwards replay it.
  Tensor<double> out = fragment.forward(input, opts.mode);
  Tensor<double> r(out.shape());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = rng.normal();

  auto params = fragment.params();
  for (auto& p : params) p.grad->zero();
  fragment.forward(input, opts.mode);
  const Tensor<double> grad_input = fragment.backward(r);

  auto loss_at = [&](const Tensor<double>& x) {
    return weighted_sum(fragment.forward(x, opts.mode), r);
  };

  struct Sampled {
    std::string name;
    std::vector<double> analytic, numeric;
  };
  std::vector<Sampled> sampled;
  const double h = opts.step;
  if (opts.check_input) {
    Tensor<double> x = input;
    std::vector<double> analytic, numeric;
    for (std::size_t i : sample_entries(x.size(), opts.max_entries, rng)) {
      const double orig = x[i];
      x[i] = orig + h;
      const double lp = loss_at(x);
      x[i] = orig - h;
      const double lm = loss_at(x);
      x[i] = orig;
      analytic.push_back(grad_input[i]);
      numeric.push_back((lp - lm) / (2.0 * h));
    }
    sampled.push_back({"input", std::move(analytic), std::move(numeric)});
  }

  for (auto& p : params) {
    if (!p.trainable) continue;
    Tensor<double>& w = *p.value;
    std::vector<double> analytic, numeric;
    for (std::size_t i : sample_entries(w.size(), opts.max_entries, rng)) {
      const double orig = w[i];
      w[i] = orig + h;
      const double lp = loss_at(input);
      w[i] = orig - h;
      const double lm = loss_at(input);
      w[i] = orig;
      analytic.push_back((*p.grad)[i]);
      numeric.push_back((lp - lm) / (2.0 * h));
    }
    sampled.push_back({p.name, std::move(analytic), std::move(numeric)});
  }
  fragment.freeze_randomness(false);

  double global = 0.0;
  for (const auto& s : sampled) {
    for (double v : s.analytic) global = std::max(global, std::abs(v));
    for (double v : s.numeric) global = std::max(global, std::abs(v));
  }
  GradCheckReport report;
  for (const auto& s : sampled) {
    report.blocks.push_back(
        compare(s.name, s.analytic, s.numeric, opts.zero_floor * global, opts.tolerance));
  }
  report.passed = !report.blocks.empty();
  for (const auto& b : report.blocks) {
    report.max_rel_error = std::max(report.max_rel_error, b.max_rel_error);
    report.passed = report.passed && b.passed;
  }
  return report;
}

}  // namespace rdnet::nn
