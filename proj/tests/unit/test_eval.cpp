#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rdnet/common/errors.hpp"
#include "rdnet/dataset/generate.hpp"
#include "rdnet/eval/evaluate.hpp"
#include "rdnet/eval/metrics.hpp"

using namespace rdnet;
using namespace rdnet::eval;
using baseline::Peak;
using baseline::PeakList;

namespace {

PeakList random_peaks(Rng& rng, std::size_t n, std::size_t rows, std::size_t cols) {
  PeakList out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({static_cast<std::size_t>(rng.index(rows)),
                   static_cast<std::size_t>(rng.index(cols)), 0.0});
  }
  return out;
}

double total_cost(const MatchResult& m) { return m.sum_sq_k + m.sum_sq_l; }

RdMap random_map(Rng& rng, std::size_t rows, std::size_t cols) {
  RdMap m{Plane(rows, cols)};
  for (Eigen::Index i = 0; i < m.values.size(); ++i) m.values.data()[i] = rng.uniform();
  return m;
}

std::vector<dataset::DatasetRecord> records(std::size_t scenes, std::vector<double> snrs) {
  dataset::DatasetParams p;
  p.snr_levels = std::move(snrs);
  std::vector<dataset::DatasetRecord> out;
  for (std::uint64_t id = 0; id < scenes; ++id) {
    for (auto& r : dataset::make_scene_records(p, id)) out.push_back(std::move(r));
  }
  return out;
}

class FailingEstimator final : public Estimator {
 public:
  std::string name() const override { return "failing"; }
  std::vector<RdMap> estimate(std::span<const dataset::DatasetRecord> recs) override {
    if (recs.size() > 1 || recs.front().scene_id == 1) throw std::runtime_error("boom");
    return {recs.front().gt};
  }
};

}  // namespace

TEST_CASE("wrap-around distance") {
  CHECK(wrap_distance(0, 63, 64) == 1);
  CHECK(wrap_distance(63, 0, 64) == 1);
  CHECK(wrap_distance(10, 42, 64) == 32);
  CHECK(wrap_distance(5, 5, 8) == 0);
  CHECK(wrap_distance(1, 6, 8) == 3);
}

TEST_CASE("identical peak lists in any order match exactly") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const PeakList gt = random_peaks(rng, 5, 64, 8);
    PeakList pred = gt;
    std::reverse(pred.begin(), pred.end());
    std::rotate(pred.begin(), pred.begin() + trial % 5, pred.end());
    const auto m = match_and_rmse(pred, gt, 64, 8);
    CHECK(m.rmse_k == 0.0);
    CHECK(m.rmse_l == 0.0);
    CHECK(m.pairs == 5);
  }
}

TEST_CASE("single pair offset along k") {
  const auto m = match_and_rmse({{12, 3, 0.0}}, {{10, 3, 0.0}}, 64, 8);
  CHECK(m.rmse_k == 2.0);
  CHECK(m.rmse_l == 0.0);
  const auto wrapped = match_and_rmse({{63, 7, 0.0}}, {{1, 0, 0.0}}, 64, 8);
  CHECK(wrapped.rmse_k == 2.0);
  CHECK(wrapped.rmse_l == 1.0);
}

TEST_CASE("optimal matching beats greedy on a crossing pair") {
  const PeakList gt = {{0, 0, 0.0}, {3, 0, 0.0}};
  const PeakList pred = {{2, 0, 0.0}, {5, 0, 0.0}};
  const auto opt = match_and_rmse(pred, gt, 64, 8);
  const auto greedy = match_greedy(pred, gt, 64, 8);
  CHECK(total_cost(opt) == 8.0);
  CHECK(total_cost(greedy) == 26.0);
  CHECK(total_cost(opt) < total_cost(greedy));
}

TEST_CASE("matching is invariant to permutations of either list") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const PeakList gt = random_peaks(rng, 5, 64, 8);
    PeakList pred = random_peaks(rng, 5, 64, 8);
    const double base = total_cost(match_and_rmse(pred, gt, 64, 8));
    PeakList gt2 = gt;
    std::swap(gt2[0], gt2[trial % 5]);
    std::reverse(pred.begin(), pred.end());
    const auto m = match_and_rmse(pred, gt2, 64, 8);
    CHECK(total_cost(m) == base);
    CHECK(total_cost(m) <= total_cost(match_greedy(pred, gt2, 64, 8)));
  }
}

TEST_CASE("matching is invariant to a common cyclic relabeling") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const PeakList gt = random_peaks(rng, 4, 64, 8);
    const PeakList pred = random_peaks(rng, 4, 64, 8);
    const std::size_t dk = rng.index(64), dl = rng.index(8);
    PeakList gt2 = gt, pred2 = pred;
    for (auto& p : gt2) p = {(p.k + dk) % 64, (p.l + dl) % 8, 0.0};
    for (auto& p : pred2) p = {(p.k + dk) % 64, (p.l + dl) % 8, 0.0};
    CHECK(total_cost(match_and_rmse(pred, gt, 64, 8)) ==
          total_cost(match_and_rmse(pred2, gt2, 64, 8)));
  }
}

TEST_CASE("assignment solver agrees with exhaustive search") {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + rng.index(6);
    const std::size_t cols = rows + rng.index(3);
    std::vector<double> cost(rows * cols);
    for (auto& c : cost) c = static_cast<double>(rng.index(50));
    const auto sol = solve_assignment(cost, rows, cols);
    REQUIRE(sol.size() == rows);
    std::vector<std::size_t> used = sol;
    std::sort(used.begin(), used.end());
    CHECK(std::adjacent_find(used.begin(), used.end()) == used.end());
    double got = 0.0;
    for (std::size_t r = 0; r < rows; ++r) got += cost[r * cols + sol[r]];

    std::vector<std::size_t> perm(cols);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
      double c = 0.0;
      for (std::size_t r = 0; r < rows; ++r) c += cost[r * cols + perm[r]];
      best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got == best);
  }
}

TEST_CASE("large peak lists use the assignment solver") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const PeakList gt = random_peaks(rng, 9, 64, 8);
    PeakList pred = gt;
    std::reverse(pred.begin(), pred.end());
    const auto m = match_and_rmse(pred, gt, 64, 8);
    CHECK(total_cost(m) == 0.0);
  }
}

TEST_CASE("missing and surplus predictions") {
  const PeakList gt = {{10, 2, 0.0}, {40, 5, 0.0}};
  const auto missing = match_and_rmse({{10, 2, 0.0}}, gt, 64, 8);
  CHECK(missing.pairs == 2);
  CHECK(missing.sum_sq_k == 32.0 * 32.0);
  CHECK(missing.sum_sq_l == 4.0 * 4.0);
  CHECK(missing.rmse_k == doctest::Approx(std::sqrt(32.0 * 32.0 / 2.0)));
  const auto surplus = match_and_rmse({{40, 5, 0.0}, {0, 0, 0.0}, {10, 2, 0.0}}, gt, 64, 8);
  CHECK(surplus.pairs == 2);
  CHECK(total_cost(surplus) == 0.0);
  CHECK_FALSE(surplus.flagged);
  const auto empty_gt = match_and_rmse({{1, 1, 0.0}}, {}, 64, 8);
  CHECK(empty_gt.flagged);
  CHECK(empty_gt.sum_sq_k == 32.0 * 32.0);
  const auto both_empty = match_and_rmse({}, {}, 64, 8);
  CHECK_FALSE(both_empty.flagged);
  CHECK(both_empty.rmse_k == 0.0);
}

TEST_CASE("psnr with MSE 0.01 and unit peak is exactly 20 dB") {
  RdMap gt{Plane::Zero(1, 100)};
  RdMap pred{Plane::Zero(1, 100)};
  gt.values(0, 0) = 1.0;
  pred.values(0, 0) = 1.0;
  gt.values(0, 1) = 1.0;
  pred.values(0, 1) = 0.0;
  // One residual of 1 over 100 cells.
  CHECK(psnr(pred, gt) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("psnr sentinel, shape errors and constant maps") {
  Rng rng(6);
  const RdMap gt = random_map(rng, 64, 8);
  CHECK(psnr(gt, gt) == kPsnrIdentical);
  CHECK(std::isinf(psnr(gt, gt)));
  CHECK_THROWS_AS(psnr(gt, random_map(rng, 64, 4)), ShapeError);
  const RdMap flat{Plane::Constant(64, 8, 3.0)};
  CHECK(min_max_normalize(flat).values.isZero(0.0));
  CHECK(std::isfinite(psnr(flat, gt)));
  CHECK(psnr(flat, RdMap{Plane::Constant(64, 8, 7.0)}) == kPsnrIdentical);
}

TEST_CASE("psnr is invariant to positive affine rescaling") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const RdMap gt = random_map(rng, 64, 8);
    const RdMap pred = random_map(rng, 64, 8);
    const double a = 0.01 + 100.0 * rng.uniform(), b = 50.0 * (rng.uniform() - 0.5);
    const RdMap pred2{(pred.values.array() * a + b).matrix()};
    const RdMap gt2{(gt.values.array() * (a + 1.0) - b).matrix()};
    const double base = psnr(pred, gt);
    CHECK(psnr(pred2, gt) == doctest::Approx(base).epsilon(1e-9));
    CHECK(psnr(pred, gt2) == doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("added noise strictly lowers psnr") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(100 + seed);
    RdMap gt{Plane::Zero(64, 8)};
    for (int p = 0; p < 5; ++p) {
      gt.values(static_cast<Eigen::Index>(rng.index(64)),
                static_cast<Eigen::Index>(rng.index(8))) = 100.0 + 300.0 * rng.uniform();
    }
    Plane noise(64, 8);
    for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = std::abs(rng.normal());
    const double small = psnr(RdMap{gt.values + 1.0 * noise}, gt);
    const double large = psnr(RdMap{gt.values + 10.0 * noise}, gt);
    CHECK(std::isfinite(small));
    CHECK(small > large);
  }
}

TEST_CASE("ground-truth estimator scores perfectly") {
  const auto recs = records(4, {-10.0, 10.0, sim::kNoiseFree});
  GroundTruthEstimator est;
  const auto res = evaluate(est, recs, dataset::GridSpec::for_radar(sim::RadarConfig{}));
  REQUIRE(res.rows.size() == 3);
  CHECK(res.records == 12);
  CHECK(res.failures.empty());
  for (const auto& row : res.rows) {
    CHECK(row.rmse_range_index == 0.0);
    CHECK(row.rmse_velocity_index == 0.0);
    CHECK(row.psnr_db == kPsnrIdentical);
    CHECK(row.count == 4);
  }
  CHECK(res.rows[0].snr_db == -10.0);
  CHECK(res.rows[1].snr_db == 10.0);
  CHECK(std::isinf(res.rows[2].snr_db));
}

TEST_CASE("periodogram is exact on a noise-free on-grid split") {
  const auto recs = records(20, {sim::kNoiseFree});
  PeriodogramEstimator est;
  const auto res = evaluate(est, recs, dataset::GridSpec::for_radar(sim::RadarConfig{}));
  REQUIRE(res.rows.size() == 1);
  CHECK(res.rows[0].rmse_range_index == 0.0);
  CHECK(res.rows[0].rmse_velocity_index == 0.0);
  CHECK(res.rows[0].count == 20);
}

TEST_CASE("aggregated RMSE pools residuals over the SNR level") {
  const auto recs = records(15, {-15.0, 0.0});
  const auto grid = dataset::GridSpec::for_radar(sim::RadarConfig{});
  PeriodogramEstimator est;
  const auto res = evaluate(est, recs, grid);
  REQUIRE(res.rows.size() == 2);
  for (const auto& row : res.rows) {
    double sk = 0.0, sl = 0.0;
    std::size_t pairs = 0, n = 0;
    for (const auto& rec : recs) {
      if (rec.snr_db != row.snr_db) continue;
      const auto map = est.estimate(std::span(&rec, 1)).front();
      PeakList gt;
      for (const auto& c : dataset::target_cells(rec.scene, grid)) gt.push_back({c.k, c.l, 0.0});
      const auto m = match_and_rmse(baseline::extract_peaks(map, gt.size()), gt, 64, 8);
      sk += m.sum_sq_k;
      sl += m.sum_sq_l;
      pairs += m.pairs;
      ++n;
    }
    CHECK(row.rmse_range_index == doctest::Approx(std::sqrt(sk / static_cast<double>(pairs))));
    CHECK(row.rmse_velocity_index == doctest::Approx(std::sqrt(sl / static_cast<double>(pairs))));
    CHECK(row.count == n);
  }
  CHECK(res.rows[0].rmse_range_index > res.rows[1].rmse_range_index);
}

TEST_CASE("estimator failures are recorded, not fatal") {
  const auto recs = records(3, {5.0});
  FailingEstimator est;
  EvalOptions opts;
  opts.chunk_size = 3;
  const auto res = evaluate(est, recs, dataset::GridSpec::for_radar(sim::RadarConfig{}), opts);
  REQUIRE(res.failures.size() == 1);
  CHECK(res.failures[0].record_index == 1);
  REQUIRE(res.rows.size() == 1);
  CHECK(res.rows[0].count == 2);
}

TEST_CASE("results CSV layout") {
  MetricRow r;
  r.snr_db = -5.0;
  r.rmse_range_index = 1.5;
  r.rmse_velocity_index = 0.25;
  r.psnr_db = 12.0;
  r.mean_predict_time = 0.001;
  r.count = 3;
  const auto with = render_results_csv({r});
  const auto without = render_results_csv({r}, false);
  CHECK(with.rfind("snr_db,rmse_range_index,rmse_velocity_index,psnr_db,mean_predict_time_s,count\n", 0) == 0);
  CHECK(without.rfind("snr_db,rmse_range_index,rmse_velocity_index,psnr_db,count\n", 0) == 0);
  CHECK(without.find("-5,1.5,0.25,12,3") != std::string::npos);
}
