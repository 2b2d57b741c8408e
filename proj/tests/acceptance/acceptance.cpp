// Acceptance suite. Each criterion prints one "criterion <n> ... PASS|FAIL"
// line (criterion 6 also prints its sub-checks) and the process exits
// non-zero when any selected criterion fails.
//
//   rdnet_acceptance [--work DIR] [--budget-seconds S] <criterion>...

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "rdnet/baseline/periodogram.hpp"
#include "rdnet/cli/commands.hpp"
#include "rdnet/cli/run_config.hpp"
#include "rdnet/common/rng.hpp"
#include "rdnet/dataset/container.hpp"
#include "rdnet/dataset/generate.hpp"
#include "rdnet/dataset/labels.hpp"
#include "rdnet/eval/evaluate.hpp"
#include "rdnet/eval/metrics.hpp"
#include "rdnet/model/rdnet.hpp"
#include "rdnet/model/train.hpp"
#include "rdnet/nn/gradcheck.hpp"
#include "rdnet/nn/loss.hpp"
#include "rdnet/sim/radar.hpp"

namespace fs = std::filesystem;
using namespace rdnet;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Options {
  fs::path work = "acceptance-work";
  double budget_seconds = 6000.0;  // criterion 6 training wall clock
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

void report(const std::string& id, const std::string& title, const Outcome& o) {
  std::cout << "criterion " << id << " [" << title << "]: " << (o.pass ? "PASS" : "FAIL") << "  "
            << o.detail << std::endl;
}

sim::ChannelEstimate random_channel(Rng& rng, std::size_t n, std::size_t m) {
  sim::ChannelEstimate h{Plane(n, m), Plane(n, m), std::nullopt};
  for (Eigen::Index i = 0; i < h.i_plane.size(); ++i) {
    h.i_plane.data()[i] = rng.normal();
    h.q_plane.data()[i] = rng.normal();
  }
  return h;
}

template <typename T>
nn::Tensor<T> random_tensor(nn::Shape s, std::uint64_t seed) {
  Rng rng(seed);
  nn::Tensor<T> t(s);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(rng.normal());
  return t;
}

// ------------------------------------------------------------------ 1

Outcome fft_oracle() {
  Rng rng(101);
  double worst = 0.0;
  const auto t0 = Clock::now();
  for (int i = 0; i < 50; ++i) {
    const auto h = random_channel(rng, 64, 8);
    const auto fast = baseline::periodogram_2d(h);
    const auto slow = baseline::periodogram_naive(h);
    const double rel =
        (fast.values - slow.values).cwiseAbs().maxCoeff() / slow.values.cwiseAbs().maxCoeff();
    worst = std::max(worst, rel);
  }
  const double secs = since(t0);
  return {worst <= 1e-9 && secs < 10.0,
          "50 inputs, max relative error " + fmt(worst) + " (limit 1e-9), " + fmt(secs, 3) +
              " s (limit 10 s)"};
}

// ------------------------------------------------------------------ 2

Outcome on_grid_exactness() {
  const sim::RadarConfig radar;
  const auto grid = dataset::GridSpec::for_radar(radar);
  const auto rule = dataset::SamplingRule::for_radar(radar);
  Rng rng(202);
  double sum_sq = 0.0;
  std::size_t exact = 0;
  for (int i = 0; i < 100; ++i) {
    const auto scene = dataset::sample_scene(rng, grid, 5, rule);
    const auto map = baseline::periodogram_2d(sim::synthesize_channel(scene, radar));
    baseline::PeakList gt;
    for (const auto& c : dataset::target_cells(scene, grid)) gt.push_back({c.k, c.l, 0.0});
    const auto m = eval::match_and_rmse(baseline::extract_peaks(map, 5), gt, 64, 8);
    sum_sq += m.sum_sq_k + m.sum_sq_l;
    exact += (m.sum_sq_k + m.sum_sq_l == 0.0) ? 1 : 0;
  }
  return {sum_sq == 0.0, std::to_string(exact) + "/100 scenes recovered exactly, total squared "
                         "index error " + fmt(sum_sq)};
}

// ------------------------------------------------------------------ 3

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  nn::GradCheckOptions opts;  // tolerance 1e-4
  std::vector<std::string> failed;
  double worst = 0.0;
  std::size_t checked = 0;
  auto run = [&](const std::string& name, nn::Layer<double>& layer, const nn::Tensor<double>& x,
                 nn::Mode mode = nn::Mode::train) {
    nn::GradCheckOptions o = opts;
    o.mode = mode;
    const auto r = nn::grad_check(layer, x, o);
    worst = std::max(worst, r.max_rel_error);
    ++checked;
    if (!r.passed) {
      failed.push_back(name);
      std::cout << "  " << name << ": " << r.summary();
    }
  };

  Rng rng(303);
  {
    nn::Conv2d<double> c(2, 3, 3, 3);
    c.init(rng);
    run("conv3x3", c, random_tensor<double>({2, 2, 5, 4}, 1));
    nn::Conv2d<double> p(3, 2, 1, 1);
    p.init(rng);
    run("conv1x1", p, random_tensor<double>({2, 3, 4, 3}, 2));
    nn::Conv2d<double> r(2, 2, 5, 3);
    r.init(rng);
    run("conv5x3", r, random_tensor<double>({2, 2, 6, 4}, 3));
  }
  {
    nn::BatchNorm2d<double> bn(3);
    run("batchnorm-train", bn, random_tensor<double>({3, 3, 4, 2}, 4));
    bn.forward(random_tensor<double>({3, 3, 4, 2}, 5), nn::Mode::train);
    run("batchnorm-eval", bn, random_tensor<double>({3, 3, 4, 2}, 6), nn::Mode::eval);
  }
  {
    nn::ReLU<double> relu;
    run("relu", relu, random_tensor<double>({2, 2, 3, 3}, 7));
    nn::Dropout<double> drop(0.5, 9);
    run("dropout", drop, random_tensor<double>({2, 2, 3, 3}, 8));
    nn::Dense<double> dense(12, 5);
    dense.init(rng);
    run("dense", dense, random_tensor<double>({2, 3, 2, 2}, 9));
    nn::Reshape<double> reshape(1, 4, 3);
    run("reshape", reshape, random_tensor<double>({2, 12, 1, 1}, 10));
    nn::Scale<double> scale(2.5);
    run("scale", scale, random_tensor<double>({2, 1, 3, 3}, 11));
  }
  {
    nn::ResidualBlock<double> same(3, 3);
    auto& c = same.body().add<nn::Conv2d<double>>(3, 3, 3, 3);
    c.init(rng);
    same.body().add<nn::BatchNorm2d<double>>(3);
    same.body().add<nn::ReLU<double>>();
    run("residual-identity", same, random_tensor<double>({2, 3, 4, 3}, 12));
    nn::ResidualBlock<double> proj(2, 4);
    auto& c2 = proj.body().add<nn::Conv2d<double>>(2, 4, 3, 3);
    c2.init(rng);
    proj.body().add<nn::BatchNorm2d<double>>(4);
    proj.body().add<nn::ReLU<double>>();
    proj.projection()->init(rng);
    run("residual-projection", proj, random_tensor<double>({2, 2, 4, 3}, 13));
  }
  {
    model::ModelConfig cfg;
    cfg.n_rows = 8;
    cfg.n_cols = 4;
    cfg.head_init_gain = 1.0;  // the default zero head would block every upstream gradient
    model::RdNet<double> net(cfg);
    run("default-model", net, random_tensor<double>({2, 2, 8, 4}, 14));
    cfg.stem_trainable = true;
    cfg.head = model::HeadKind::dense;
    model::RdNet<double> dense_head(cfg);
    run("default-model-dense-head", dense_head, random_tensor<double>({2, 2, 8, 4}, 15));
  }
  const double secs = since(t0);
  std::string detail = std::to_string(checked) + " fragments, worst block error " + fmt(worst) +
                       " (limit 1e-4), " + fmt(secs, 3) + " s (limit 120 s)";
  for (const auto& f : failed) detail += ", failed: " + f;
  return {failed.empty() && secs < 120.0, detail};
}

// ------------------------------------------------------------------ 4

double direct_sse(const nn::Tensor<double>& p, const nn::Tensor<double>& g) {
  const auto s = p.shape();
  double total = 0.0;
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      for (std::size_t h = 0; h < s.h; ++h) {
        for (std::size_t w = 0; w < s.w; ++w) {
          const double d = p.at(n, c, h, w) - g.at(n, c, h, w);
          total += d * d;
        }
      }
    }
  }
  return total / static_cast<double>(s.n);
}

double direct_psnr(const RdMap& pred, const RdMap& gt) {
  auto normalize = [](const RdMap& m) {
    double lo = m.values(0, 0), hi = m.values(0, 0);
    for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.values.cols(); ++c) {
        lo = std::min(lo, m.values(r, c));
        hi = std::max(hi, m.values(r, c));
      }
    }
    Plane out(m.values.rows(), m.values.cols());
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      for (Eigen::Index c = 0; c < out.cols(); ++c) {
        out(r, c) = hi > lo ? (m.values(r, c) - lo) / (hi - lo) : 0.0;
      }
    }
    return out;
  };
  const Plane a = normalize(pred), b = normalize(gt);
  double mse = 0.0;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) mse += (a(r, c) - b(r, c)) * (a(r, c) - b(r, c));
  }
  mse /= static_cast<double>(a.size());
  return 20.0 * std::log10(1.0 / std::sqrt(mse));
}

Outcome unit_values() {
  std::vector<std::string> notes;
  bool ok = true;

  const double want = 100.0 * std::log(11.0);
  const double label = dataset::LabelParams{}.value(0.1);
  sim::TargetScene scene;
  const dataset::GridSpec grid;
  scene.targets = {{0.1, grid.f1(17), grid.f2(5)}};
  const auto map = dataset::build_gt_map(scene, grid);
  const double cell = map.values(17, 5);
  const double label_err = std::max(std::abs(label - want), std::abs(cell - want));
  ok = ok && label_err <= 1e-9;
  notes.push_back("label error " + fmt(label_err) + " (limit 1e-9)");

  double sse_err = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = random_tensor<double>({3, 1, 4, 4}, 400 + seed);
    const auto g = random_tensor<double>({3, 1, 4, 4}, 500 + seed);
    const double oracle = direct_sse(p, g);
    sse_err = std::max(sse_err, std::abs(nn::sse_loss(p, g).value - oracle) / oracle);
  }
  ok = ok && sse_err <= 1e-12;
  notes.push_back("sse relative error " + fmt(sse_err) + " (limit 1e-12)");

  double psnr_err = 0.0;
  Rng rng(404);
  for (int t = 0; t < 20; ++t) {
    RdMap a{Plane(4, 4)}, b{Plane(4, 4)};
    for (Eigen::Index i = 0; i < 16; ++i) {
      a.values.data()[i] = rng.normal();
      b.values.data()[i] = rng.normal();
    }
    const double oracle = direct_psnr(a, b);
    psnr_err = std::max(psnr_err, std::abs(eval::psnr(a, b) - oracle) / std::abs(oracle));
  }
  ok = ok && psnr_err <= 1e-9;
  notes.push_back("psnr relative error " + fmt(psnr_err) + " (limit 1e-9)");

  std::string detail;
  for (std::size_t i = 0; i < notes.size(); ++i) detail += (i ? ", " : "") + notes[i];
  return {ok, detail};
}

// ------------------------------------------------------------------ 5

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome dataset_recipe(const Options& opt) {
  const dataset::DatasetParams params;
  const fs::path a = opt.work / "c5" / "a", b = opt.work / "c5" / "b";
  fs::remove_all(opt.work / "c5");
  const auto t0 = Clock::now();
  const auto summary = dataset::generate_dataset(params, a);
  dataset::generate_dataset(params, b);
  const double secs = since(t0);

  std::size_t on_disk = 0;
  bool identical = true;
  for (const char* f : {"train.rdds", "val.rdds", "test.rdds", "manifest.txt"}) {
    identical = identical && file_bytes(a / f) == file_bytes(b / f);
  }
  for (const char* f : {"train.rdds", "val.rdds", "test.rdds"}) {
    on_disk += dataset::for_each_record(a / f, [](const dataset::DatasetRecord&) {}).record_count;
  }
  bool per_level = summary.records_per_snr.size() == 10;
  for (const auto& [snr, count] : summary.records_per_snr) per_level = per_level && count == 3000;
  const double lo = summary.records_per_snr.begin()->first;
  const double hi = summary.records_per_snr.rbegin()->first;
  const bool span = lo == -15.0 && hi == 30.0;
  fs::remove_all(opt.work / "c5");
  return {summary.total_records == 30000 && on_disk == 30000 && per_level && span && identical,
          std::to_string(on_disk) + " records, " + std::to_string(summary.records_per_snr.size()) +
              " levels of 3000: " + (per_level ? "yes" : "no") + ", span [" + fmt(lo) + ", " +
              fmt(hi) + "] dB, regeneration byte-identical: " + (identical ? "yes" : "no") +
              ", " + fmt(secs, 3) + " s for both runs"};
}

// ------------------------------------------------------------------ 6

bool moving_average_non_increasing(const std::vector<double>& loss, std::size_t window,
                                   std::string& detail) {
  if (loss.size() < window + 1) {
    detail = "only " + std::to_string(loss.size()) + " epochs, need at least " +
             std::to_string(window + 1);
    return false;
  }
  std::vector<double> ma;
  for (std::size_t i = 0; i + window <= loss.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < window; ++j) s += loss[i + j];
    ma.push_back(s / static_cast<double>(window));
  }
  std::size_t violations = 0;
  for (std::size_t i = 1; i < ma.size(); ++i) violations += ma[i] > ma[i - 1] ? 1 : 0;
  detail = std::to_string(ma.size()) + " window means from " + fmt(ma.front(), 6) + " to " +
           fmt(ma.back(), 6) + ", " + std::to_string(violations) + " increases";
  return violations == 0;
}

Outcome desk_scale(const Options& opt) {
  const fs::path dir = opt.work / "c6";
  fs::create_directories(dir);
  const dataset::DatasetParams params;
  const auto t_all = Clock::now();
  std::cout << "  generating the default dataset in " << (dir / "data").string() << std::endl;
  dataset::generate_dataset(params, dir / "data");
  const auto train_recs = dataset::read_dataset(dir / "data" / "train.rdds");
  const auto val_recs = dataset::read_dataset(dir / "data" / "val.rdds");
  const auto test_recs = dataset::read_dataset(dir / "data" / "test.rdds");
  const auto train_set = model::TensorDataset::from_records(train_recs);
  const auto val_set = model::TensorDataset::from_records(val_recs);

  model::ModelConfig mcfg;
  model::TrainConfig tcfg;
  tcfg.max_seconds = opt.budget_seconds;
  model::RdNet<float> net(mcfg);
  std::cout << "  training " << net.parameter_count() << " parameters on " << train_set.size()
            << " records, budget " << opt.budget_seconds << " s" << std::endl;
  const auto result = model::train(net, train_set, val_set, tcfg, [](const model::EpochStats& e) {
    std::cout << "  epoch " << e.epoch << " train " << fmt(e.train_loss, 7) << " val "
              << fmt(e.val_loss, 7) << " (" << fmt(e.seconds, 4) << " s)" << std::endl;
  });
  nn::write_checkpoint(dir / "model.rdck", net.to_checkpoint());
  cli::write_text_atomic(dir / "loss.csv", model::render_loss_csv(result));

  eval::CnnEstimator cnn(net);
  eval::PeriodogramEstimator per;
  const auto grid = dataset::GridSpec::for_radar(params.radar);
  const auto rc = eval::evaluate(cnn, test_recs, grid);
  const auto rp = eval::evaluate(per, test_recs, grid);
  cli::write_text_atomic(dir / "metrics_cnn.csv", eval::render_results_csv(rc.rows, false));
  cli::write_text_atomic(dir / "metrics_periodogram.csv", eval::render_results_csv(rp.rows, false));

  std::vector<double> train_loss;
  for (const auto& e : result.curve) train_loss.push_back(e.train_loss);
  std::string ma_detail;
  const bool a = moving_average_non_increasing(train_loss, 5, ma_detail);
  report("6a", "5-epoch moving average of training loss non-increasing", {a, ma_detail});

  std::map<double, const eval::MetricRow*> cnn_rows, per_rows;
  for (const auto& r : rc.rows) cnn_rows[r.snr_db] = &r;
  for (const auto& r : rp.rows) per_rows[r.snr_db] = &r;
  bool b = true;
  std::string b_detail;
  for (const auto& [snr, pr] : per_rows) {
    if (snr < 0.0 || !cnn_rows.count(snr)) continue;
    const auto* cr = cnn_rows[snr];
    const bool lower = cr->rmse_range_index < pr->rmse_range_index;
    b = b && lower;
    b_detail += (b_detail.empty() ? "" : "; ") + fmt(snr) + " dB: cnn " +
                fmt(cr->rmse_range_index) + (lower ? " < " : " >= ") + "periodogram " +
                fmt(pr->rmse_range_index);
  }
  report("6b", "CNN range RMSE below periodogram at every SNR >= 0 dB", {b, b_detail});

  bool c = false;
  std::string c_detail = "no 30 dB rows";
  if (cnn_rows.count(30.0) && per_rows.count(30.0)) {
    const double gap = cnn_rows[30.0]->psnr_db - per_rows[30.0]->psnr_db;
    c = gap >= 10.0;
    c_detail = "cnn " + fmt(cnn_rows[30.0]->psnr_db) + " dB, periodogram " +
               fmt(per_rows[30.0]->psnr_db) + " dB, gap " + fmt(gap) + " dB (need >= 10)";
  }
  report("6c", "PSNR gap at 30 dB", {c, c_detail});

  // Noise-free single targets: the map argmax must land on the target cell.
  Rng rng(606);
  std::size_t hits = 0;
  const std::size_t trials = 20;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto scene = dataset::sample_scene(rng, grid, 1, dataset::SamplingRule::for_radar(params.radar));
    const auto map = model::predict(net, sim::synthesize_channel(scene, params.radar));
    Eigen::Index r = 0, col = 0;
    map.values.maxCoeff(&r, &col);
    const auto cell = dataset::target_cells(scene, grid).front();
    hits += (static_cast<std::size_t>(r) == cell.k && static_cast<std::size_t>(col) == cell.l) ? 1 : 0;
  }
  const bool d = hits == trials;
  report("6d", "single noise-free target argmax", {d, std::to_string(hits) + "/" +
                                                         std::to_string(trials) + " on target"});

  const double total = since(t_all);
  return {a && b && c && d, std::to_string(result.curve.size()) + " epochs (stop: " +
                                model::stop_reason_name(result.stop) + ", best epoch " +
                                std::to_string(result.best_epoch) + "), training " +
                                fmt(result.total_seconds, 5) + " s, total " + fmt(total, 5) +
                                " s (limit 7200 s); artifacts in " + dir.string()};
}

// ------------------------------------------------------------------ 7

Outcome overfit() {
  const dataset::DatasetParams params;
  std::vector<dataset::DatasetRecord> recs;
  for (std::uint64_t id = 0; id < 5; ++id) {
    for (auto& r : dataset::make_scene_records(params, id)) recs.push_back(std::move(r));
  }
  const auto data = model::TensorDataset::from_records(recs);
  model::ModelConfig mcfg;
  mcfg.dropout = 0.0;  // fitting the training set is the point here
  model::RdNet<float> net(mcfg);
  model::TrainConfig tc;
  tc.max_epochs = 200;
  tc.patience = 0;
  double first = 0.0;
  const auto t0 = Clock::now();
  const auto result = model::train(
      net, data, data, tc,
      [&](const model::EpochStats& e) {
        if (e.epoch == 1) first = e.train_loss;
      },
      [&](const model::EpochStats& e) { return e.train_loss <= 0.05 * first; });
  const double secs = since(t0);
  const double last = result.curve.back().train_loss;
  const double drop = 1.0 - last / first;
  return {drop >= 0.95 && secs < 300.0,
          std::to_string(data.size()) + " records, loss " + fmt(first, 6) + " -> " + fmt(last, 6) +
              " (drop " + fmt(100.0 * drop, 4) + "%, need >= 95%) after " +
              std::to_string(result.curve.size()) + " epochs, " + fmt(secs, 4) +
              " s (limit 300 s)"};
}

// ------------------------------------------------------------------ 8

Outcome timing_harness(const Options& opt) {
  const fs::path dir = opt.work / "c8";
  fs::remove_all(dir);
  auto cfg = cli::load_run_config(
      {}, {"paths.dataset=" + (dir / "data").string(), "paths.out=" + (dir / "out").string(),
           "paths.checkpoint=" + (dir / "model.rdck").string(), "data.clean_count=100",
           "train.max_epochs=2"});
  std::ostringstream log;
  cli::cmd_gen(cfg, log);
  std::ostringstream out;
  cli::cmd_bench(cfg, out);
  const std::string table = out.str();
  std::cout << table;

  // Training progress lines come first; the table starts on its own line.
  const bool header = table.find("\nModel        | Training time (s) | Time/epoch (s) | "
                                 "Prediction time (s)\n") != std::string::npos;
  const bool rows = table.find("\nCNN ") != std::string::npos &&
                    table.find("\nPeriodogram ") != std::string::npos;
  double ms = -1.0;
  const auto pos = table.find("CNN: ");
  if (pos != std::string::npos) {
    const auto comma = table.find(", ", pos);
    ms = std::stod(table.substr(comma + 2));
  }
  return {header && rows && ms >= 0.0 && ms < 50.0,
          std::string("table format ") + (header && rows ? "ok" : "wrong") +
              ", CNN prediction " + fmt(ms) + " ms per record (limit 50 ms)"};
}

// ------------------------------------------------------------------ 9

Outcome metric_properties() {
  using baseline::PeakList;
  Rng rng(909);
  auto random_peaks = [&](std::size_t n) {
    PeakList out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({rng.index(64), rng.index(8), 0.0});
    return out;
  };
  auto cost = [](const eval::MatchResult& m) { return m.sum_sq_k + m.sum_sq_l; };

  bool perm = true;
  for (int t = 0; t < 200; ++t) {
    const auto gt = random_peaks(5);
    auto pred = random_peaks(5);
    const auto base = eval::match_and_rmse(pred, gt, 64, 8);
    auto gt2 = gt;
    std::rotate(gt2.begin(), gt2.begin() + t % 5, gt2.end());
    std::reverse(pred.begin(), pred.end());
    const auto m = eval::match_and_rmse(pred, gt2, 64, 8);
    perm = perm && m.rmse_k == base.rmse_k && m.rmse_l == base.rmse_l;
  }

  const PeakList cross_gt = {{0, 0, 0.0}, {3, 0, 0.0}};
  const PeakList cross_pred = {{2, 0, 0.0}, {5, 0, 0.0}};
  const double opt_cost = cost(eval::match_and_rmse(cross_pred, cross_gt, 64, 8));
  const double greedy_cost = cost(eval::match_greedy(cross_pred, cross_gt, 64, 8));
  const bool crossing = opt_cost < greedy_cost;

  bool affine = true;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    RdMap a{Plane(64, 8)}, g{Plane(64, 8)};
    for (Eigen::Index i = 0; i < a.values.size(); ++i) {
      a.values.data()[i] = rng.uniform();
      g.values.data()[i] = rng.uniform();
    }
    const double s = 0.01 + 100.0 * rng.uniform(), o = 100.0 * (rng.uniform() - 0.5);
    const RdMap a2{(a.values.array() * s + o).matrix()};
    const RdMap g2{(g.values.array() * (s + 2.0) - o).matrix()};
    const double base = eval::psnr(a, g);
    const double diff = std::max(std::abs(eval::psnr(a2, g) - base), std::abs(eval::psnr(a, g2) - base));
    worst = std::max(worst, diff / std::abs(base));
  }
  affine = worst <= 1e-9;

  return {perm && crossing && affine,
          std::string("permutation invariance over 200 trials: ") + (perm ? "yes" : "no") +
              ", crossing case optimal " + fmt(opt_cost) + " < greedy " + fmt(greedy_cost) +
              ": " + (crossing ? "yes" : "no") + ", psnr affine invariance worst relative change " +
              fmt(worst) + " (limit 1e-9)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rdnet acceptance criteria"};
  Options opt;
  std::vector<int> selected;
  app.add_option("--work", opt.work, "scratch directory for datasets and artifacts");
  app.add_option("--budget-seconds", opt.budget_seconds, "criterion 6 training wall-clock budget");
  app.add_option("criteria", selected, "criteria to run (1-9); default all")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  fs::create_directories(opt.work);

  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria = {
      {1, {"periodogram FFT equals the naive oracle", fft_oracle}},
      {2, {"on-grid exactness of periodogram peaks", on_grid_exactness}},
      {3, {"gradient suite", gradient_suite}},
      {4, {"label, loss and psnr unit values", unit_values}},
      {5, {"dataset recipe and byte-identical regeneration", [&] { return dataset_recipe(opt); }}},
      {6, {"desk-scale training", [&] { return desk_scale(opt); }}},
      {7, {"overfit smoke test", overfit}},
      {8, {"timing harness", [&] { return timing_harness(opt); }}},
      {9, {"metric properties", metric_properties}},
  };

  int failures = 0;
  for (int id : selected) {
    const auto& [title, fn] = criteria.at(id);
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    report(std::to_string(id), title, o);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
