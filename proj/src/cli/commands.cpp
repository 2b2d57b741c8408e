#include "rdnet/cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include "rdnet/cli/map_file.hpp"
#include "rdnet/common/errors.hpp"
#include "rdnet/common/key_value.hpp"
#include "rdnet/eval/evaluate.hpp"
#include "rdnet/nn/checkpoint.hpp"

namespace rdnet::cli {

namespace fs = std::filesystem;

namespace {

fs::path temp_sibling(const fs::path& path) {
  return path.parent_path() / (path.filename().string() + ".tmp");
}

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void commit(const fs::path& tmp, const fs::path& path) {
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void write_manifest(const RunConfig& cfg, const std::string& command, const std::string& extra) {
  ensure_dir(cfg.out_dir);
  std::string text = "# rdnet " + command + "\ncommand=" + command + "\n" + extra;
  text += "# configuration\n" + cfg.render();
  write_text_atomic(cfg.out_dir / ("manifest_" + command + ".txt"), text);
}

std::vector<dataset::DatasetRecord> load_split(const RunConfig& cfg, dataset::Split split) {
  const fs::path path = split_path(cfg, split);
  if (!fs::exists(path)) throw IoError("dataset split not found: " + path.string());
  return dataset::read_dataset(path);
}

void check_dims(const RunConfig& cfg, const std::vector<dataset::DatasetRecord>& records,
                const std::string& what) {
  for (const auto& r : records) {
    if (r.channel.rows() != cfg.data.radar.n_subcarriers ||
        r.channel.cols() != cfg.data.radar.n_symbols) {
      throw DomainError(what + " records are " + std::to_string(r.channel.rows()) + "x" +
                        std::to_string(r.channel.cols()) + ", configuration expects " +
                        std::to_string(cfg.data.radar.n_subcarriers) + "x" +
                        std::to_string(cfg.data.radar.n_symbols));
    }
  }
}

model::RdNet<float> load_model(const RunConfig& cfg) {
  if (!fs::exists(cfg.checkpoint)) throw IoError("checkpoint not found: " + cfg.checkpoint.string());
  return model::RdNet<float>::from_checkpoint(nn::read_checkpoint(cfg.checkpoint));
}

void save_checkpoint(model::RdNet<float>& net, const fs::path& path) {
  ensure_dir(path.parent_path());
  const fs::path tmp = temp_sibling(path);
  nn::write_checkpoint(tmp, net.to_checkpoint());
  commit(tmp, path);
}

std::unique_ptr<eval::Estimator> make_estimator(const std::string& name,
                                                std::unique_ptr<model::RdNet<float>>& net,
                                                const RunConfig& cfg) {
  if (name == "gt") return std::make_unique<eval::GroundTruthEstimator>();
  if (name == "periodogram") return std::make_unique<eval::PeriodogramEstimator>();
  if (name == "cnn") {
    if (!net) net = std::make_unique<model::RdNet<float>>(load_model(cfg));
    return std::make_unique<eval::CnnEstimator>(*net, cfg.train.batch_size);
  }
  throw DomainError("unknown estimator '" + name + "' (expected cnn, periodogram or gt)");
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

struct Trained {
  model::TrainResult result;
};

Trained run_training(const RunConfig& cfg, model::RdNet<float>& net, std::ostream& out) {
  const auto train_records = load_split(cfg, dataset::Split::train);
  const auto val_records = load_split(cfg, dataset::Split::val);
  check_dims(cfg, train_records, "training");
  check_dims(cfg, val_records, "validation");
  const auto train_set = model::TensorDataset::from_records(train_records);
  const auto val_set = model::TensorDataset::from_records(val_records);
  if (cfg.verbosity > 0) {
    out << "training on " << train_set.size() << " records, validating on " << val_set.size()
        << " (" << net.parameter_count() << " parameters)\n";
  }
  auto result = model::train(net, train_set, val_set, cfg.train, [&](const model::EpochStats& e) {
    if (cfg.verbosity > 0) {
      out << "epoch " << e.epoch << "  train_loss " << format_double(e.train_loss) << "  val_loss "
          << format_double(e.val_loss) << "  (" << fixed(e.seconds, 1) << " s)\n"
          << std::flush;
    }
  });
  return {std::move(result)};
}

}  // namespace

dataset::Split parse_split(const std::string& name) {
  if (name == "train") return dataset::Split::train;
  if (name == "val") return dataset::Split::val;
  if (name == "test") return dataset::Split::test;
  throw DomainError("unknown split '" + name + "' (expected train, val or test)");
}

fs::path split_path(const RunConfig& cfg, dataset::Split split) {
  return cfg.dataset_dir / (std::string(dataset::split_name(split)) + ".rdds");
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  ensure_dir(path.parent_path());
  const fs::path tmp = temp_sibling(path);
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw IoError("cannot create " + tmp.string());
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    f.flush();
    if (!f) throw IoError("failed writing " + tmp.string());
  }
  commit(tmp, path);
}

int cmd_gen(const RunConfig& cfg, std::ostream& out) {
  const auto summary = dataset::generate_dataset(cfg.data, cfg.dataset_dir);
  out << "wrote " << summary.total_records << " records to " << cfg.dataset_dir.string() << "\n";
  for (const auto& [split, n] : summary.records_per_split) {
    out << "  " << std::left << std::setw(6) << dataset::split_name(split) << n << "\n";
  }
  out << "records per SNR level:\n";
  for (const auto& [snr, n] : summary.records_per_snr) {
    out << "  " << std::right << std::setw(6) << dataset::format_snr(snr) << " dB  " << n << "\n";
  }
  return 0;
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  model::RdNet<float> net(cfg.model);
  const auto trained = run_training(cfg, net, out);
  const auto& r = trained.result;
  save_checkpoint(net, cfg.checkpoint);
  write_text_atomic(cfg.out_dir / "loss.csv", model::render_loss_csv(r));

  std::ostringstream timing;
  timing << "training_seconds=" << format_double(r.total_seconds) << '\n'
         << "epochs=" << r.curve.size() << '\n'
         << "seconds_per_epoch="
         << format_double(r.total_seconds / static_cast<double>(r.curve.size())) << '\n';
  write_text_atomic(cfg.out_dir / "train_timing.txt", timing.str());

  std::ostringstream extra;
  extra << "checkpoint=" << cfg.checkpoint.string() << '\n'
        << "epochs_run=" << r.curve.size() << '\n'
        << "best_epoch=" << r.best_epoch << '\n'
        << "best_val_loss=" << format_double(r.best_val_loss) << '\n'
        << "stop_reason=" << model::stop_reason_name(r.stop) << '\n';
  write_manifest(cfg, "train", extra.str());
  out << "best epoch " << r.best_epoch << " (val_loss " << format_double(r.best_val_loss)
      << "), stopped by " << model::stop_reason_name(r.stop) << "; checkpoint "
      << cfg.checkpoint.string() << "\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg, const EvalRequest& req, std::ostream& out) {
  if (req.estimators.empty()) throw DomainError("eval: no estimator requested");
  const auto records = load_split(cfg, req.split);
  check_dims(cfg, records, "evaluation");
  std::unique_ptr<model::RdNet<float>> net;
  std::ostringstream extra;
  extra << "split=" << dataset::split_name(req.split) << '\n' << "records=" << records.size() << '\n';
  for (const auto& name : req.estimators) {
    auto est = make_estimator(name, net, cfg);
    const auto result = eval::evaluate(*est, records, cfg.data.grid);
    write_text_atomic(cfg.out_dir / ("metrics_" + name + ".csv"),
                      eval::render_results_csv(result.rows, false));
    std::ostringstream timing;
    timing << "estimator=" << name << '\n'
           << "records=" << result.records << '\n'
           << "total_predict_seconds=" << format_double(result.total_predict_seconds) << '\n'
           << "mean_predict_seconds="
           << format_double(result.rows.empty() ? 0.0 : result.rows.front().mean_predict_time)
           << '\n';
    write_text_atomic(cfg.out_dir / ("timing_" + name + ".txt"), timing.str());
    extra << "estimator." << name << ".failures=" << result.failures.size() << '\n'
          << "estimator." << name << ".flagged=" << result.flagged << '\n';
    if (name == "cnn") extra << "checkpoint=" << cfg.checkpoint.string() << '\n';

    out << name << " on " << dataset::split_name(req.split) << " (" << result.records
        << " records, " << fixed(result.total_predict_seconds, 3) << " s prediction):\n"
        << eval::render_results_csv(result.rows, true);
    for (const auto& f : result.failures) {
      out << "  record " << f.record_index << " failed: " << f.message << "\n";
    }
  }
  write_manifest(cfg, "eval", extra.str());
  return 0;
}

int cmd_predict(const RunConfig& cfg, const PredictRequest& req, std::ostream& out) {
  const auto records = load_split(cfg, req.split);
  if (req.index >= records.size()) {
    throw DomainError("record index " + std::to_string(req.index) + " out of range (split has " +
                      std::to_string(records.size()) + " records)");
  }
  const auto& rec = records[req.index];
  RdMap map;
  if (req.estimator == "cnn") {
    auto net = load_model(cfg);
    const sim::ChannelEstimate& h = rec.channel;
    const std::span<const sim::ChannelEstimate> one(&h, 1);
    map = std::move((req.raw ? model::predict_raw(net, one) : model::predict(net, one)).front());
  } else if (req.estimator == "periodogram") {
    map = baseline::periodogram_2d(rec.channel);
  } else if (req.estimator == "gt") {
    map = rec.gt;
  } else {
    throw DomainError("unknown estimator '" + req.estimator + "'");
  }
  fs::path path = req.output;
  if (path.empty()) {
    path = cfg.out_dir / (std::string(dataset::split_name(req.split)) + "_" +
                          std::to_string(req.index) + "_" + req.estimator + ".rdmp");
  }
  ensure_dir(path.parent_path());
  const fs::path tmp = temp_sibling(path);
  write_map_file(tmp, map);
  commit(tmp, path);
  out << "wrote " << map.rows() << "x" << map.cols() << " map to " << path.string() << " (snr "
      << dataset::format_snr(rec.snr_db) << " dB, scene " << rec.scene_id << ")\n";
  return 0;
}

int cmd_render(const fs::path& map_file, const fs::path& image, std::ostream& out) {
  const RdMap map = read_map_file(map_file);
  ensure_dir(image.parent_path());
  const fs::path tmp = temp_sibling(image);
  write_pgm(tmp, map);
  commit(tmp, image);
  out << "wrote " << image.string() << "\n";
  return 0;
}

std::string render_bench_table(const std::vector<BenchRow>& rows) {
  auto cell = [](double v) { return v < 0.0 ? std::string("-") : fixed(v, 3); };
  std::ostringstream os;
  os << std::left << std::setw(12) << "Model" << " | " << std::setw(17) << "Training time (s)"
     << " | " << std::setw(14) << "Time/epoch (s)" << " | " << "Prediction time (s)\n";
  os << std::string(12, '-') << "-+-" << std::string(17, '-') << "-+-" << std::string(14, '-')
     << "-+-" << std::string(19, '-') << "\n";
  for (const auto& r : rows) {
    os << std::left << std::setw(12) << r.model << " | " << std::setw(17) << cell(r.training_seconds)
       << " | " << std::setw(14) << cell(r.seconds_per_epoch) << " | "
       << cell(r.prediction_seconds) << "\n";
  }
  for (const auto& r : rows) {
    if (r.records == 0) continue;
    os << r.model << ": " << r.records << " records, "
       << fixed(1e3 * r.prediction_seconds / static_cast<double>(r.records), 3)
       << " ms per record\n";
  }
  return os.str();
}

int cmd_bench(const RunConfig& cfg, std::ostream& out) {
  model::RdNet<float> net(cfg.model);
  const auto trained = run_training(cfg, net, out);
  const auto& r = trained.result;
  save_checkpoint(net, cfg.out_dir / "bench.rdck");

  const auto test = load_split(cfg, dataset::Split::test);
  check_dims(cfg, test, "test");
  eval::CnnEstimator cnn(net, cfg.train.batch_size);
  eval::PeriodogramEstimator per;
  const auto cnn_eval = eval::evaluate(cnn, test, cfg.data.grid);
  const auto per_eval = eval::evaluate(per, test, cfg.data.grid);

  std::vector<BenchRow> rows;
  rows.push_back({"CNN", r.total_seconds, r.total_seconds / static_cast<double>(r.curve.size()),
                  cnn_eval.total_predict_seconds, cnn_eval.records});
  rows.push_back({"Periodogram", -1.0, -1.0, per_eval.total_predict_seconds, per_eval.records});
  const std::string table = render_bench_table(rows);
  write_text_atomic(cfg.out_dir / "bench.txt", table);
  std::ostringstream extra;
  extra << "epochs_run=" << r.curve.size() << '\n' << "test_records=" << test.size() << '\n';
  write_manifest(cfg, "bench", extra.str());
  out << table;
  return 0;
}

}  // namespace rdnet::cli
