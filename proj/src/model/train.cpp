#include "rdnet/model/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rdnet/common/errors.hpp"
#include "rdnet/common/key_value.hpp"
#include "rdnet/common/rng.hpp"
#include "rdnet/nn/loss.hpp"
#include "rdnet/nn/optimizer.hpp"

namespace rdnet::model {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void gather(const nn::Tensor<float>& src, std::span<const std::size_t> idx, nn::Tensor<float>& dst) {
  const std::size_t per = src.shape().per_sample();
  nn::Shape s = src.shape();
  s.n = idx.size();
  if (dst.shape() != s) dst = nn::Tensor<float>(s);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::copy_n(src.sample(idx[i]), per, dst.sample(i));
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw DomainError("train: learning rate must be positive");
  if (batch_size == 0) throw DomainError("train: batch size must be positive");
  if (max_epochs == 0) throw DomainError("train: need at least one epoch");
  if (!(max_seconds >= 0.0)) throw DomainError("train: time budget must be non-negative");
}

bool apply_train_key(TrainConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "lr") cfg.lr = parse_double(key, value);
  else if (key == "batch_size") cfg.batch_size = parse_size(key, value);
  else if (key == "max_epochs") cfg.max_epochs = parse_size(key, value);
  else if (key == "patience") cfg.patience = parse_size(key, value);
  else if (key == "seed") cfg.seed = parse_u64(key, value);
  else if (key == "max_seconds") cfg.max_seconds = parse_double(key, value);
  else return false;
  return true;
}

TensorDataset TensorDataset::from_records(std::span<const dataset::DatasetRecord> records) {
  TensorDataset out;
  if (records.empty()) return out;
  const std::size_t n = records.front().channel.rows(), m = records.front().channel.cols();
  out.inputs = nn::Tensor<float>({records.size(), 2, n, m});
  out.targets = nn::Tensor<float>({records.size(), 1, n, m});
  out.snr_db.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    load_input(records[i].channel, out.inputs, i);
    load_target(records[i].gt, out.targets, i);
    out.snr_db.push_back(records[i].snr_db);
  }
  return out;
}

std::string stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::max_epochs: return "max_epochs";
    case StopReason::patience: return "patience";
    case StopReason::time_budget: return "time_budget";
    case StopReason::requested: return "requested";
  }
  return "unknown";
}

double evaluate_loss(RdNet<float>& model, const TensorDataset& data, std::size_t batch_size) {
  if (data.size() == 0) throw DomainError("evaluate_loss: empty dataset");
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  nn::Tensor<float> x, y;
  double total = 0.0;
  std::size_t batches = 0;
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const std::size_t count = std::min(batch_size, idx.size() - start);
    const std::span<const std::size_t> sel(idx.data() + start, count);
    gather(data.inputs, sel, x);
    gather(data.targets, sel, y);
    total += nn::sse_loss(model.forward(x, nn::Mode::eval), y).value;
    ++batches;
  }
  return total / static_cast<double>(batches);
}

TrainResult train(RdNet<float>& model, const TensorDataset& train_set, const TensorDataset& val_set,
                  const TrainConfig& cfg, const EpochCallback& on_epoch,
                  const StopPredicate& stop_when) {
  cfg.validate();
  if (train_set.size() == 0 || val_set.size() == 0) {
    throw DomainError("train: training and validation sets must be non-empty");
  }
  const auto t_start = Clock::now();
  nn::Adam<float> adam(nn::AdamConfig{.lr = cfg.lr});
  const auto params = model.params();

  TrainResult result;
  nn::Checkpoint best;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  nn::Tensor<float> x, y;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto t_epoch = Clock::now();
    Rng shuffle_rng = Rng::substream(cfg.seed, 0x7472616eull, epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());

    double train_total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - start);
      const std::span<const std::size_t> sel(order.data() + start, count);
      gather(train_set.inputs, sel, x);
      gather(train_set.targets, sel, y);
      model.zero_grad();
      const auto out = model.forward(x, nn::Mode::train);
      const auto loss = nn::sse_loss(out, y);
      if (!std::isfinite(loss.value)) {
        throw TrainingDiverged("training diverged: non-finite loss at epoch " +
                               std::to_string(epoch) + ", batch " + std::to_string(batches + 1));
      }
      model.backward(loss.grad);
      adam.step(params);
      train_total += loss.value;
      ++batches;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = train_total / static_cast<double>(batches);
    stats.val_loss = evaluate_loss(model, val_set, cfg.batch_size);
    if (!std::isfinite(stats.val_loss)) {
      throw TrainingDiverged("training diverged: non-finite validation loss at epoch " +
                             std::to_string(epoch));
    }
    stats.seconds = seconds_since(t_epoch);
    result.curve.push_back(stats);
    if (on_epoch) on_epoch(stats);

    if (stats.val_loss < best_val) {
      best_val = stats.val_loss;
      best = model.to_checkpoint();
      result.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }

    if (stop_when && stop_when(stats)) {
      result.stop = StopReason::requested;
      break;
    }
    if (epoch == cfg.max_epochs) {
      result.stop = StopReason::max_epochs;
      break;
    }
    if (cfg.patience > 0 && since_best >= cfg.patience) {
      result.stop = StopReason::patience;
      break;
    }
    if (cfg.max_seconds > 0.0 && seconds_since(t_start) >= cfg.max_seconds) {
      result.stop = StopReason::time_budget;
      break;
    }
  }

  nn::restore(model, best);
  result.best_val_loss = best_val;
  result.total_seconds = seconds_since(t_start);
  return result;
}

std::string render_loss_csv(const TrainResult& result) {
  std::ostringstream os;
  os << "epoch,train_loss,val_loss\n";
  for (const auto& e : result.curve) {
    os << e.epoch << ',' << format_double(e.train_loss) << ',' << format_double(e.val_loss) << '\n';
  }
  return os.str();
}

}  // namespace rdnet::model
