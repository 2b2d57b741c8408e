#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdnet/dataset/container.hpp"
#include "rdnet/model/rdnet.hpp"
#include "rdnet/nn/tensor.hpp"

namespace rdnet::model {

struct TrainConfig {
  double lr = 8e-5;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 100;
  std::size_t patience = 15;  // epochs without validation improvement
  std::uint64_t seed = 1;
  /// Wall-clock budget in seconds; 0 disables it. Training stops after the
  /// first epoch that ends past the budget.
  double max_seconds = 0.0;

  void validate() const;
};

/// Applies one "train." key (without the prefix); returns false when unknown.
bool apply_train_key(TrainConfig& cfg, const std::string& key, const std::string& value);

/// Network inputs and targets packed as float tensors.
struct TensorDataset {
  nn::Tensor<float> inputs;   // (n, 2, N, M)
  nn::Tensor<float> targets;  // (n, 1, N, M)
  std::vector<double> snr_db;

  std::size_t size() const { return inputs.shape().n; }
  static TensorDataset from_records(std::span<const dataset::DatasetRecord> records);
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double seconds = 0.0;
};

enum class StopReason { max_epochs, patience, time_budget, requested };
std::string stop_reason_name(StopReason r);

struct TrainResult {
  std::vector<EpochStats> curve;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  double total_seconds = 0.0;
  StopReason stop = StopReason::max_epochs;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using EpochCallback = std::function<void(const EpochStats&)>;
/// Returning true ends training after the epoch just reported.
using StopPredicate = std::function<bool(const EpochStats&)>;

/// Adam on the per-batch SSE loss. The training set is reshuffled every epoch
/// from a seeded stream. On return the model holds the parameters of the
/// epoch with the lowest validation loss.
TrainResult train(RdNet<float>& model, const TensorDataset& train_set, const TensorDataset& val_set,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {},
                  const StopPredicate& stop_when = {});

/// Mean per-batch SSE loss in eval mode.
double evaluate_loss(RdNet<float>& model, const TensorDataset& data, std::size_t batch_size);

/// "epoch,train_loss,val_loss" followed by one row per epoch. Epoch
/// durations are left out so the file is reproducible.
std::string render_loss_csv(const TrainResult& result);

}  // namespace rdnet::model
