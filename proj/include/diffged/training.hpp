#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "diffged/checkpoint.hpp"
#include "diffged/dataset.hpp"
#include "json.hpp"

namespace diffged {

struct TrainConfig {
  int epochs = 200;
  int batch_size = 128;
  double learning_rate = 1e-3;
  double weight_decay = 5e-4;
  ScheduleSpec schedule;
  std::uint64_t seed = 0;
  /// Network shape; vocab_size is taken from the training data.
  DenoiserConfig model;
  AdamOptions adam;
  /// Validate every this many epochs (and after the last one).
  int val_every = 1;
  int val_k = 4;
  int val_steps = 10;
  /// Threads for gradient computation; 0 picks the hardware concurrency.
  std::size_t workers = 0;

  void validate() const;
};

/// Every field is optional and keeps its default when absent; unknown keys
/// are rejected. Keys: epochs, batch_size, learning_rate, weight_decay, T,
/// beta_start, beta_end, seed, layer_dims, val_every, val_k, val_steps,
/// workers.
TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json train_config_to_json(const TrainConfig& config);
TrainConfig load_train_config(const std::filesystem::path& path);

/// One optimizer update on a batch. For every item a time step
/// t ~ Uniform{1..T} and a noisy state M^t are drawn from a stream derived
/// from one draw of `rng` and the item's position, so the outcome does not
/// depend on thread count. Gradients are averaged over the batch and summed
/// in a fixed order. Returns the mean loss; throws Error on a non-finite loss
/// or a pair without a ground-truth mapping.
double train_step(DenoiserParams<double>& params, OptimizerState& optimizer, std::span<const GraphPair> batch,
                  const NoiseSchedule& schedule, Rng& rng, double learning_rate, double weight_decay,
                  std::size_t workers = 0);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_accuracy;
  std::optional<double> val_mae;
  bool operator==(const EpochRecord&) const = default;
};

struct TrainResult {
  /// Checkpoint with the best validation accuracy (the last one without a
  /// validation set).
  Checkpoint best;
  Checkpoint last;
  int best_epoch = 0;
  /// Mean loss of the very first batch, before any update.
  double initial_loss = 0.0;
  std::vector<EpochRecord> curve;
};

/// Shuffles the training pairs each epoch and runs train_step over batches.
/// With epochs = 0 the returned parameters are the seeded initialization.
/// Throws ValidationError for an empty training set.
TrainResult train(const Dataset& training, const std::vector<GraphPair>& validation, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// CSV with header epoch,train_loss,val_accuracy,val_mae.
void write_loss_curve(const std::vector<EpochRecord>& curve, const std::filesystem::path& path);

}  // namespace diffged
