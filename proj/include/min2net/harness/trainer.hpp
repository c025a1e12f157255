#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "min2net/dataset.hpp"
#include "min2net/errors.hpp"
#include "min2net/model/network.hpp"

namespace min2net::harness {

struct TrainConfig {
  double lr_start = 1e-3;
  double lr_floor = 1e-4;
  double lr_decay = 0.5;
  int plateau_patience = 5;
  int earlystop_patience = 20;
  double min_delta = 0.0;
  std::size_t batch_size = 10;
  int max_epochs = 200;
  std::uint64_t seed = 0;
  // Applied on top of the model config when set.
  std::optional<double> beta_mse, beta_triplet, beta_ce, margin;

  /// Throws ConfigError naming the field.
  void validate() const;

  /// Learning-rate range per task: [1e-3, 1e-4] for two classes, [1e-4, 1e-5]
  /// for three; batch size 10 subject-dependent, 100 subject-independent.
  static TrainConfig defaults(bool independent, std::size_t n_classes);

  void apply_overrides(model::Min2NetConfig& cfg) const;
};

/// Reduce-on-plateau plus early stopping, both driven by validation loss.
class PlateauSchedule {
 public:
  explicit PlateauSchedule(const TrainConfig& config);

  struct Step {
    bool improved = false;
    bool lr_reduced = false;
    bool stop = false;
  };

  /// Feed the validation loss of the epoch that just ran. A reduction takes
  /// effect from the next epoch.
  Step observe(double val_loss);

  double learning_rate() const noexcept { return lr_; }
  double best() const noexcept { return best_; }
  int best_epoch() const noexcept { return best_epoch_; }
  int epochs_seen() const noexcept { return epoch_; }

 private:
  TrainConfig config_;
  double lr_;
  double best_;
  int best_epoch_ = 0;
  int epoch_ = 0;
  int plateau_wait_ = 0;
  int stop_wait_ = 0;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  model::LossBreakdown train;
  model::LossBreakdown val;
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  bool early_stopped = false;
};

/// Batches of trial indices in which every batch supports triplet mining
/// (some class appears twice and another class once). Classes are
/// interleaved in proportion; a batch that falls short is merged into its
/// neighbour. With `rng`, classes and batch order are shuffled.
std::vector<std::vector<std::size_t>> stratified_batches(std::span<const int> labels, std::size_t batch_size,
                                                          std::mt19937_64* rng);

/// Channels-last network input [B, 1, T, C] from the listed trials.
nn::BasicTensor<float> gather_input(const EpochedDataset& ds, std::span<const std::size_t> indices);
std::vector<int> gather_labels(const EpochedDataset& ds, std::span<const std::size_t> indices);

/// Infer-mode losses over a whole set, evaluated in stratified chunks and
/// weighted by chunk size. Chunks without a valid triplet contribute zero
/// triplet loss.
model::LossBreakdown evaluate_losses(model::Min2NetParams<float>& params, const EpochedDataset& ds,
                                     std::size_t batch_size);

struct TrainOutcome {
  model::Min2NetParams<float> params;  // best-validation epoch
  TrainHistory history;
};

/// Raised on a non-finite loss or gradient; carries the parameters at the end
/// of the last finite epoch and the history so far.
class TrainingAborted : public NumericError {
 public:
  TrainingAborted(const std::string& what, model::Min2NetParams<float> last_finite, TrainHistory history)
      : NumericError(what), last_finite(std::move(last_finite)), history(std::move(history)) {}
  model::Min2NetParams<float> last_finite;
  TrainHistory history;
};

TrainOutcome train(model::Min2NetParams<float> params, const EpochedDataset& train_set, const EpochedDataset& val_set,
                   const TrainConfig& config);

}  // namespace min2net::harness
