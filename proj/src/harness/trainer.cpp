#include "min2net/harness/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "min2net/model/losses.hpp"
#include "min2net/nncore/adam.hpp"

namespace min2net::harness {

void TrainConfig::validate() const {
  if (!(lr_start > 0)) throw ConfigError("train.lr_start must be positive");
  if (!(lr_floor > 0)) throw ConfigError("train.lr_floor must be positive");
  if (lr_floor > lr_start) throw ConfigError("train.lr_floor must not exceed train.lr_start");
  if (!(lr_decay > 0 && lr_decay < 1)) throw ConfigError("train.lr_decay must lie in (0, 1)");
  if (plateau_patience < 1) throw ConfigError("train.plateau_patience must be >= 1");
  if (earlystop_patience < 1) throw ConfigError("train.earlystop_patience must be >= 1");
  if (!(min_delta >= 0)) throw ConfigError("train.min_delta must be >= 0");
  if (batch_size < 3) throw ConfigError("train.batch_size must be >= 3 to hold a triplet");
  if (max_epochs < 1) throw ConfigError("train.max_epochs must be >= 1");
  for (const auto* b : {&beta_mse, &beta_triplet, &beta_ce}) {
    if (*b && !(**b >= 0)) throw ConfigError("train loss weights must be >= 0");
  }
  if (margin && !(*margin >= 0)) throw ConfigError("train.margin must be >= 0");
}

TrainConfig TrainConfig::defaults(bool independent, std::size_t n_classes) {
  TrainConfig c;
  if (n_classes >= 3) {
    c.lr_start = 1e-4;
    c.lr_floor = 1e-5;
  }
  c.batch_size = independent ? 100 : 10;
  return c;
}

void TrainConfig::apply_overrides(model::Min2NetConfig& cfg) const {
  if (beta_mse) cfg.beta_mse = *beta_mse;
  if (beta_triplet) cfg.beta_triplet = *beta_triplet;
  if (beta_ce) cfg.beta_ce = *beta_ce;
  if (margin) cfg.margin = *margin;
}

PlateauSchedule::PlateauSchedule(const TrainConfig& config)
    : config_(config), lr_(config.lr_start), best_(std::numeric_limits<double>::infinity()) {}

PlateauSchedule::Step PlateauSchedule::observe(double val_loss) {
  ++epoch_;
  Step s;
  if (val_loss - config_.min_delta < best_) {
    best_ = val_loss;
    best_epoch_ = epoch_;
    plateau_wait_ = 0;
    stop_wait_ = 0;
    s.improved = true;
    return s;
  }
  ++plateau_wait_;
  ++stop_wait_;
  // Mirrors the common reduce-on-plateau callback: the counter only resets
  // when the rate actually changes.
  if (plateau_wait_ >= config_.plateau_patience && lr_ > config_.lr_floor) {
    lr_ = std::max(lr_ * config_.lr_decay, config_.lr_floor);
    plateau_wait_ = 0;
    s.lr_reduced = true;
  }
  s.stop = stop_wait_ >= config_.earlystop_patience;
  return s;
}

std::vector<std::vector<std::size_t>> stratified_batches(std::span<const int> labels, std::size_t batch_size,
                                                          std::mt19937_64* rng) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  // Position of each member along [0, 1) of its class; merging by position
  // spreads every class evenly over the sequence.
  struct Keyed {
    double key;
    int label;
    std::size_t index;
  };
  std::vector<Keyed> order;
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  for (auto& [label, members] : by_class) {
    if (rng) std::shuffle(members.begin(), members.end(), *rng);
    const double offset = rng ? jitter(*rng) : 0.5;
    for (std::size_t r = 0; r < members.size(); ++r) {
      order.push_back({(static_cast<double>(r) + offset) / static_cast<double>(members.size()), label, members[r]});
    }
  }
  std::sort(order.begin(), order.end(), [](const Keyed& a, const Keyed& b) {
    return a.key != b.key ? a.key < b.key : a.label < b.label;
  });

  std::vector<std::vector<std::size_t>> batches;
  std::vector<std::size_t> cur;
  std::vector<int> cur_labels;
  for (const auto& k : order) {
    cur.push_back(k.index);
    cur_labels.push_back(k.label);
    if (cur.size() >= batch_size && model::has_valid_triplet(cur_labels)) {
      batches.push_back(std::move(cur));
      cur.clear();
      cur_labels.clear();
    }
  }
  if (!cur.empty()) {
    if (model::has_valid_triplet(cur_labels) && (cur.size() >= batch_size / 2 || batches.empty())) {
      batches.push_back(std::move(cur));
    } else if (!batches.empty()) {
      batches.back().insert(batches.back().end(), cur.begin(), cur.end());
    } else {
      throw BatchCompositionError("a set of " + std::to_string(labels.size()) +
                                  " trials cannot form a single anchor/positive/negative triplet");
    }
  }
  if (rng) std::shuffle(batches.begin(), batches.end(), *rng);
  return batches;
}

nn::BasicTensor<float> gather_input(const EpochedDataset& ds, std::span<const std::size_t> indices) {
  const std::size_t C = ds.channels, T = ds.samples;
  nn::BasicTensor<float> x({indices.size(), 1, T, C});
  float* out = x.data();
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const auto trial = ds.trial(indices[b]);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t t = 0; t < T; ++t) out[(b * T + t) * C + c] = trial[c * T + t];
    }
  }
  return x;
}

std::vector<int> gather_labels(const EpochedDataset& ds, std::span<const std::size_t> indices) {
  std::vector<int> y;
  y.reserve(indices.size());
  for (std::size_t i : indices) y.push_back(ds.labels[i]);
  return y;
}

model::LossBreakdown evaluate_losses(model::Min2NetParams<float>& params, const EpochedDataset& ds,
                                     std::size_t batch_size) {
  model::LossBreakdown sum;
  if (ds.n_trials() == 0) return sum;
  std::vector<std::vector<std::size_t>> chunks;
  if (model::has_valid_triplet(ds.labels)) {
    chunks = stratified_batches(ds.labels, batch_size, nullptr);
  } else {
    chunks.emplace_back(ds.n_trials());
    for (std::size_t i = 0; i < ds.n_trials(); ++i) chunks[0][i] = i;
  }
  const auto& cfg = params.config;
  double n = 0;
  for (const auto& idx : chunks) {
    const auto x = gather_input(ds, idx);
    const auto y = gather_labels(ds, idx);
    const auto z = model::encode(params, x, nn::Mode::Infer);
    const double w = static_cast<double>(idx.size());
    const double mse = model::mse_loss(x, model::decode(params, z), cfg.mse_elementwise).value;
    const double ce = model::cross_entropy_loss<float>(y, model::classify(params, z)).value;
    double trip = 0.0;
    if (cfg.beta_triplet > 0 && model::has_valid_triplet(y)) trip = model::triplet_semihard_loss(z, y, cfg.margin).value;
    sum.mse += w * mse;
    sum.ce += w * ce;
    sum.triplet += w * trip;
    n += w;
  }
  sum.mse /= n;
  sum.ce /= n;
  sum.triplet /= n;
  sum.total = model::total_loss(sum.mse, sum.triplet, sum.ce, cfg);
  return sum;
}

TrainOutcome train(model::Min2NetParams<float> params, const EpochedDataset& train_set, const EpochedDataset& val_set,
                   const TrainConfig& config) {
  config.validate();
  if (train_set.channels != params.config.channels || train_set.samples != params.config.samples) {
    throw ConfigError("training data has " + std::to_string(train_set.channels) + "x" +
                      std::to_string(train_set.samples) + " trials, the model expects " +
                      std::to_string(params.config.channels) + "x" + std::to_string(params.config.samples));
  }
  if (val_set.n_trials() == 0) throw ConfigError("validation set is empty");
  config.apply_overrides(params.config);

  std::mt19937_64 rng(config.seed);
  nn::AdamState<float> adam(nn::AdamOptions{config.lr_start});
  PlateauSchedule schedule(config);
  TrainHistory history;
  model::Min2NetParams<float> best = params;
  model::Min2NetParams<float> last_finite = params;
  auto ps = params.parameters();

  auto abort = [&](const std::string& what) {
    throw TrainingAborted(what, last_finite, history);
  };

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = schedule.learning_rate();
    adam.set_learning_rate(rec.lr);

    const auto batches = stratified_batches(train_set.labels, config.batch_size, &rng);
    double seen = 0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const auto& idx = batches[bi];
      const auto x = gather_input(train_set, idx);
      const auto y = gather_labels(train_set, idx);
      params.zero_grad();
      const auto lb = model::forward_losses(params, x, y, nn::Mode::Train, true);
      if (!std::isfinite(lb.total)) {
        abort("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(bi + 1));
      }
      try {
        adam.step(ps);
      } catch (const NumericError& e) {
        abort(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", batch " + std::to_string(bi + 1));
      }
      const double w = static_cast<double>(idx.size());
      rec.train.mse += w * lb.mse;
      rec.train.triplet += w * lb.triplet;
      rec.train.ce += w * lb.ce;
      rec.train.total += w * lb.total;
      seen += w;
    }
    rec.train.mse /= seen;
    rec.train.triplet /= seen;
    rec.train.ce /= seen;
    rec.train.total /= seen;

    rec.val = evaluate_losses(params, val_set, config.batch_size);
    if (!std::isfinite(rec.val.total)) abort("non-finite validation loss at epoch " + std::to_string(epoch));
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    history.epochs.push_back(rec);
    last_finite = params;

    const auto step = schedule.observe(rec.val.total);
    if (step.improved) best = params;
    if (step.stop) {
      history.early_stopped = true;
      break;
    }
  }
  history.best_epoch = schedule.best_epoch();
  return {std::move(best), std::move(history)};
}

}  // namespace min2net::harness
