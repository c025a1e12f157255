#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "min2net/dataio/augment.hpp"
#include "min2net/dataset.hpp"
#include "min2net/harness/metrics.hpp"
#include "min2net/harness/trainer.hpp"
#include "min2net/model/config.hpp"

namespace min2net::harness {

enum class Scheme { Dependent, Independent };

std::string to_string(Scheme s);
/// Accepts "dependent" or "independent"; throws ConfigError otherwise.
Scheme parse_scheme(const std::string& text);

/// Mixes a base seed with two coordinates (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b);

struct ExperimentOptions {
  Scheme scheme = Scheme::Independent;
  TrainConfig train;
  // Channels, samples and classes are taken from the data; latent 0 means the default width.
  model::Min2NetConfig model;
  std::size_t inner_folds = 5;
  dataio::AugmentSpec augment;          // applied once to each inner training split
  std::optional<bool> balance_rest;     // default: on when a class is named "rest"
  std::size_t jobs = 1;
  std::filesystem::path out_dir;        // results, histories and checkpoints; empty writes nothing
  bool save_checkpoints = true;
  std::function<void(const std::string&)> log;
};

struct FoldResult {
  std::uint32_t subject = 0;
  std::size_t fold = 0;
  bool ok = false;
  std::string error;
  Metrics metrics;
  int epochs_run = 0;
  int best_epoch = 0;
  bool early_stopped = false;
  TrainHistory history;
  // Trial indices into the experiment's dataset (after rest balancing).
  std::vector<std::size_t> train_idx, val_idx, test_idx;
};

struct Summary {
  double mean = 0.0;
  double sd_folds = 0.0;     // population SD over every (subject, fold) row
  double sd_subjects = 0.0;  // population SD over per-subject means
  std::size_t n = 0;
};

struct ExperimentResult {
  Scheme scheme = Scheme::Independent;
  std::vector<std::string> class_names;
  std::vector<FoldResult> folds;
  Summary accuracy;
  Summary macro_f1;
  std::size_t failed = 0;
};

/// Aggregates a metric over the successful rows.
Summary summarize(const std::vector<FoldResult>& folds, double Metrics::*field);

/// Subject-dependent: per subject, the designated test session is held out
/// and its remaining trials go through stratified inner folds. Subject-
/// independent: leave one subject out, inner folds over the pooled others.
/// Per-fold training failures become failed rows; the run continues.
ExperimentResult run_experiment(const EpochedDataset& ds, const ExperimentOptions& options);
ExperimentResult run_experiment(const std::filesystem::path& data_dir, const ExperimentOptions& options);

/// Output file names inside the results directory.
std::filesystem::path history_path(const std::filesystem::path& dir, std::uint32_t subject, std::size_t fold);
std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::uint32_t subject, std::size_t fold);

void write_results_csv(const ExperimentResult& result, const std::filesystem::path& path);
void write_results_json(const ExperimentResult& result, const std::filesystem::path& path);
void write_history_csv(const TrainHistory& history, const std::filesystem::path& path);

/// Mean ± SD table for the console.
std::string format_summary(const ExperimentResult& result);

/// One row per trial: subject, trial, label, z1..zN from infer-mode encoding.
void export_latents(model::Min2NetParams<float>& params, const EpochedDataset& ds, const std::filesystem::path& path);

}  // namespace min2net::harness
