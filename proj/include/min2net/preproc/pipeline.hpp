#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "min2net/dataset.hpp"
#include "min2net/preproc/filter.hpp"
#include "min2net/preproc/recording.hpp"

namespace min2net::preproc {

/// Seconds relative to each event onset, [start, end).
struct EpochWindow {
  double start_s = 0.0;
  double end_s = 4.0;
  friend bool operator==(const EpochWindow&, const EpochWindow&) = default;
};

/// Cuts one trial of round((end - start) * fs) samples per event whose code
/// is in `class_map`, in recording order. Throws ConfigError naming the event
/// when a window leaves the recording.
EpochedDataset epoch(const RawRecording& rec, const EpochWindow& window, const std::map<std::int32_t, int>& class_map);

struct PipelineSpec {
  FilterSpec band;  // `band.fs` is replaced by each recording's native rate
  double target_fs = 100.0;
  std::vector<std::string> channels;  // empty keeps every channel
  EpochWindow window;
  std::optional<EpochWindow> rest_window;  // adds a "rest" class cut from the same events
  bool standardize = false;                // per-trial, per-channel z-score

  void validate() const;
};

/// select channels -> band-pass filtfilt at the native rate -> resample -> epoch.
EpochedDataset preprocess_pipeline(const RawRecording& rec, const PipelineSpec& spec,
                                   const std::vector<ClassCode>& classes);

/// Runs the pipeline on every recording of a raw directory, in manifest order.
EpochedDataset preprocess_directory(const std::filesystem::path& raw_dir, const PipelineSpec& spec,
                                    const std::function<void(const RawEntry&, std::size_t trials)>& progress = {});

}  // namespace min2net::preproc
