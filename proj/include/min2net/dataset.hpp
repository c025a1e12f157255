#pragma once

// Epoched trials shared by preprocessing, persistence and the harness.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "min2net/errors.hpp"

namespace min2net {

/// Offline (calibration) or online (feedback) session plus its index.
struct SessionTag {
  bool online = false;
  std::uint8_t index = 0;

  /// Packed byte: bit 7 = online, bits 0-6 = index.
  std::uint8_t encode() const { return static_cast<std::uint8_t>((online ? 0x80u : 0u) | (index & 0x7Fu)); }
  static SessionTag decode(std::uint8_t b) { return {(b & 0x80u) != 0, static_cast<std::uint8_t>(b & 0x7Fu)}; }

  friend bool operator==(const SessionTag&, const SessionTag&) = default;
  friend auto operator<=>(const SessionTag&, const SessionTag&) = default;
};

/// Trials x channels x time samples (f32, row-major) with per-trial metadata.
struct EpochedDataset {
  std::size_t channels = 0;
  std::size_t samples = 0;
  float fs = 0.0f;
  std::vector<float> data;
  std::vector<int> labels;
  std::vector<std::uint32_t> subject_ids;
  std::vector<SessionTag> sessions;
  std::vector<std::string> channel_names;  // optional; empty or size == channels
  std::vector<std::string> class_names;    // optional; label index -> name

  std::size_t n_trials() const noexcept { return labels.size(); }
  std::size_t trial_size() const noexcept { return channels * samples; }

  std::span<float> trial(std::size_t i) { return std::span<float>(data).subspan(i * trial_size(), trial_size()); }
  std::span<const float> trial(std::size_t i) const {
    return std::span<const float>(data).subspan(i * trial_size(), trial_size());
  }

  /// Same metadata, no trials.
  EpochedDataset empty_like() const {
    EpochedDataset out;
    out.channels = channels;
    out.samples = samples;
    out.fs = fs;
    out.channel_names = channel_names;
    out.class_names = class_names;
    return out;
  }

  void append_trial(const EpochedDataset& src, std::size_t i) {
    const auto t = src.trial(i);
    data.insert(data.end(), t.begin(), t.end());
    labels.push_back(src.labels[i]);
    subject_ids.push_back(src.subject_ids[i]);
    sessions.push_back(src.sessions[i]);
  }

  EpochedDataset subset(std::span<const std::size_t> indices) const {
    EpochedDataset out = empty_like();
    out.data.reserve(indices.size() * trial_size());
    for (std::size_t i : indices) out.append_trial(*this, i);
    return out;
  }

  /// Appends every trial of `other`; geometry must match.
  void extend(const EpochedDataset& other) {
    if (other.channels != channels || other.samples != samples) {
      throw DimensionError("cannot concatenate datasets with different trial geometry");
    }
    data.insert(data.end(), other.data.begin(), other.data.end());
    labels.insert(labels.end(), other.labels.begin(), other.labels.end());
    subject_ids.insert(subject_ids.end(), other.subject_ids.begin(), other.subject_ids.end());
    sessions.insert(sessions.end(), other.sessions.begin(), other.sessions.end());
  }

  /// Throws DimensionError / ConfigError when fields disagree.
  void validate() const {
    const std::size_t n = labels.size();
    if (subject_ids.size() != n || sessions.size() != n) throw DimensionError("per-trial metadata lengths differ");
    if (data.size() != n * trial_size()) {
      throw DimensionError("data holds " + std::to_string(data.size()) + " values, expected " +
                           std::to_string(n * trial_size()));
    }
    if (!(fs > 0.0f)) throw ConfigError("sampling rate must be positive");
    if (!channel_names.empty() && channel_names.size() != channels) {
      throw DimensionError("channel name count differs from channel count");
    }
    for (int y : labels) {
      if (y < 0 || (!class_names.empty() && static_cast<std::size_t>(y) >= class_names.size())) {
        throw ConfigError("label " + std::to_string(y) + " outside the class list");
      }
    }
  }

  friend bool operator==(const EpochedDataset&, const EpochedDataset&) = default;
};

}  // namespace min2net
