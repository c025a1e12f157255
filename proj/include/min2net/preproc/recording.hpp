#pragma once

// Continuous recordings in the canonical raw layout ("MIRW"), as written by
// the archive converter: one binary per subject session plus manifest.json.
//
// MIRW v1, little-endian:
//   "MIRW" | u32 version | u32 n_channels | u32 n_samples | u32 n_events
//   f32 fs | u32 subject | u8 session kind (0 offline, 1 online) | u8 session index
//   n_channels x (u16 byte length, UTF-8 name)
//   n_events x (u32 onset sample, i32 code)
//   n_channels x n_samples f32 (channel-major, microvolts)
//   u32 CRC32 of all preceding bytes

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "min2net/dataset.hpp"

namespace min2net::preproc {

inline constexpr std::uint32_t kRawVersion = 1;

struct Event {
  std::uint32_t onset = 0;  // sample index
  std::int32_t code = 0;
  friend bool operator==(const Event&, const Event&) = default;
};

struct RawRecording {
  double fs = 0.0;
  std::vector<std::string> channel_names;
  std::size_t n_samples = 0;
  std::vector<double> samples;  // channel-major: samples[c * n_samples + t]
  std::vector<Event> events;
  std::uint32_t subject = 0;
  SessionTag session;

  std::size_t n_channels() const noexcept { return channel_names.size(); }
  std::span<const double> channel(std::size_t c) const {
    return std::span<const double>(samples).subspan(c * n_samples, n_samples);
  }
  std::span<double> channel(std::size_t c) { return std::span<double>(samples).subspan(c * n_samples, n_samples); }

  /// Throws DimensionError / ConfigError on inconsistent fields or events
  /// outside the recording.
  void validate() const;
};

/// Rows reordered to `wanted`; throws ConfigError listing every missing name.
RawRecording select_channels(const RawRecording& rec, const std::vector<std::string>& wanted);

void write_raw(const RawRecording& rec, const std::filesystem::path& path);
/// Throws IoError, or IntegrityError on bad magic/version/CRC/truncation.
RawRecording read_raw(const std::filesystem::path& path);

/// Event code -> class name; the list order defines label indices.
struct ClassCode {
  std::string name;
  std::int32_t code = 0;
  friend bool operator==(const ClassCode&, const ClassCode&) = default;
};

struct RawEntry {
  std::string file;  // relative to the manifest directory
  std::uint32_t subject = 0;
  SessionTag session;
  std::string crc32;  // lowercase hex of the file's trailing CRC
  friend bool operator==(const RawEntry&, const RawEntry&) = default;
};

struct RawManifest {
  std::string dataset;
  std::vector<ClassCode> classes;
  std::vector<RawEntry> recordings;
  std::vector<std::uint32_t> absent_subjects;
  friend bool operator==(const RawManifest&, const RawManifest&) = default;
};

void write_raw_manifest(const RawManifest& manifest, const std::filesystem::path& dir);
RawManifest read_raw_manifest(const std::filesystem::path& dir);

/// Writes `rec` into `dir` and returns its manifest entry.
RawEntry add_raw_recording(const RawRecording& rec, const std::filesystem::path& dir, const std::string& file_name);

/// Reads a recording listed in the manifest and checks its recorded CRC.
RawRecording load_raw_entry(const RawEntry& entry, const std::filesystem::path& dir);

}  // namespace min2net::preproc
