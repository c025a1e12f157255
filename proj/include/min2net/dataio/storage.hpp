#pragma once

// Canonical epoched dataset: a directory with manifest.json and one "MIEG"
// binary per subject.
//
// MIEG v1, little-endian:
//   "MIEG" | u32 version | u32 n_trials | u32 n_channels | u32 n_samples | f32 fs
//   n_trials x u8 label | n_trials x u8 session tag (bit 7 online, bits 0-6 index)
//   n_trials x n_channels x n_samples f32 (trial-major, channel, time)
//   u32 CRC32 of all preceding bytes

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "min2net/dataset.hpp"

namespace min2net::dataio {

inline constexpr std::uint32_t kDatasetVersion = 1;

struct SubjectEntry {
  std::uint32_t id = 0;
  std::string file;
  std::size_t trials = 0;
  std::vector<SessionTag> sessions;  // distinct tags in first-seen order
  std::string crc32;
  friend bool operator==(const SubjectEntry&, const SubjectEntry&) = default;
};

/// Run of consecutive trials from one subject, in dataset order.
struct Segment {
  std::uint32_t subject = 0;
  std::size_t trials = 0;
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct DatasetManifest {
  std::uint32_t version = kDatasetVersion;
  std::string dataset;
  float fs = 0.0f;
  std::size_t channels = 0;
  std::size_t samples = 0;
  std::vector<std::string> channel_names;
  std::vector<std::string> class_names;
  std::vector<SubjectEntry> subjects;
  std::vector<Segment> order;
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

/// Writes manifest.json plus subject_<id>.mieg files; returns the manifest.
DatasetManifest write_dataset(const EpochedDataset& ds, const std::filesystem::path& dir,
                              const std::string& name = "dataset");

/// Throws IoError when files are missing, IntegrityError on checksum,
/// version or layout problems (naming the offending file).
DatasetManifest read_manifest(const std::filesystem::path& dir);
EpochedDataset read_dataset(const std::filesystem::path& dir);

}  // namespace min2net::dataio
