#pragma once

#include <cstdint>
#include <vector>

#include "min2net/dataset.hpp"

namespace min2net::dataio {

/// Synthetic event-related desynchronization data. Channels in the first half
/// stand for the left hemisphere, the second half for the right one. Class 0
/// (left hand) attenuates the mu rhythm on the right half, class 1 (right
/// hand) on the left half, class 2 (rest) nowhere.
struct SynthSpec {
  std::uint32_t n_subjects = 6;
  std::uint32_t trials_per_class = 20;
  std::uint32_t n_classes = 2;
  std::uint32_t channels = 8;
  std::uint32_t samples = 400;
  double fs = 100.0;
  double mu_hz = 10.0;
  double mu_amplitude = 1.0;
  double contrast = 0.8;      // fraction of mu amplitude removed on the designated channels
  double noise = 0.5;         // standard deviation of the 1/f background
  double variability = 0.1;   // log-scale spread of subject gains and mu frequency
  double online_fraction = 0.5;
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Channel indices whose mu rhythm is attenuated for `label`.
std::vector<std::size_t> designated_channels(std::size_t channels, int label);

/// Subjects are numbered 1..n_subjects. Within a subject the class order is
/// shuffled; per class the first (1 - online_fraction) share of trials is
/// tagged offline session 1, the rest online session 1.
EpochedDataset synth_generate(const SynthSpec& spec);

}  // namespace min2net::dataio
