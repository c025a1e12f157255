#include "min2net/dataio/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "min2net/errors.hpp"

namespace min2net::dataio {
namespace {

// Paul Kellet's economy pink-noise filter, normalised to unit variance per trial.
std::vector<double> pink_noise(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> white(0.0, 1.0);
  double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
  constexpr std::size_t kWarmup = 256;
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n + kWarmup; ++i) {
    const double w = white(rng);
    b0 = 0.99886 * b0 + w * 0.0555179;
    b1 = 0.99332 * b1 + w * 0.0750759;
    b2 = 0.96900 * b2 + w * 0.1538520;
    b3 = 0.86650 * b3 + w * 0.3104856;
    b4 = 0.55000 * b4 + w * 0.5329522;
    b5 = -0.7616 * b5 - w * 0.0168980;
    const double pink = b0 + b1 + b2 + b3 + b4 + b5 + b6 + w * 0.5362;
    b6 = w * 0.115926;
    if (i >= kWarmup) out.push_back(pink);
  }
  double mean = 0, var = 0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(n);
  for (double v : out) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  for (double& v : out) v = sd > 0 ? (v - mean) / sd : 0.0;
  return out;
}

}  // namespace

void SynthSpec::validate() const {
  if (n_subjects < 1) throw ConfigError("synth.n_subjects must be >= 1");
  if (trials_per_class < 1) throw ConfigError("synth.trials_per_class must be >= 1");
  if (n_classes != 2 && n_classes != 3) throw ConfigError("synth.n_classes must be 2 or 3");
  if (channels < 2) throw ConfigError("synth.channels must be >= 2");
  if (samples < 1) throw ConfigError("synth.samples must be >= 1");
  if (!(fs > 0)) throw ConfigError("synth.fs must be positive");
  if (!(mu_hz > 0 && mu_hz < fs / 2)) throw ConfigError("synth.mu_hz must lie in (0, fs/2)");
  if (!(mu_amplitude >= 0)) throw ConfigError("synth.mu_amplitude must be >= 0");
  if (!(contrast >= 0 && contrast <= 1)) throw ConfigError("synth.contrast must lie in [0, 1]");
  if (!(noise >= 0)) throw ConfigError("synth.noise must be >= 0");
  if (!(variability >= 0)) throw ConfigError("synth.variability must be >= 0");
  if (!(online_fraction >= 0 && online_fraction < 1)) throw ConfigError("synth.online_fraction must lie in [0, 1)");
}

std::vector<std::size_t> designated_channels(std::size_t channels, int label) {
  std::vector<std::size_t> out;
  const std::size_t half = channels / 2;
  if (label == 0) {
    for (std::size_t c = half; c < channels; ++c) out.push_back(c);
  } else if (label == 1) {
    for (std::size_t c = 0; c < half; ++c) out.push_back(c);
  }
  return out;
}

EpochedDataset synth_generate(const SynthSpec& spec) {
  spec.validate();
  EpochedDataset ds;
  ds.channels = spec.channels;
  ds.samples = spec.samples;
  ds.fs = static_cast<float>(spec.fs);
  const std::size_t half = spec.channels / 2;
  for (std::size_t c = 0; c < spec.channels; ++c) {
    ds.channel_names.push_back(c < half ? "L" + std::to_string(c + 1) : "R" + std::to_string(c - half + 1));
  }
  ds.class_names = {"left", "right"};
  if (spec.n_classes == 3) ds.class_names.push_back("rest");

  const double two_pi = 2.0 * std::numbers::pi;
  const std::uint32_t n_offline = static_cast<std::uint32_t>(
      std::lround(static_cast<double>(spec.trials_per_class) * (1.0 - spec.online_fraction)));

  for (std::uint32_t s = 1; s <= spec.n_subjects; ++s) {
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32), s, 0x4d49u};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> spread(0.0, spec.variability);
    std::uniform_real_distribution<double> phase(0.0, two_pi);

    const double freq = spec.mu_hz * std::exp(spread(rng));
    std::vector<double> gain(spec.channels);
    for (auto& g : gain) g = std::exp(spread(rng));

    std::vector<int> labels;
    for (std::uint32_t k = 0; k < spec.n_classes; ++k) labels.insert(labels.end(), spec.trials_per_class, static_cast<int>(k));
    std::shuffle(labels.begin(), labels.end(), rng);

    std::vector<std::uint32_t> seen(spec.n_classes, 0);
    std::vector<float> trial(ds.trial_size());
    for (int y : labels) {
      const bool online = seen[static_cast<std::size_t>(y)]++ >= n_offline;
      const auto attenuated = designated_channels(spec.channels, y);
      for (std::size_t c = 0; c < spec.channels; ++c) {
        const bool hit = std::find(attenuated.begin(), attenuated.end(), c) != attenuated.end();
        const double amp = spec.mu_amplitude * gain[c] * (hit ? 1.0 - spec.contrast : 1.0);
        const double ph = phase(rng);
        const auto bg = pink_noise(spec.samples, rng);
        for (std::size_t t = 0; t < spec.samples; ++t) {
          const double time = static_cast<double>(t) / spec.fs;
          trial[c * spec.samples + t] = static_cast<float>(amp * std::sin(two_pi * freq * time + ph) + spec.noise * gain[c] * bg[t]);
        }
      }
      ds.data.insert(ds.data.end(), trial.begin(), trial.end());
      ds.labels.push_back(y);
      ds.subject_ids.push_back(s);
      ds.sessions.push_back({online, 1});
    }
  }
  return ds;
}

}  // namespace min2net::dataio
