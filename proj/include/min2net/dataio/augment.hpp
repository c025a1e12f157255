#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "min2net/dataset.hpp"

namespace min2net::dataio {

// Each transform returns a dataset of the same geometry, labels, subjects and
// sessions as its input; only the samples change.

/// Additive Gaussian noise with stdev sigma times each channel's own stdev.
EpochedDataset augment_jitter(const EpochedDataset& ds, double sigma, std::uint64_t seed);
/// One factor ~ N(1, sigma^2) per trial.
EpochedDataset augment_scale(const EpochedDataset& ds, double sigma, std::uint64_t seed);
/// Smooth per-channel envelope: cubic spline through knots + 2 values ~ N(1, sigma^2).
EpochedDataset augment_magwarp(const EpochedDataset& ds, double sigma, int knots, std::uint64_t seed);
/// Monotone time re-parameterization from knots + 1 segment speeds ~ N(1, sigma^2),
/// shared by all channels of a trial; endpoints are kept.
EpochedDataset augment_timewarp(const EpochedDataset& ds, double sigma, int knots, std::uint64_t seed);
/// Splits time into n_segments equal blocks and shuffles them per trial.
EpochedDataset augment_permute(const EpochedDataset& ds, int n_segments, std::uint64_t seed);

struct AugmentSpec {
  std::vector<std::string> transforms;  // jitter, scale, magwarp, timewarp, permute
  double sigma = 0.1;
  int knots = 4;
  int segments = 4;
  int copies = 1;  // per transform

  /// Throws ConfigError on unknown names or invalid parameters.
  void validate(std::size_t samples) const;
};

/// Parses a comma separated list, e.g. "jitter,scale".
std::vector<std::string> parse_transform_list(const std::string& text);

/// Input followed by `copies` augmented copies for every listed transform.
EpochedDataset augment_pool(const EpochedDataset& ds, const AugmentSpec& spec, std::uint64_t seed);

/// Keeps every motor-imagery trial and a uniform sample of floor(n_rest / 2)
/// trials labelled `rest_label`, in original order. Throws ConfigError when no
/// trial carries the rest label.
EpochedDataset balance_rest(const EpochedDataset& ds, int rest_label, std::uint64_t seed);

}  // namespace min2net::dataio
