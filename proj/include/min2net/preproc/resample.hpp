#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace min2net::preproc {

/// fs_out / fs_in = up / down in lowest terms.
struct RationalRatio {
  std::uint64_t up = 1;
  std::uint64_t down = 1;
};

/// Throws ConfigError for non-positive rates or a ratio that has no small
/// rational form (rates are read to 1e-3 Hz, factors are capped at 10000).
RationalRatio rational_ratio(double fs_in, double fs_out);

/// Kaiser-windowed sinc low-pass used by the polyphase resampler
/// (half length 10 * max(up, down), beta 5, cutoff 1 / max(up, down)).
std::vector<double> resample_kernel(const RationalRatio& r);

/// Polyphase rational resampling. Output length is ceil(n * up / down); the
/// kernel is centred so output sample m sits at input time m * down / up.
std::vector<double> resample(std::span<const double> x, double fs_in, double fs_out);
std::vector<double> resample(std::span<const double> x, const RationalRatio& r);

}  // namespace min2net::preproc
