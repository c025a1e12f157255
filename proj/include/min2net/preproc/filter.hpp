#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

namespace min2net::preproc {

struct FilterSpec {
  int order = 5;
  double low_hz = 8.0;
  double high_hz = 30.0;
  double fs = 100.0;

  /// Throws ConfigError unless 0 < low < high < fs/2 and order >= 1.
  void validate() const;
};

/// Normalized second-order section: b0 + b1 z^-1 + b2 z^-2 over 1 + a1 z^-1 + a2 z^-2.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
};

struct BiquadCascade {
  std::vector<Biquad> sections;

  std::vector<std::complex<double>> poles() const;
  bool stable() const;

  /// Complex response at `freq_hz` for sampling rate `fs`.
  std::complex<double> response(double freq_hz, double fs) const;
  double magnitude_db(double freq_hz, double fs) const;

  /// Expanded transfer function, highest power first; a[0] == 1.
  std::pair<std::vector<double>, std::vector<double>> to_ba() const;
};

struct ZeroPoleGain {
  std::vector<std::complex<double>> zeros;
  std::vector<std::complex<double>> poles;
  double gain = 1.0;
};

/// Digital Butterworth band-pass in zero-pole-gain form (bilinear transform
/// with pre-warped edges).
ZeroPoleGain butter_bandpass_zpk(const FilterSpec& spec);

/// Same design as `order` sections; the overall gain sits in the first one and
/// sections are ordered by increasing pole radius.
BiquadCascade butter_bandpass(const FilterSpec& spec);

/// Direct-form-II-transposed filtering; `zi` holds two states per section and
/// is updated in place when given.
std::vector<double> sosfilt(const BiquadCascade& filter, std::span<const double> x,
                            std::vector<std::array<double, 2>>* zi = nullptr);

/// Per-section states giving the step response steady state for a unit input.
std::vector<std::array<double, 2>> sosfilt_zi(const BiquadCascade& filter);

/// Edge padding used by filtfilt: 3 * (2 * sections).
std::size_t filtfilt_padlen(const BiquadCascade& filter);

/// Zero-phase forward-backward filtering with odd-reflection padding and
/// steady-state initial conditions, averaged with the backward-first order so
/// that filtering a reversed signal gives exactly the reversed output. Throws
/// ConfigError when the signal is not longer than the padding.
std::vector<double> filtfilt(const BiquadCascade& filter, std::span<const double> x);

}  // namespace min2net::preproc
