#pragma once

#include <cstddef>
#include <cstdint>

namespace min2net::model {

/// Architecture and loss hyperparameters.
struct Min2NetConfig {
  std::uint32_t channels = 20;      // C
  std::uint32_t samples = 400;      // T, must be a multiple of 100
  std::uint32_t latent = 20;        // z
  std::uint32_t classes = 2;        // N
  double margin = 1.0;              // triplet margin alpha
  double beta_mse = 0.5;            // weight of the reconstruction loss
  double beta_triplet = 0.5;        // weight of the triplet loss
  double beta_ce = 1.0;             // weight of the cross-entropy loss
  bool mse_elementwise = false;     // mean over all elements instead of mean over channels of summed error
  double bn_momentum = 0.99;
  double bn_epsilon = 1e-3;

  /// Default latent width: C for two classes, 256 for three.
  static std::uint32_t default_latent(std::uint32_t channels, std::uint32_t classes) {
    return classes == 3 ? 256u : channels;
  }

  static Min2NetConfig make(std::uint32_t channels, std::uint32_t samples, std::uint32_t classes) {
    Min2NetConfig c;
    c.channels = channels;
    c.samples = samples;
    c.classes = classes;
    c.latent = default_latent(channels, classes);
    return c;
  }

  std::size_t first_pool() const { return samples / 100; }

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;

  friend bool operator==(const Min2NetConfig&, const Min2NetConfig&) = default;
};

/// Fixed widths of the inner layers.
inline constexpr std::size_t kConv2Filters = 10;
inline constexpr std::size_t kConv1Kernel = 64;
inline constexpr std::size_t kConv2Kernel = 32;
inline constexpr std::size_t kDeconv1Kernel = 64;
inline constexpr std::size_t kDeconv2Kernel = 32;
inline constexpr std::size_t kPooledLength = 25;
inline constexpr std::size_t kFlatWidth = kPooledLength * kConv2Filters;  // 250

}  // namespace min2net::model
