#include "min2net/preproc/resample.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "min2net/errors.hpp"

namespace min2net::preproc {
namespace {

constexpr double kKaiserBeta = 5.0;
constexpr std::uint64_t kMaxFactor = 10000;

std::int64_t milli(double hz) {
  const double scaled = hz * 1000.0;
  const double rounded = std::round(scaled);
  if (std::abs(scaled - rounded) > 1e-6 * std::max(1.0, scaled)) {
    throw ConfigError("sampling rate " + std::to_string(hz) + " Hz is not representable to 1e-3 Hz");
  }
  return static_cast<std::int64_t>(rounded);
}

}  // namespace

RationalRatio rational_ratio(double fs_in, double fs_out) {
  if (!(fs_in > 0.0) || !(fs_out > 0.0)) throw ConfigError("sampling rates must be positive");
  const std::int64_t a = milli(fs_in), b = milli(fs_out);
  const std::int64_t g = std::gcd(a, b);
  RationalRatio r{static_cast<std::uint64_t>(b / g), static_cast<std::uint64_t>(a / g)};
  if (r.up > kMaxFactor || r.down > kMaxFactor) {
    throw ConfigError("resampling ratio " + std::to_string(r.up) + "/" + std::to_string(r.down) + " is too large");
  }
  return r;
}

std::vector<double> resample_kernel(const RationalRatio& r) {
  const std::uint64_t max_rate = std::max(r.up, r.down);
  const std::size_t half = static_cast<std::size_t>(10 * max_rate);
  const double cutoff = 1.0 / static_cast<double>(max_rate);
  const double i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);
  std::vector<double> h(2 * half + 1);
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double t = static_cast<double>(k) - static_cast<double>(half);
    const double arg = cutoff * t;
    const double sinc = arg == 0.0 ? 1.0 : std::sin(M_PI * arg) / (M_PI * arg);
    const double ratio = t / static_cast<double>(half);
    const double window = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - ratio * ratio))) / i0_beta;
    h[k] = cutoff * sinc * window;
  }
  return h;
}

std::vector<double> resample(std::span<const double> x, const RationalRatio& r) {
  if (r.up == 1 && r.down == 1) return {x.begin(), x.end()};
  const std::vector<double> h = resample_kernel(r);
  const std::int64_t half = static_cast<std::int64_t>(h.size() / 2);
  const std::int64_t L = static_cast<std::int64_t>(r.up), M = static_cast<std::int64_t>(r.down);
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  const std::int64_t out_len = (n * L + M - 1) / M;

  // Normalise each polyphase branch to unit DC gain.
  std::vector<double> branch_sum(static_cast<std::size_t>(L), 0.0);
  for (std::int64_t k = 0; k < static_cast<std::int64_t>(h.size()); ++k) branch_sum[static_cast<std::size_t>(k % L)] += h[static_cast<std::size_t>(k)];

  std::vector<double> y(static_cast<std::size_t>(out_len), 0.0);
  for (std::int64_t m = 0; m < out_len; ++m) {
    // Tap index k = m*M + half - i*L must lie in [0, 2*half].
    const std::int64_t centre = m * M + half;
    std::int64_t i_lo = (centre - 2 * half + L - 1) / L;
    if (centre - 2 * half < 0) i_lo = -((2 * half - centre) / L);
    const std::int64_t i_hi = centre / L;
    double acc = 0.0;
    for (std::int64_t i = std::max<std::int64_t>(i_lo, 0); i <= std::min(i_hi, n - 1); ++i) {
      acc += x[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(centre - i * L)];
    }
    y[static_cast<std::size_t>(m)] = acc / branch_sum[static_cast<std::size_t>(centre % L)];
  }
  return y;
}

std::vector<double> resample(std::span<const double> x, double fs_in, double fs_out) {
  return resample(x, rational_ratio(fs_in, fs_out));
}

}  // namespace min2net::preproc
