#include "min2net/dataio/augment.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "min2net/errors.hpp"

namespace min2net::dataio {
namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), salt};
  return std::mt19937_64(seq);
}

void require_sigma(double sigma, const char* name) {
  if (!(sigma >= 0)) throw ConfigError(std::string(name) + ": sigma must be >= 0");
}

void require_knots(int knots, const char* name) {
  if (knots < 1) throw ConfigError(std::string(name) + ": knots must be >= 1");
}

// Smooth curve over [0, T-1] through knots + 2 equally spaced random values.
std::vector<double> random_curve(std::size_t samples, int knots, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> draw(1.0, sigma);
  std::vector<double> y(static_cast<std::size_t>(knots) + 2);
  for (auto& v : y) v = draw(rng);
  std::vector<double> out(samples, y.front());
  if (samples < 2) return out;
  const double step = static_cast<double>(samples - 1) / static_cast<double>(y.size() - 1);
  boost::math::interpolators::cardinal_cubic_b_spline<double> spline(y.begin(), y.end(), 0.0, step, 0.0, 0.0);
  for (std::size_t t = 0; t < samples; ++t) out[t] = spline(static_cast<double>(t));
  return out;
}

}  // namespace

EpochedDataset augment_jitter(const EpochedDataset& ds, double sigma, std::uint64_t seed) {
  require_sigma(sigma, "jitter");
  auto rng = make_rng(seed, 1);
  std::normal_distribution<double> noise(0.0, 1.0);
  EpochedDataset out = ds;
  const std::size_t T = ds.samples;
  for (std::size_t i = 0; i < ds.n_trials(); ++i) {
    for (std::size_t c = 0; c < ds.channels; ++c) {
      float* row = out.data.data() + i * ds.trial_size() + c * T;
      double mean = 0, var = 0;
      for (std::size_t t = 0; t < T; ++t) mean += row[t];
      mean /= static_cast<double>(T);
      for (std::size_t t = 0; t < T; ++t) var += (row[t] - mean) * (row[t] - mean);
      const double sd = sigma * std::sqrt(var / static_cast<double>(T));
      for (std::size_t t = 0; t < T; ++t) row[t] = static_cast<float>(row[t] + sd * noise(rng));
    }
  }
  return out;
}

EpochedDataset augment_scale(const EpochedDataset& ds, double sigma, std::uint64_t seed) {
  require_sigma(sigma, "scale");
  auto rng = make_rng(seed, 2);
  std::normal_distribution<double> draw(1.0, sigma);
  EpochedDataset out = ds;
  for (std::size_t i = 0; i < ds.n_trials(); ++i) {
    const double f = sigma == 0 ? 1.0 : draw(rng);
    auto first = out.data.begin() + static_cast<std::ptrdiff_t>(i * ds.trial_size());
    std::transform(first, first + static_cast<std::ptrdiff_t>(ds.trial_size()), first,
                   [f](float v) { return static_cast<float>(v * f); });
  }
  return out;
}

EpochedDataset augment_magwarp(const EpochedDataset& ds, double sigma, int knots, std::uint64_t seed) {
  require_sigma(sigma, "magwarp");
  require_knots(knots, "magwarp");
  if (sigma == 0) return ds;
  auto rng = make_rng(seed, 3);
  EpochedDataset out = ds;
  const std::size_t T = ds.samples;
  for (std::size_t i = 0; i < ds.n_trials(); ++i) {
    for (std::size_t c = 0; c < ds.channels; ++c) {
      const auto env = random_curve(T, knots, sigma, rng);
      float* row = out.data.data() + i * ds.trial_size() + c * T;
      for (std::size_t t = 0; t < T; ++t) row[t] = static_cast<float>(row[t] * env[t]);
    }
  }
  return out;
}

EpochedDataset augment_timewarp(const EpochedDataset& ds, double sigma, int knots, std::uint64_t seed) {
  require_sigma(sigma, "timewarp");
  require_knots(knots, "timewarp");
  if (sigma == 0 || ds.samples < 2) return ds;
  auto rng = make_rng(seed, 4);
  std::normal_distribution<double> draw(1.0, sigma);
  EpochedDataset out = ds;
  const std::size_t T = ds.samples;
  const double last = static_cast<double>(T - 1);
  const std::size_t n_seg = static_cast<std::size_t>(knots) + 1;
  std::vector<double> where(T);
  std::vector<float> src(T);
  for (std::size_t i = 0; i < ds.n_trials(); ++i) {
    // Piecewise-linear warp: segment speeds are clipped positive so the map stays monotone.
    std::vector<double> cum(n_seg + 1, 0.0);
    for (std::size_t k = 0; k < n_seg; ++k) cum[k + 1] = cum[k] + std::max(draw(rng), 1e-2);
    for (std::size_t t = 0; t < T; ++t) {
      const double u = static_cast<double>(t) / last * static_cast<double>(n_seg);
      const std::size_t k = std::min(static_cast<std::size_t>(u), n_seg - 1);
      const double frac = u - static_cast<double>(k);
      where[t] = (cum[k] + frac * (cum[k + 1] - cum[k])) / cum[n_seg] * last;
    }
    where.front() = 0.0;
    where.back() = last;
    for (std::size_t c = 0; c < ds.channels; ++c) {
      float* row = out.data.data() + i * ds.trial_size() + c * T;
      std::copy(row, row + T, src.begin());
      for (std::size_t t = 0; t < T; ++t) {
        const std::size_t j = std::min(static_cast<std::size_t>(where[t]), T - 2);
        const double a = where[t] - static_cast<double>(j);
        row[t] = static_cast<float>((1.0 - a) * src[j] + a * src[j + 1]);
      }
    }
  }
  return out;
}

EpochedDataset augment_permute(const EpochedDataset& ds, int n_segments, std::uint64_t seed) {
  if (n_segments < 1) throw ConfigError("permute: n_segments must be >= 1");
  const std::size_t T = ds.samples;
  const auto n_seg = static_cast<std::size_t>(n_segments);
  if (T % n_seg != 0) {
    throw ConfigError("permute: n_segments " + std::to_string(n_segments) + " does not divide " + std::to_string(T) +
                      " samples");
  }
  auto rng = make_rng(seed, 5);
  EpochedDataset out = ds;
  const std::size_t len = T / n_seg;
  std::vector<std::size_t> order(n_seg);
  for (std::size_t i = 0; i < ds.n_trials(); ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const float* in = ds.data.data() + i * ds.trial_size();
    float* dst = out.data.data() + i * ds.trial_size();
    for (std::size_t c = 0; c < ds.channels; ++c) {
      for (std::size_t k = 0; k < n_seg; ++k) {
        std::copy_n(in + c * T + order[k] * len, len, dst + c * T + k * len);
      }
    }
  }
  return out;
}

void AugmentSpec::validate(std::size_t samples) const {
  static const std::vector<std::string> known{"jitter", "scale", "magwarp", "timewarp", "permute"};
  for (const auto& t : transforms) {
    if (std::find(known.begin(), known.end(), t) == known.end()) {
      throw ConfigError("unknown augmentation '" + t + "' (expected jitter, scale, magwarp, timewarp or permute)");
    }
  }
  require_sigma(sigma, "augment");
  require_knots(knots, "augment");
  if (copies < 1) throw ConfigError("augment: copies must be >= 1");
  if (segments < 1) throw ConfigError("augment: segments must be >= 1");
  if (std::find(transforms.begin(), transforms.end(), "permute") != transforms.end() &&
      samples % static_cast<std::size_t>(segments) != 0) {
    throw ConfigError("augment: segments " + std::to_string(segments) + " does not divide " + std::to_string(samples) +
                      " samples");
  }
}

std::vector<std::string> parse_transform_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

EpochedDataset augment_pool(const EpochedDataset& ds, const AugmentSpec& spec, std::uint64_t seed) {
  spec.validate(ds.samples);
  EpochedDataset out = ds;
  std::uint64_t k = 0;
  for (const auto& t : spec.transforms) {
    for (int c = 0; c < spec.copies; ++c, ++k) {
      const std::uint64_t s = seed * 1000003ULL + k;
      if (t == "jitter") out.extend(augment_jitter(ds, spec.sigma, s));
      else if (t == "scale") out.extend(augment_scale(ds, spec.sigma, s));
      else if (t == "magwarp") out.extend(augment_magwarp(ds, spec.sigma, spec.knots, s));
      else if (t == "timewarp") out.extend(augment_timewarp(ds, spec.sigma, spec.knots, s));
      else out.extend(augment_permute(ds, spec.segments, s));
    }
  }
  return out;
}

EpochedDataset balance_rest(const EpochedDataset& ds, int rest_label, std::uint64_t seed) {
  std::vector<std::size_t> rest, keep;
  for (std::size_t i = 0; i < ds.n_trials(); ++i) (ds.labels[i] == rest_label ? rest : keep).push_back(i);
  if (rest.empty()) throw ConfigError("balance_rest: no trial carries rest label " + std::to_string(rest_label));
  auto rng = make_rng(seed, 6);
  std::shuffle(rest.begin(), rest.end(), rng);
  rest.resize(rest.size() / 2);
  keep.insert(keep.end(), rest.begin(), rest.end());
  std::sort(keep.begin(), keep.end());
  return ds.subset(keep);
}

}  // namespace min2net::dataio
