#include "min2net/model/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "min2net/errors.hpp"

namespace min2net::model {

using nn::BasicTensor;

template <typename S>
LossGrad<S> mse_loss(const BasicTensor<S>& x, const BasicTensor<S>& x_hat, bool elementwise) {
  if (x.shape() != x_hat.shape()) {
    throw DimensionError("mse_loss: shape " + nn::shape_str(x.shape()) + " vs " + nn::shape_str(x_hat.shape()));
  }
  nn::require_rank(x.shape(), 4, "mse_loss input");
  const std::size_t batch = x.dim(0), channels = x.dim(3);
  LossGrad<S> out{0.0, BasicTensor<S>(x.shape())};
  if (batch == 0) return out;
  // d/dx_hat of scale * sum (x - x_hat)^2
  const double scale = elementwise ? 1.0 / static_cast<double>(x.size())
                                   : 1.0 / (static_cast<double>(channels) * static_cast<double>(batch));
  // Compensated (Neumaier) sum: the total is large next to its per-element terms.
  double acc = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = static_cast<double>(x_hat[i]) - static_cast<double>(x[i]);
    const double term = r * r;
    const double t = acc + term;
    comp += std::abs(acc) >= term ? (acc - t) + term : (term - t) + acc;
    acc = t;
    out.grad[i] = static_cast<S>(2.0 * scale * r);
  }
  out.value = (acc + comp) * scale;
  return out;
}

template <typename S>
LossGrad<S> cross_entropy_loss(std::span<const int> labels, const BasicTensor<S>& probs) {
  nn::require_rank(probs.shape(), 2, "cross_entropy_loss probabilities");
  const std::size_t batch = probs.dim(0), classes = probs.dim(1);
  if (labels.size() != batch) throw DimensionError("cross_entropy_loss: label count does not match batch");
  LossGrad<S> out{0.0, BasicTensor<S>(probs.shape())};
  if (batch == 0) return out;
  double acc = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const int y = labels[b];
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw ConfigError("cross_entropy_loss: label " + std::to_string(y) + " outside 0.." + std::to_string(classes - 1));
    }
    const double p = probs[b * classes + static_cast<std::size_t>(y)];
    const double clipped = std::max(p, kProbabilityFloor);
    acc -= std::log(clipped);
    if (p > kProbabilityFloor) {
      out.grad[b * classes + static_cast<std::size_t>(y)] = static_cast<S>(-1.0 / (p * static_cast<double>(batch)));
    }
  }
  out.value = acc / static_cast<double>(batch);
  return out;
}

bool has_valid_triplet(std::span<const int> labels) {
  std::map<int, std::size_t> counts;
  for (int y : labels) ++counts[y];
  if (counts.size() < 2) return false;
  return std::any_of(counts.begin(), counts.end(), [](const auto& kv) { return kv.second >= 2; });
}

namespace {

template <typename S>
std::vector<double> pairwise_sq_distances(const BasicTensor<S>& z) {
  const std::size_t n = z.dim(0), d = z.dim(1);
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = static_cast<double>(z[i * d + k]) - static_cast<double>(z[j * d + k]);
        acc += diff * diff;
      }
      dist[i * n + j] = acc;
      dist[j * n + i] = acc;
    }
  }
  return dist;
}

template <typename S>
void check_latents(const BasicTensor<S>& latents, std::span<const int> labels) {
  nn::require_rank(latents.shape(), 2, "triplet latents");
  if (labels.size() != latents.dim(0)) throw DimensionError("triplet: label count does not match latent batch");
  if (!has_valid_triplet(labels)) {
    throw BatchCompositionError(
        "batch has no valid triplet: it needs at least two labels and two samples sharing a label");
  }
}

template <typename S>
std::vector<Triplet> mine_with_distances(const BasicTensor<S>& latents, std::span<const int> labels,
                                         const std::vector<double>& dist) {
  const std::size_t n = latents.dim(0);
  std::vector<Triplet> triplets;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t p = 0; p < n; ++p) {
      if (p == a || labels[p] != labels[a]) continue;
      const double d_ap = dist[a * n + p];
      std::size_t semi = n, hardest = n;
      double semi_d = std::numeric_limits<double>::infinity();
      double hard_d = -1.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (labels[k] == labels[a]) continue;
        const double d_an = dist[a * n + k];
        if (d_an > d_ap && d_an < semi_d) {
          semi_d = d_an;
          semi = k;
        }
        if (hardest == n || d_an > hard_d) {  // first negative also covers NaN distances
          hard_d = d_an;
          hardest = k;
        }
      }
      triplets.push_back({a, p, semi < n ? semi : hardest});
    }
  }
  return triplets;
}

}  // namespace

template <typename S>
std::vector<Triplet> mine_triplets(const BasicTensor<S>& latents, std::span<const int> labels) {
  check_latents(latents, labels);
  return mine_with_distances(latents, labels, pairwise_sq_distances(latents));
}

template <typename S>
LossGrad<S> triplet_semihard_loss(const BasicTensor<S>& latents, std::span<const int> labels, double margin) {
  check_latents(latents, labels);
  const std::size_t n = latents.dim(0), d = latents.dim(1);
  const auto dist = pairwise_sq_distances(latents);
  const auto triplets = mine_with_distances(latents, labels, dist);

  LossGrad<S> out{0.0, BasicTensor<S>(latents.shape())};
  const double inv_count = 1.0 / static_cast<double>(triplets.size());
  std::vector<double> grad(n * d, 0.0);
  double acc = 0.0;
  for (const Triplet& t : triplets) {
    const double hinge = dist[t.anchor * n + t.positive] - dist[t.anchor * n + t.negative] + margin;
    if (hinge <= 0.0) continue;
    acc += 0.5 * hinge;
    for (std::size_t k = 0; k < d; ++k) {
      const double za = latents[t.anchor * d + k];
      const double zp = latents[t.positive * d + k];
      const double zn = latents[t.negative * d + k];
      grad[t.anchor * d + k] += (zn - zp) * inv_count;
      grad[t.positive * d + k] += (zp - za) * inv_count;
      grad[t.negative * d + k] += (za - zn) * inv_count;
    }
  }
  for (std::size_t i = 0; i < grad.size(); ++i) out.grad[i] = static_cast<S>(grad[i]);
  out.value = acc * inv_count;
  return out;
}

double total_loss(double mse, double triplet, double ce, const Min2NetConfig& config) {
  return config.beta_mse * mse + config.beta_triplet * triplet + config.beta_ce * ce;
}

#define MIN2NET_INSTANTIATE_LOSSES(S)                                                               \
  template LossGrad<S> mse_loss(const BasicTensor<S>&, const BasicTensor<S>&, bool);                \
  template LossGrad<S> cross_entropy_loss(std::span<const int>, const BasicTensor<S>&);             \
  template std::vector<Triplet> mine_triplets(const BasicTensor<S>&, std::span<const int>);         \
  template LossGrad<S> triplet_semihard_loss(const BasicTensor<S>&, std::span<const int>, double);

MIN2NET_INSTANTIATE_LOSSES(float)
MIN2NET_INSTANTIATE_LOSSES(double)

}  // namespace min2net::model
