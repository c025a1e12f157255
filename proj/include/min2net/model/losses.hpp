#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "min2net/model/config.hpp"
#include "min2net/nncore/tensor.hpp"

namespace min2net::model {

/// Loss value together with its gradient with respect to the prediction input.
template <typename S>
struct LossGrad {
  double value = 0.0;
  nn::BasicTensor<S> grad;
};

/// Reconstruction loss. Default: per trial, mean over channels of the
/// time-summed squared error, averaged over the batch. With `elementwise`
/// the plain mean over every element is used instead.
template <typename S>
LossGrad<S> mse_loss(const nn::BasicTensor<S>& x, const nn::BasicTensor<S>& x_hat, bool elementwise = false);

inline constexpr double kProbabilityFloor = 1e-12;

/// Mean over the batch of -log p[true class], with p floored at 1e-12.
template <typename S>
LossGrad<S> cross_entropy_loss(std::span<const int> labels, const nn::BasicTensor<S>& probs);

struct Triplet {
  std::size_t anchor = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;
  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// True when at least one ordered (anchor, positive) pair and one negative exist.
bool has_valid_triplet(std::span<const int> labels);

/// Every ordered same-label pair (a, p), a != p, with its semi-hard negative:
/// the closest negative strictly farther than the positive, or the farthest
/// negative when no such one exists. Ties go to the lowest index.
template <typename S>
std::vector<Triplet> mine_triplets(const nn::BasicTensor<S>& latents, std::span<const int> labels);

/// Mean over mined triplets of 0.5 * max(d(a,p) - d(a,n) + margin, 0) with
/// squared Euclidean distances.
template <typename S>
LossGrad<S> triplet_semihard_loss(const nn::BasicTensor<S>& latents, std::span<const int> labels, double margin);

/// Weighted sum of the three batch-mean losses.
double total_loss(double mse, double triplet, double ce, const Min2NetConfig& config);

}  // namespace min2net::model
