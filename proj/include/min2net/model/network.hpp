#pragma once

// Encoder, latent, decoder and classifier heads of the multi-task
// autoencoder. Layer order per block: conv -> ELU -> batch norm -> pooling.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "min2net/model/config.hpp"
#include "min2net/nncore/layers.hpp"
#include "min2net/nncore/tensor.hpp"

namespace min2net::model {

using nn::BasicTensor;
using nn::Mode;
using nn::ParamTensor;

inline constexpr std::size_t kParamCount = 18;

template <typename S>
struct Min2NetParams {
  Min2NetConfig config;
  std::uint64_t seed = 0;

  ParamTensor<S> conv1_w, conv1_b, bn1_gamma, bn1_beta;
  ParamTensor<S> conv2_w, conv2_b, bn2_gamma, bn2_beta;
  ParamTensor<S> latent_w, latent_b;
  ParamTensor<S> dec_w, dec_b;
  ParamTensor<S> deconv1_w, deconv1_b;
  ParamTensor<S> deconv2_w, deconv2_b;
  ParamTensor<S> cls_w, cls_b;
  nn::BatchNormState<S> bn1, bn2;

  std::array<ParamTensor<S>*, kParamCount> parameters();
  std::array<const ParamTensor<S>*, kParamCount> parameters() const;

  std::size_t trainable_count() const;
  void zero_grad();

  template <typename T>
  Min2NetParams<T> cast() const;
};

/// Allocates and initialises every parameter deterministically from `seed`:
/// Glorot-uniform kernels, zero biases, unit gamma, zero beta.
template <typename S>
Min2NetParams<S> build(const Min2NetConfig& config, std::uint64_t seed);

/// Named output shapes recorded while running the graph.
using ShapeTrace = std::vector<std::pair<std::string, nn::Shape>>;

template <typename S>
struct EncodeCache {
  BasicTensor<S> input, conv1_out, pool1_out, conv2_out, flat;
  nn::Shape bn1_shape, bn2_shape;
  nn::BatchNormCache<S> bn1, bn2;
};

template <typename S>
struct DecodeCache {
  BasicTensor<S> latent, reshaped, deconv1_out, act1, deconv2_out;
};

template <typename S>
struct ClassifyCache {
  BasicTensor<S> latent, probs;
};

/// x [B,1,T,C] -> latent [B,z]. Train mode updates batch-norm running statistics.
template <typename S>
BasicTensor<S> encode(Min2NetParams<S>& params, const BasicTensor<S>& x, Mode mode, EncodeCache<S>* cache = nullptr,
                      ShapeTrace* trace = nullptr);

/// latent [B,z] -> reconstruction [B,1,T,C].
template <typename S>
BasicTensor<S> decode(const Min2NetParams<S>& params, const BasicTensor<S>& latent, DecodeCache<S>* cache = nullptr,
                      ShapeTrace* trace = nullptr);

/// latent [B,z] -> class probabilities [B,N].
template <typename S>
BasicTensor<S> classify(const Min2NetParams<S>& params, const BasicTensor<S>& latent,
                        ClassifyCache<S>* cache = nullptr);

/// Backward passes accumulate into the parameter gradients and return the
/// gradient with respect to the block input.
template <typename S>
BasicTensor<S> encode_backward(Min2NetParams<S>& params, const EncodeCache<S>& cache, const BasicTensor<S>& grad_latent);

template <typename S>
BasicTensor<S> decode_backward(Min2NetParams<S>& params, const DecodeCache<S>& cache, const BasicTensor<S>& grad_recon);

template <typename S>
BasicTensor<S> classify_backward(Min2NetParams<S>& params, const ClassifyCache<S>& cache,
                                 const BasicTensor<S>& grad_probs);

struct LossBreakdown {
  double mse = 0.0;
  double triplet = 0.0;
  double ce = 0.0;
  double total = 0.0;
};

/// Full forward pass with all three losses weighted by the config. When
/// `accumulate_grads` is set the joint gradient is added to the parameter
/// gradients (triplet selection is held fixed during differentiation).
template <typename S>
LossBreakdown forward_losses(Min2NetParams<S>& params, const BasicTensor<S>& x, std::span<const int> labels, Mode mode,
                             bool accumulate_grads);

/// Infer-mode class probabilities for a batch.
template <typename S>
BasicTensor<S> predict_proba(Min2NetParams<S>& params, const BasicTensor<S>& x);

}  // namespace min2net::model
