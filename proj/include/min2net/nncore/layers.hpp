#pragma once

// The seven differentiable primitives the network is assembled from. All
// activations use the channels-last layout [B, 1, T, C]; convolutions run
// along the time axis only (kernel height 1).

#include <cstddef>

#include "min2net/nncore/tensor.hpp"

namespace min2net::nn {

enum class Mode { Train, Infer };

/// Left/right zero padding for a "same" convolution producing ceil(length/stride) outputs.
struct SamePadding {
  std::size_t left = 0;
  std::size_t right = 0;
};
SamePadding same_padding(std::size_t length, std::size_t kernel, std::size_t stride);

template <typename S>
struct ConvGrads {
  BasicTensor<S> input;
  BasicTensor<S> weight;
  BasicTensor<S> bias;
};

// --- conv_time -------------------------------------------------------------
// input [B,1,T,Cin], weight [1,K,Cin,Cout], bias [Cout] -> [B,1,T/stride,Cout]

template <typename S>
BasicTensor<S> conv_time(const BasicTensor<S>& input, const BasicTensor<S>& weight, const BasicTensor<S>& bias,
                         std::size_t stride);

template <typename S>
ConvGrads<S> conv_time_backward(const BasicTensor<S>& input, const BasicTensor<S>& weight, std::size_t stride,
                                const BasicTensor<S>& grad_output);

// --- conv_transpose_time -----------------------------------------------------
// input [B,1,L,Cin], weight [1,K,Cout,Cin], bias [Cout] -> [B,1,L*stride,Cout].
// Exact adjoint of conv_time with the same weight buffer and stride.

template <typename S>
BasicTensor<S> conv_transpose_time(const BasicTensor<S>& input, const BasicTensor<S>& weight,
                                   const BasicTensor<S>& bias, std::size_t stride);

template <typename S>
ConvGrads<S> conv_transpose_time_backward(const BasicTensor<S>& input, const BasicTensor<S>& weight,
                                          std::size_t stride, const BasicTensor<S>& grad_output);

// --- batch_norm ----------------------------------------------------------------

template <typename S>
struct BatchNormState {
  BasicTensor<S> running_mean;
  BasicTensor<S> running_var;
  double momentum = 0.99;
  double epsilon = 1e-3;

  BatchNormState() = default;
  explicit BatchNormState(std::size_t channels, double momentum_ = 0.99, double epsilon_ = 1e-3)
      : running_mean({channels}, S{0}), running_var({channels}, S{1}), momentum(momentum_), epsilon(epsilon_) {}
};

/// Values the backward pass needs from a batch_norm forward call.
template <typename S>
struct BatchNormCache {
  Mode mode = Mode::Train;
  BasicTensor<S> normalized;  // x_hat, same shape as input
  std::vector<S> inv_std;     // per channel
};

/// Train mode normalises with batch statistics over (B,1,T) and updates the
/// running statistics; infer mode uses the running statistics only.
template <typename S>
BasicTensor<S> batch_norm(const BasicTensor<S>& input, const BasicTensor<S>& gamma, const BasicTensor<S>& beta,
                          Mode mode, BatchNormState<S>& state, BatchNormCache<S>* cache = nullptr);

template <typename S>
struct BatchNormGrads {
  BasicTensor<S> input;
  BasicTensor<S> gamma;
  BasicTensor<S> beta;
};

template <typename S>
BatchNormGrads<S> batch_norm_backward(const BatchNormCache<S>& cache, const BasicTensor<S>& gamma,
                                      const BasicTensor<S>& grad_output);

// --- avg_pool_time ---------------------------------------------------------------

template <typename S>
BasicTensor<S> avg_pool_time(const BasicTensor<S>& input, std::size_t pool);

template <typename S>
BasicTensor<S> avg_pool_time_backward(const Shape& input_shape, std::size_t pool, const BasicTensor<S>& grad_output);

// --- fully_connected -------------------------------------------------------------
// input [B,Din], weight [Din,Dout], bias [Dout] -> [B,Dout]

template <typename S>
BasicTensor<S> fully_connected(const BasicTensor<S>& input, const BasicTensor<S>& weight, const BasicTensor<S>& bias);

template <typename S>
struct DenseGrads {
  BasicTensor<S> input;
  BasicTensor<S> weight;
  BasicTensor<S> bias;
};

template <typename S>
DenseGrads<S> fully_connected_backward(const BasicTensor<S>& input, const BasicTensor<S>& weight,
                                       const BasicTensor<S>& grad_output);

// --- elu / softmax ---------------------------------------------------------------

template <typename S>
BasicTensor<S> elu(const BasicTensor<S>& input);

template <typename S>
BasicTensor<S> elu_backward(const BasicTensor<S>& input, const BasicTensor<S>& grad_output);

/// Row-wise over the last axis of a [B,N] tensor, max-subtracted.
template <typename S>
BasicTensor<S> softmax(const BasicTensor<S>& input);

template <typename S>
BasicTensor<S> softmax_backward(const BasicTensor<S>& output, const BasicTensor<S>& grad_output);

}  // namespace min2net::nn
