#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "min2net/nncore/tensor.hpp"

namespace min2net::nn {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. The learning rate lives in the state so a
/// scheduler can change it between steps.
template <typename S>
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(AdamOptions options) : options_(options) {}

  double learning_rate() const noexcept { return options_.learning_rate; }
  void set_learning_rate(double lr);
  std::uint64_t step_count() const noexcept { return step_; }
  const AdamOptions& options() const noexcept { return options_; }

  /// Applies one update to every parameter. Throws NumericError naming the
  /// first parameter with a non-finite gradient; nothing is modified then.
  void step(std::span<ParamTensor<S>* const> params);

  const std::vector<BasicTensor<S>>& first_moments() const noexcept { return m_; }
  const std::vector<BasicTensor<S>>& second_moments() const noexcept { return v_; }

 private:
  AdamOptions options_;
  std::uint64_t step_ = 0;
  std::vector<BasicTensor<S>> m_;
  std::vector<BasicTensor<S>> v_;
};

extern template class AdamState<float>;
extern template class AdamState<double>;

}  // namespace min2net::nn
