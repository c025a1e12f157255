#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "min2net/nncore/tensor.hpp"

namespace min2net::nn {

/// Scalar objective evaluated in 64-bit mode. When `grad` is non-null the
/// function must also write the analytic gradient (same shape as the input).
using ScalarFunction = std::function<double(const TensorD& input, TensorD* grad)>;

struct GradCheckOptions {
  double tolerance = 1e-4;
  double step = 1e-5;          // scaled by max(1, |x_i|)
  double abs_floor = 1e-7;     // denominator floor for near-zero gradients
  std::size_t max_coords = 0;  // 0 checks every coordinate; otherwise an even sample
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  bool passed = false;
  std::string message;
};

/// Compares the analytic gradient of `fn` against central finite differences
/// and reports the worst relative error |a - n| / max(|a|, |n|, abs_floor).
GradCheckResult grad_check(const ScalarFunction& fn, const TensorD& input, const GradCheckOptions& options = {});

}  // namespace min2net::nn
