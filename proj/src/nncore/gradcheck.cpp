#include "min2net/nncore/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <cstdio>
#include <random>
#include <vector>

namespace min2net::nn {
namespace {

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

GradCheckResult grad_check(const ScalarFunction& fn, const TensorD& input, const GradCheckOptions& options) {
  GradCheckResult result;
  TensorD analytic(input.shape());
  fn(input, &analytic);
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    if (!std::isfinite(analytic[i])) {
      result.message = "non-finite analytic gradient at index " + std::to_string(i);
      result.max_rel_error = INFINITY;
      result.worst_index = i;
      return result;
    }
  }

  std::vector<std::size_t> coords(input.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (options.max_coords > 0 && options.max_coords < coords.size()) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.max_coords);
    std::sort(coords.begin(), coords.end());
  }

  TensorD probe = input;
  double worst_analytic = 0.0, worst_numeric = 0.0;
  for (std::size_t i : coords) {
    const double x = input[i];
    const double h = options.step * std::max(1.0, std::abs(x));
    probe[i] = x + h;
    const double up = fn(probe, nullptr);
    probe[i] = x - h;
    const double down = fn(probe, nullptr);
    probe[i] = x;
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic[i];
    const double denom = std::max({std::abs(a), std::abs(numeric), options.abs_floor});
    const double err = std::abs(a - numeric) / denom;
    if (!std::isfinite(numeric) || err > result.max_rel_error || std::isnan(err)) {
      result.max_rel_error = std::isfinite(err) ? err : INFINITY;
      result.worst_index = i;
      worst_analytic = a;
      worst_numeric = numeric;
    }
  }
  result.checked = coords.size();
  result.passed = result.max_rel_error <= options.tolerance;
  if (!result.passed) {
    result.message = "max relative error " + std::to_string(result.max_rel_error) + " at index " +
                     std::to_string(result.worst_index) + " (analytic " + fmt_g(worst_analytic) +
                     ", numeric " + fmt_g(worst_numeric) + ")";
  }
  return result;
}

}  // namespace min2net::nn
