#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "min2net/dataset.hpp"
#include "min2net/model/network.hpp"

namespace min2net::harness {

struct Metrics {
  std::size_t n_classes = 0;
  std::vector<std::vector<std::uint64_t>> confusion;  // [true][predicted]
  double accuracy = 0.0;
  std::vector<double> precision, recall, f1;
  double macro_f1 = 0.0;

  std::uint64_t total() const;
};

/// Counts-based metrics; a class with an empty denominator scores 0.
Metrics compute_metrics(std::span<const int> truth, std::span<const int> predicted, std::size_t n_classes);

/// Argmax of infer-mode class probabilities, in chunks.
std::vector<int> predict(model::Min2NetParams<float>& params, const EpochedDataset& ds);

/// Throws ConfigError on an empty test set.
Metrics evaluate(model::Min2NetParams<float>& params, const EpochedDataset& test);

}  // namespace min2net::harness
