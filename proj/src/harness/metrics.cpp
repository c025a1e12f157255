#include "min2net/harness/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "min2net/harness/trainer.hpp"

namespace min2net::harness {

std::uint64_t Metrics::total() const {
  std::uint64_t n = 0;
  for (const auto& row : confusion) n += std::accumulate(row.begin(), row.end(), std::uint64_t{0});
  return n;
}

Metrics compute_metrics(std::span<const int> truth, std::span<const int> predicted, std::size_t n_classes) {
  if (truth.size() != predicted.size()) throw DimensionError("truth and prediction lengths differ");
  Metrics m;
  m.n_classes = n_classes;
  m.confusion.assign(n_classes, std::vector<std::uint64_t>(n_classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || predicted[i] < 0 || static_cast<std::size_t>(truth[i]) >= n_classes ||
        static_cast<std::size_t>(predicted[i]) >= n_classes) {
      throw ConfigError("label outside [0, " + std::to_string(n_classes) + ")");
    }
    ++m.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  std::uint64_t trace = 0;
  for (std::size_t k = 0; k < n_classes; ++k) {
    const std::uint64_t tp = m.confusion[k][k];
    trace += tp;
    std::uint64_t row = 0, col = 0;
    for (std::size_t j = 0; j < n_classes; ++j) {
      row += m.confusion[k][j];
      col += m.confusion[j][k];
    }
    const std::uint64_t fp = col - tp, fn = row - tp;
    m.precision.push_back(col ? static_cast<double>(tp) / static_cast<double>(col) : 0.0);
    m.recall.push_back(row ? static_cast<double>(tp) / static_cast<double>(row) : 0.0);
    const std::uint64_t denom = 2 * tp + fp + fn;
    m.f1.push_back(denom ? static_cast<double>(2 * tp) / static_cast<double>(denom) : 0.0);
  }
  m.accuracy = truth.empty() ? 0.0 : static_cast<double>(trace) / static_cast<double>(truth.size());
  m.macro_f1 = n_classes ? std::accumulate(m.f1.begin(), m.f1.end(), 0.0) / static_cast<double>(n_classes) : 0.0;
  return m;
}

std::vector<int> predict(model::Min2NetParams<float>& params, const EpochedDataset& ds) {
  constexpr std::size_t kChunk = 256;
  std::vector<int> out;
  out.reserve(ds.n_trials());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < ds.n_trials(); start += kChunk) {
    idx.clear();
    for (std::size_t i = start; i < std::min(ds.n_trials(), start + kChunk); ++i) idx.push_back(i);
    const auto probs = model::predict_proba(params, gather_input(ds, idx));
    const std::size_t n = probs.dim(1);
    for (std::size_t b = 0; b < idx.size(); ++b) {
      const float* row = probs.data() + b * n;
      out.push_back(static_cast<int>(std::max_element(row, row + n) - row));
    }
  }
  return out;
}

Metrics evaluate(model::Min2NetParams<float>& params, const EpochedDataset& test) {
  if (test.n_trials() == 0) throw ConfigError("test set is empty");
  return compute_metrics(test.labels, predict(params, test), params.config.classes);
}

}  // namespace min2net::harness
