#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "min2net/dataset.hpp"

namespace min2net::harness {

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

/// k folds whose validation parts partition [0, n); every class is spread so
/// its per-fold counts differ by at most one. Throws ConfigError when a class
/// has fewer than k members.
std::vector<Fold> stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed);

/// Trials of one held-out subject versus a training pool.
struct SubjectSplit {
  std::uint32_t subject = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

using SessionFilter = std::function<bool(std::uint32_t subject, const SessionTag& session)>;

/// Default test-session rule: a subject's online sessions when it has any,
/// otherwise its offline session with the highest index.
SessionFilter designated_test_sessions(const EpochedDataset& ds);

/// Distinct subject ids in ascending order.
std::vector<std::uint32_t> subjects_of(const EpochedDataset& ds);

/// One split per subject: train = every trial of every other subject, test =
/// the held-out subject's trials accepted by `filter`. Throws ConfigError with
/// fewer than two subjects or when a subject has no test trials.
std::vector<SubjectSplit> loso_split(const EpochedDataset& ds, const SessionFilter& filter);

/// One split per subject: train = the subject's trials rejected by `filter`,
/// test = those accepted. Throws ConfigError when either side is empty.
std::vector<SubjectSplit> dependent_split(const EpochedDataset& ds, const SessionFilter& filter);

}  // namespace min2net::harness
