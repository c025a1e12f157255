#include "min2net/harness/split.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>

#include "min2net/errors.hpp"

namespace min2net::harness {

std::vector<Fold> stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("stratified k-fold needs k >= 2");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (const auto& [label, members] : by_class) {
    if (members.size() < k) {
      throw ConfigError("class " + std::to_string(label) + " has " + std::to_string(members.size()) +
                        " trials, fewer than the " + std::to_string(k) + " folds");
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> val(k);
  // Continue the round robin across classes so total fold sizes stay within one as well.
  std::size_t next = 0;
  for (auto& [label, members] : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t idx : members) val[next++ % k].push_back(idx);
  }
  std::vector<Fold> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::sort(val[f].begin(), val[f].end());
    folds[f].val = val[f];
    for (std::size_t g = 0; g < k; ++g) {
      if (g != f) folds[f].train.insert(folds[f].train.end(), val[g].begin(), val[g].end());
    }
    std::sort(folds[f].train.begin(), folds[f].train.end());
  }
  return folds;
}

std::vector<std::uint32_t> subjects_of(const EpochedDataset& ds) {
  std::set<std::uint32_t> s(ds.subject_ids.begin(), ds.subject_ids.end());
  return {s.begin(), s.end()};
}

SessionFilter designated_test_sessions(const EpochedDataset& ds) {
  std::map<std::uint32_t, SessionTag> pick;
  std::map<std::uint32_t, bool> has_online;
  for (std::size_t i = 0; i < ds.n_trials(); ++i) {
    const auto s = ds.subject_ids[i];
    if (ds.sessions[i].online) has_online[s] = true;
    if (ds.sessions[i].online) continue;
    const auto it = pick.find(s);
    if (it == pick.end() || ds.sessions[i].index > it->second.index) pick[s] = ds.sessions[i];
  }
  return [pick, has_online](std::uint32_t subject, const SessionTag& tag) {
    if (has_online.count(subject)) return tag.online;
    const auto it = pick.find(subject);
    return it != pick.end() && tag == it->second;
  };
}

std::vector<SubjectSplit> loso_split(const EpochedDataset& ds, const SessionFilter& filter) {
  const auto subjects = subjects_of(ds);
  if (subjects.size() < 2) throw ConfigError("leave-one-subject-out needs at least two subjects");
  std::vector<SubjectSplit> out;
  for (std::uint32_t s : subjects) {
    SubjectSplit split{s, {}, {}};
    for (std::size_t i = 0; i < ds.n_trials(); ++i) {
      if (ds.subject_ids[i] != s) split.train.push_back(i);
      else if (filter(s, ds.sessions[i])) split.test.push_back(i);
    }
    if (split.test.empty()) throw ConfigError("subject " + std::to_string(s) + " has no trials in its test session");
    out.push_back(std::move(split));
  }
  return out;
}

std::vector<SubjectSplit> dependent_split(const EpochedDataset& ds, const SessionFilter& filter) {
  std::vector<SubjectSplit> out;
  for (std::uint32_t s : subjects_of(ds)) {
    SubjectSplit split{s, {}, {}};
    for (std::size_t i = 0; i < ds.n_trials(); ++i) {
      if (ds.subject_ids[i] != s) continue;
      (filter(s, ds.sessions[i]) ? split.test : split.train).push_back(i);
    }
    if (split.test.empty()) throw ConfigError("subject " + std::to_string(s) + " has no trials in its test session");
    if (split.train.empty()) {
      throw ConfigError("subject " + std::to_string(s) +
                        " has a single session; the subject-dependent scheme needs separate training and test sessions");
    }
    out.push_back(std::move(split));
  }
  return out;
}

}  // namespace min2net::harness
