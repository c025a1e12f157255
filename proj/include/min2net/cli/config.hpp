#pragma once

// Config files use a small TOML subset: [section] headers, key = value lines,
// '#' comments, values that are booleans, integers, floats, double-quoted
// strings or single-line arrays of those.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "min2net/dataio/augment.hpp"
#include "min2net/dataio/synth.hpp"
#include "min2net/harness/trainer.hpp"
#include "min2net/model/config.hpp"
#include "min2net/preproc/pipeline.hpp"

namespace min2net::cli {

struct Value {
  enum class Kind { Bool, Int, Real, String, Array } kind = Kind::String;
  bool b = false;
  std::int64_t i = 0;
  double d = 0.0;
  std::string s;
  std::vector<Value> items;
};

class Config {
 public:
  /// Throws ConfigError with "source:line" on syntax errors or duplicate keys.
  static Config parse(std::string_view text, const std::string& source = "<config>");
  /// Throws IoError when the file cannot be read.
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, Value>& values() const noexcept { return values_; }

  // Typed lookups; a present key of the wrong type throws ConfigError naming it.
  std::optional<bool> boolean(const std::string& key) const;
  std::optional<std::int64_t> integer(const std::string& key) const;
  std::optional<double> real(const std::string& key) const;  // integers widen
  std::optional<std::string> string(const std::string& key) const;
  /// Array of strings, or one comma separated string.
  std::optional<std::vector<std::string>> strings(const std::string& key) const;

  /// Throws ConfigError listing every key outside `known`.
  void reject_unknown(const std::vector<std::string>& known) const;

 private:
  std::map<std::string, Value> values_;
};

/// Every key the command-line tool understands.
const std::vector<std::string>& known_keys();

// Each apply_* sets only the fields present in the config.
void apply(const Config& cfg, dataio::SynthSpec& spec);
void apply(const Config& cfg, model::Min2NetConfig& model);
void apply(const Config& cfg, harness::TrainConfig& train);
void apply(const Config& cfg, dataio::AugmentSpec& augment);
void apply(const Config& cfg, preproc::PipelineSpec& pipeline);

// Resolved settings in the same syntax, one section each.
std::string to_toml(const dataio::SynthSpec& spec);
std::string to_toml(const model::Min2NetConfig& model);
std::string to_toml(const harness::TrainConfig& train);
std::string to_toml(const dataio::AugmentSpec& augment);
std::string to_toml(const preproc::PipelineSpec& pipeline);

}  // namespace min2net::cli
