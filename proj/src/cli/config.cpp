#include "min2net/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "min2net/errors.hpp"

namespace min2net::cli {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool bare_key(const std::string& k) {
  return !k.empty() && std::all_of(k.begin(), k.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

class ValueParser {
 public:
  ValueParser(std::string_view text, std::string where) : t_(text), where_(std::move(where)) {}

  Value parse_all() {
    Value v = parse_value();
    skip_ws();
    if (pos_ < t_.size() && t_[pos_] != '#') fail("unexpected text after value");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(where_ + ": " + msg); }

  void skip_ws() {
    while (pos_ < t_.size() && (t_[pos_] == ' ' || t_[pos_] == '\t' || t_[pos_] == '\r')) ++pos_;
  }

  Value parse_value() {
    skip_ws();
    if (pos_ >= t_.size()) fail("missing value");
    const char c = t_[pos_];
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    return parse_scalar();
  }

  Value parse_string() {
    Value v;
    v.kind = Value::Kind::String;
    ++pos_;
    while (true) {
      if (pos_ >= t_.size()) fail("unterminated string");
      const char c = t_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        v.s += c;
        continue;
      }
      if (pos_ >= t_.size()) fail("unterminated escape");
      switch (t_[pos_++]) {
        case '"': v.s += '"'; break;
        case '\\': v.s += '\\'; break;
        case 'n': v.s += '\n'; break;
        case 't': v.s += '\t'; break;
        default: fail("unsupported escape sequence");
      }
    }
    return v;
  }

  Value parse_array() {
    Value v;
    v.kind = Value::Kind::Array;
    ++pos_;
    skip_ws();
    if (pos_ < t_.size() && t_[pos_] == ']') {
      ++pos_;
      return v;
    }
    while (true) {
      v.items.push_back(parse_value());
      if (v.items.back().kind == Value::Kind::Array) fail("nested arrays are not supported");
      skip_ws();
      if (pos_ >= t_.size()) fail("unterminated array");
      if (t_[pos_] == ',') {
        ++pos_;
        skip_ws();
        if (pos_ < t_.size() && t_[pos_] == ']') {
          ++pos_;
          return v;
        }
        continue;
      }
      if (t_[pos_] == ']') {
        ++pos_;
        return v;
      }
      fail("expected ',' or ']' in array");
    }
  }

  Value parse_scalar() {
    std::size_t end = pos_;
    while (end < t_.size() && t_[end] != ',' && t_[end] != ']' && t_[end] != '#' && t_[end] != ' ' &&
           t_[end] != '\t' && t_[end] != '\r') {
      ++end;
    }
    std::string tok(t_.substr(pos_, end - pos_));
    pos_ = end;
    Value v;
    if (tok == "true" || tok == "false") {
      v.kind = Value::Kind::Bool;
      v.b = tok == "true";
      return v;
    }
    tok.erase(std::remove(tok.begin(), tok.end(), '_'), tok.end());
    const bool real = tok.find_first_of(".eEn") != std::string::npos;  // n: nan/inf spellings are rejected below
    if (!real) {
      std::int64_t i = 0;
      const char* first = tok.data() + (tok.size() && tok[0] == '+' ? 1 : 0);
      const auto [p, ec] = std::from_chars(first, tok.data() + tok.size(), i);
      if (ec == std::errc() && p == tok.data() + tok.size() && !tok.empty()) {
        v.kind = Value::Kind::Int;
        v.i = i;
        return v;
      }
      fail("invalid value '" + tok + "'");
    }
    try {
      std::size_t used = 0;
      const double d = std::stod(tok, &used);
      if (used != tok.size() || !std::isfinite(d)) fail("invalid number '" + tok + "'");
      v.kind = Value::Kind::Real;
      v.d = d;
      return v;
    } catch (const std::logic_error&) {
      fail("invalid value '" + tok + "'");
    }
  }

  std::string_view t_;
  std::string where_;
  std::size_t pos_ = 0;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

std::string str_array(const std::vector<std::string>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + quoted(v[i]);
  return out + "]";
}

template <typename T>
void set_count(const Config& cfg, const std::string& key, T& field) {
  if (const auto v = cfg.integer(key)) {
    if (*v < 0 || static_cast<std::uint64_t>(*v) > std::numeric_limits<T>::max()) {
      throw ConfigError(key + " must be a non-negative integer (got " + std::to_string(*v) + ")");
    }
    field = static_cast<T>(*v);
  }
}

void set_int(const Config& cfg, const std::string& key, int& field) {
  if (const auto v = cfg.integer(key)) {
    if (*v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max()) {
      throw ConfigError(key + " is out of range");
    }
    field = static_cast<int>(*v);
  }
}

void set_real(const Config& cfg, const std::string& key, double& field) {
  if (const auto v = cfg.real(key)) field = *v;
}

}  // namespace

Config Config::parse(std::string_view text, const std::string& source) {
  Config cfg;
  std::string section;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view raw = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') {
      if (end == text.size()) break;
      continue;
    }
    if (line[0] == '[') {
      const auto close = line.find(']');
      if (close == std::string::npos) throw ConfigError(where + ": unterminated section header");
      const std::string rest = trim(std::string_view(line).substr(close + 1));
      if (!rest.empty() && rest[0] != '#') throw ConfigError(where + ": unexpected text after section header");
      section = trim(std::string_view(line).substr(1, close - 1));
      if (!bare_key(section)) throw ConfigError(where + ": invalid section name '" + section + "'");
    } else {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
      const std::string key = trim(std::string_view(line).substr(0, eq));
      if (!bare_key(key)) throw ConfigError(where + ": invalid key '" + key + "'");
      const std::string full = section.empty() ? key : section + "." + key;
      if (cfg.values_.count(full)) throw ConfigError(where + ": duplicate key '" + full + "'");
      cfg.values_[full] = ValueParser(std::string_view(line).substr(eq + 1), where).parse_all();
    }
    if (end == text.size()) break;
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::optional<bool> Config::boolean(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (it->second.kind != Value::Kind::Bool) throw ConfigError(key + " must be true or false");
  return it->second.b;
}

std::optional<std::int64_t> Config::integer(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (it->second.kind != Value::Kind::Int) throw ConfigError(key + " must be an integer");
  return it->second.i;
}

std::optional<double> Config::real(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (it->second.kind == Value::Kind::Int) return static_cast<double>(it->second.i);
  if (it->second.kind != Value::Kind::Real) throw ConfigError(key + " must be a number");
  return it->second.d;
}

std::optional<std::string> Config::string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (it->second.kind != Value::Kind::String) throw ConfigError(key + " must be a string");
  return it->second.s;
}

std::optional<std::vector<std::string>> Config::strings(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (it->second.kind == Value::Kind::String) return dataio::parse_transform_list(it->second.s);
  if (it->second.kind != Value::Kind::Array) throw ConfigError(key + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : it->second.items) {
    if (v.kind != Value::Kind::String) throw ConfigError(key + " must be an array of strings");
    out.push_back(v.s);
  }
  return out;
}

void Config::reject_unknown(const std::vector<std::string>& known) const {
  std::string bad;
  for (const auto& [key, v] : values_) {
    if (std::find(known.begin(), known.end(), key) == known.end()) bad += (bad.empty() ? "" : ", ") + key;
  }
  if (!bad.empty()) throw ConfigError("unknown config keys: " + bad);
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "synth.n_subjects", "synth.trials_per_class", "synth.n_classes", "synth.channels", "synth.samples",
      "synth.fs", "synth.mu_hz", "synth.mu_amplitude", "synth.contrast", "synth.noise", "synth.variability",
      "synth.online_fraction", "synth.seed",
      "model.latent", "model.margin", "model.beta_mse", "model.beta_triplet", "model.beta_ce",
      "model.mse_elementwise", "model.bn_momentum", "model.bn_epsilon",
      "train.lr_start", "train.lr_floor", "train.lr_decay", "train.plateau_patience", "train.earlystop_patience",
      "train.min_delta", "train.batch_size", "train.max_epochs",
      "run.scheme", "run.seed", "run.inner_folds", "run.jobs", "run.balance_rest", "run.save_checkpoints",
      "augment.transforms", "augment.sigma", "augment.knots", "augment.segments", "augment.copies",
      "preprocess.low_hz", "preprocess.high_hz", "preprocess.order", "preprocess.target_fs",
      "preprocess.window_start", "preprocess.window_end", "preprocess.rest_start", "preprocess.rest_end",
      "preprocess.channels", "preprocess.standardize"};
  return keys;
}

void apply(const Config& cfg, dataio::SynthSpec& s) {
  set_count(cfg, "synth.n_subjects", s.n_subjects);
  set_count(cfg, "synth.trials_per_class", s.trials_per_class);
  set_count(cfg, "synth.n_classes", s.n_classes);
  set_count(cfg, "synth.channels", s.channels);
  set_count(cfg, "synth.samples", s.samples);
  set_real(cfg, "synth.fs", s.fs);
  set_real(cfg, "synth.mu_hz", s.mu_hz);
  set_real(cfg, "synth.mu_amplitude", s.mu_amplitude);
  set_real(cfg, "synth.contrast", s.contrast);
  set_real(cfg, "synth.noise", s.noise);
  set_real(cfg, "synth.variability", s.variability);
  set_real(cfg, "synth.online_fraction", s.online_fraction);
  set_count(cfg, "synth.seed", s.seed);
}

void apply(const Config& cfg, model::Min2NetConfig& m) {
  set_count(cfg, "model.latent", m.latent);
  set_real(cfg, "model.margin", m.margin);
  set_real(cfg, "model.beta_mse", m.beta_mse);
  set_real(cfg, "model.beta_triplet", m.beta_triplet);
  set_real(cfg, "model.beta_ce", m.beta_ce);
  if (const auto v = cfg.boolean("model.mse_elementwise")) m.mse_elementwise = *v;
  set_real(cfg, "model.bn_momentum", m.bn_momentum);
  set_real(cfg, "model.bn_epsilon", m.bn_epsilon);
}

void apply(const Config& cfg, harness::TrainConfig& t) {
  set_real(cfg, "train.lr_start", t.lr_start);
  set_real(cfg, "train.lr_floor", t.lr_floor);
  set_real(cfg, "train.lr_decay", t.lr_decay);
  set_int(cfg, "train.plateau_patience", t.plateau_patience);
  set_int(cfg, "train.earlystop_patience", t.earlystop_patience);
  set_real(cfg, "train.min_delta", t.min_delta);
  set_count(cfg, "train.batch_size", t.batch_size);
  set_int(cfg, "train.max_epochs", t.max_epochs);
  set_count(cfg, "run.seed", t.seed);
}

void apply(const Config& cfg, dataio::AugmentSpec& a) {
  if (const auto v = cfg.strings("augment.transforms")) a.transforms = *v;
  set_real(cfg, "augment.sigma", a.sigma);
  set_int(cfg, "augment.knots", a.knots);
  set_int(cfg, "augment.segments", a.segments);
  set_int(cfg, "augment.copies", a.copies);
}

void apply(const Config& cfg, preproc::PipelineSpec& p) {
  set_real(cfg, "preprocess.low_hz", p.band.low_hz);
  set_real(cfg, "preprocess.high_hz", p.band.high_hz);
  set_int(cfg, "preprocess.order", p.band.order);
  set_real(cfg, "preprocess.target_fs", p.target_fs);
  set_real(cfg, "preprocess.window_start", p.window.start_s);
  set_real(cfg, "preprocess.window_end", p.window.end_s);
  if (cfg.has("preprocess.rest_start") != cfg.has("preprocess.rest_end")) {
    throw ConfigError("preprocess.rest_start and preprocess.rest_end must be given together");
  }
  if (cfg.has("preprocess.rest_start")) {
    p.rest_window = preproc::EpochWindow{*cfg.real("preprocess.rest_start"), *cfg.real("preprocess.rest_end")};
  }
  if (const auto v = cfg.strings("preprocess.channels")) p.channels = *v;
  if (const auto v = cfg.boolean("preprocess.standardize")) p.standardize = *v;
}

std::string to_toml(const dataio::SynthSpec& s) {
  std::ostringstream os;
  os << "[synth]\n"
     << "n_subjects = " << s.n_subjects << "\ntrials_per_class = " << s.trials_per_class
     << "\nn_classes = " << s.n_classes << "\nchannels = " << s.channels << "\nsamples = " << s.samples
     << "\nfs = " << fmt(s.fs) << "\nmu_hz = " << fmt(s.mu_hz) << "\nmu_amplitude = " << fmt(s.mu_amplitude)
     << "\ncontrast = " << fmt(s.contrast) << "\nnoise = " << fmt(s.noise) << "\nvariability = " << fmt(s.variability)
     << "\nonline_fraction = " << fmt(s.online_fraction) << "\nseed = " << s.seed << "\n";
  return os.str();
}

std::string to_toml(const model::Min2NetConfig& m) {
  std::ostringstream os;
  os << "[model]\n"
     << "# channels = " << m.channels << ", samples = " << m.samples << ", classes = " << m.classes
     << " (from the data)\nlatent = " << m.latent << "\nmargin = " << fmt(m.margin)
     << "\nbeta_mse = " << fmt(m.beta_mse) << "\nbeta_triplet = " << fmt(m.beta_triplet)
     << "\nbeta_ce = " << fmt(m.beta_ce) << "\nmse_elementwise = " << (m.mse_elementwise ? "true" : "false")
     << "\nbn_momentum = " << fmt(m.bn_momentum) << "\nbn_epsilon = " << fmt(m.bn_epsilon) << "\n";
  return os.str();
}

std::string to_toml(const harness::TrainConfig& t) {
  std::ostringstream os;
  os << "[train]\n"
     << "lr_start = " << fmt(t.lr_start) << "\nlr_floor = " << fmt(t.lr_floor) << "\nlr_decay = " << fmt(t.lr_decay)
     << "\nplateau_patience = " << t.plateau_patience << "\nearlystop_patience = " << t.earlystop_patience
     << "\nmin_delta = " << fmt(t.min_delta) << "\nbatch_size = " << t.batch_size
     << "\nmax_epochs = " << t.max_epochs << "\n";
  return os.str();
}

std::string to_toml(const dataio::AugmentSpec& a) {
  std::ostringstream os;
  os << "[augment]\n"
     << "transforms = " << str_array(a.transforms) << "\nsigma = " << fmt(a.sigma) << "\nknots = " << a.knots
     << "\nsegments = " << a.segments << "\ncopies = " << a.copies << "\n";
  return os.str();
}

std::string to_toml(const preproc::PipelineSpec& p) {
  std::ostringstream os;
  os << "[preprocess]\n"
     << "low_hz = " << fmt(p.band.low_hz) << "\nhigh_hz = " << fmt(p.band.high_hz) << "\norder = " << p.band.order
     << "\ntarget_fs = " << fmt(p.target_fs) << "\nwindow_start = " << fmt(p.window.start_s)
     << "\nwindow_end = " << fmt(p.window.end_s) << "\n";
  if (p.rest_window) {
    os << "rest_start = " << fmt(p.rest_window->start_s) << "\nrest_end = " << fmt(p.rest_window->end_s) << "\n";
  }
  os << "channels = " << str_array(p.channels) << "\nstandardize = " << (p.standardize ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace min2net::cli
