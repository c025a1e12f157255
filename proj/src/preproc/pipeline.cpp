#include "min2net/preproc/pipeline.hpp"

#include <cmath>

#include "min2net/preproc/resample.hpp"

namespace min2net::preproc {

EpochedDataset epoch(const RawRecording& rec, const EpochWindow& window, const std::map<std::int32_t, int>& class_map) {
  rec.validate();
  if (!(window.end_s > window.start_s)) throw ConfigError("epoch window end must exceed its start");
  const auto offset = static_cast<std::int64_t>(std::llround(window.start_s * rec.fs));
  const auto length = static_cast<std::int64_t>(std::llround((window.end_s - window.start_s) * rec.fs));
  if (length <= 0) throw ConfigError("epoch window is shorter than one sample");

  EpochedDataset out;
  out.channels = rec.n_channels();
  out.samples = static_cast<std::size_t>(length);
  out.fs = static_cast<float>(rec.fs);
  out.channel_names = rec.channel_names;
  for (std::size_t i = 0; i < rec.events.size(); ++i) {
    const Event& e = rec.events[i];
    auto it = class_map.find(e.code);
    if (it == class_map.end()) continue;
    const std::int64_t begin = static_cast<std::int64_t>(e.onset) + offset;
    if (begin < 0 || begin + length > static_cast<std::int64_t>(rec.n_samples)) {
      throw ConfigError("event " + std::to_string(i) + " (code " + std::to_string(e.code) + " at sample " +
                        std::to_string(e.onset) + ") does not fit the epoch window");
    }
    for (std::size_t c = 0; c < out.channels; ++c) {
      const auto ch = rec.channel(c).subspan(static_cast<std::size_t>(begin), static_cast<std::size_t>(length));
      for (double v : ch) out.data.push_back(static_cast<float>(v));
    }
    out.labels.push_back(it->second);
    out.subject_ids.push_back(rec.subject);
    out.sessions.push_back(rec.session);
  }
  return out;
}

void PipelineSpec::validate() const {
  if (band.order < 1) throw ConfigError("filter order must be >= 1");
  if (!(band.low_hz > 0.0 && band.low_hz < band.high_hz)) {
    throw ConfigError("band edges must satisfy 0 < low < high (got " + std::to_string(band.low_hz) + ":" +
                      std::to_string(band.high_hz) + ")");
  }
  if (!(target_fs > 0.0)) throw ConfigError("target sampling rate must be positive");
  if (!(band.high_hz < target_fs / 2.0)) throw ConfigError("band upper edge must be below the target Nyquist rate");
  if (!(window.end_s > window.start_s)) throw ConfigError("epoch window end must exceed its start");
  if (rest_window && !(rest_window->end_s > rest_window->start_s)) {
    throw ConfigError("rest window end must exceed its start");
  }
}

namespace {

void standardize_trials(EpochedDataset& ds) {
  for (std::size_t i = 0; i < ds.n_trials(); ++i) {
    auto t = ds.trial(i);
    for (std::size_t c = 0; c < ds.channels; ++c) {
      auto row = t.subspan(c * ds.samples, ds.samples);
      double mean = 0.0, var = 0.0;
      for (float v : row) mean += v;
      mean /= static_cast<double>(row.size());
      for (float v : row) var += (v - mean) * (v - mean);
      const double sd = std::sqrt(var / static_cast<double>(row.size()));
      for (float& v : row) v = static_cast<float>(sd > 0.0 ? (v - mean) / sd : 0.0);
    }
  }
}

}  // namespace

EpochedDataset preprocess_pipeline(const RawRecording& rec, const PipelineSpec& spec,
                                   const std::vector<ClassCode>& classes) {
  spec.validate();
  RawRecording work = spec.channels.empty() ? rec : select_channels(rec, spec.channels);
  work.validate();

  FilterSpec band = spec.band;
  band.fs = work.fs;
  const BiquadCascade filter = butter_bandpass(band);
  const RationalRatio ratio = rational_ratio(work.fs, spec.target_fs);

  RawRecording out;
  out.fs = spec.target_fs;
  out.channel_names = work.channel_names;
  out.subject = work.subject;
  out.session = work.session;
  for (std::size_t c = 0; c < work.n_channels(); ++c) {
    const auto filtered = filtfilt(filter, work.channel(c));
    const auto resampled = resample(filtered, ratio);
    if (c == 0) out.n_samples = resampled.size();
    out.samples.insert(out.samples.end(), resampled.begin(), resampled.end());
  }
  if (work.n_channels() == 0) out.n_samples = (work.n_samples * ratio.up + ratio.down - 1) / ratio.down;
  for (const Event& e : work.events) {
    const auto onset = (static_cast<std::uint64_t>(e.onset) * ratio.up * 2 + ratio.down) / (2 * ratio.down);
    out.events.push_back({static_cast<std::uint32_t>(std::min<std::uint64_t>(onset, out.n_samples ? out.n_samples - 1 : 0)),
                          e.code});
  }

  std::map<std::int32_t, int> class_map;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    class_map.emplace(classes[i].code, static_cast<int>(i));
    names.push_back(classes[i].name);
  }
  EpochedDataset ds = epoch(out, spec.window, class_map);
  if (spec.rest_window) {
    std::map<std::int32_t, int> rest_map;
    for (const auto& [code, label] : class_map) rest_map.emplace(code, static_cast<int>(classes.size()));
    ds.extend(epoch(out, *spec.rest_window, rest_map));
    names.push_back("rest");
  }
  ds.class_names = names;
  if (spec.standardize) standardize_trials(ds);
  return ds;
}

EpochedDataset preprocess_directory(const std::filesystem::path& raw_dir, const PipelineSpec& spec,
                                    const std::function<void(const RawEntry&, std::size_t)>& progress) {
  const RawManifest manifest = read_raw_manifest(raw_dir);
  std::optional<EpochedDataset> all;
  for (const auto& entry : manifest.recordings) {
    const RawRecording rec = load_raw_entry(entry, raw_dir);
    EpochedDataset ds = preprocess_pipeline(rec, spec, manifest.classes);
    if (progress) progress(entry, ds.n_trials());
    if (!all) {
      all = std::move(ds);
    } else {
      if (all->channel_names != ds.channel_names) {
        throw ConfigError(entry.file + ": channel list differs from earlier recordings");
      }
      all->extend(ds);
    }
  }
  if (!all) throw ConfigError(raw_dir.string() + ": manifest lists no recordings");
  return *all;
}

}  // namespace min2net::preproc
