#include "min2net/preproc/recording.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>

#include "min2net/binio.hpp"

namespace min2net::preproc {
namespace {

using nlohmann::json;

constexpr std::string_view kMagic = "MIRW";
constexpr const char* kManifestName = "manifest.json";
constexpr const char* kRawFormat = "min2net-raw";

json session_json(const SessionTag& s) { return {{"kind", s.online ? "online" : "offline"}, {"index", s.index}}; }

SessionTag session_from(const json& j, const std::string& src) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "online" && kind != "offline") throw IntegrityError(src + ": unknown session kind '" + kind + "'");
  const int index = j.at("index").get<int>();
  if (index < 0 || index > 127) throw IntegrityError(src + ": session index out of range");
  return {kind == "online", static_cast<std::uint8_t>(index)};
}

}  // namespace

void RawRecording::validate() const {
  if (!(fs > 0.0)) throw ConfigError("recording sampling rate must be positive");
  if (samples.size() != n_channels() * n_samples) {
    throw DimensionError("recording holds " + std::to_string(samples.size()) + " values, expected " +
                         std::to_string(n_channels() * n_samples));
  }
  for (const auto& e : events) {
    if (e.onset >= n_samples) {
      throw ConfigError("event code " + std::to_string(e.code) + " at sample " + std::to_string(e.onset) +
                        " lies outside the recording (" + std::to_string(n_samples) + " samples)");
    }
  }
}

RawRecording select_channels(const RawRecording& rec, const std::vector<std::string>& wanted) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < rec.channel_names.size(); ++i) index.emplace(rec.channel_names[i], i);
  std::string missing;
  for (const auto& name : wanted) {
    if (!index.count(name)) missing += (missing.empty() ? "" : ", ") + name;
  }
  if (!missing.empty()) throw ConfigError("channels not found in recording: " + missing);

  RawRecording out = rec;
  out.channel_names = wanted;
  out.samples.resize(wanted.size() * rec.n_samples);
  for (std::size_t c = 0; c < wanted.size(); ++c) {
    const auto src = rec.channel(index.at(wanted[c]));
    std::copy(src.begin(), src.end(), out.channel(c).begin());
  }
  return out;
}

void write_raw(const RawRecording& rec, const std::filesystem::path& path) {
  rec.validate();
  binio::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kRawVersion);
  w.u32(static_cast<std::uint32_t>(rec.n_channels()));
  w.u32(static_cast<std::uint32_t>(rec.n_samples));
  w.u32(static_cast<std::uint32_t>(rec.events.size()));
  w.f32(static_cast<float>(rec.fs));
  w.u32(rec.subject);
  w.u8(rec.session.online ? 1 : 0);
  w.u8(rec.session.index);
  for (const auto& name : rec.channel_names) {
    if (name.size() > 0xFFFF) throw ConfigError("channel name too long");
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.bytes(name);
  }
  for (const auto& e : rec.events) {
    w.u32(e.onset);
    w.i32(e.code);
  }
  for (double v : rec.samples) w.f32(static_cast<float>(v));
  w.seal();
  binio::write_file(path, w.buffer());
}

RawRecording read_raw(const std::filesystem::path& path) {
  const auto file = binio::read_file(path);
  const std::string src = path.string();
  if (file.size() < 4 || std::string_view(reinterpret_cast<const char*>(file.data()), 4) != kMagic) {
    throw IntegrityError(src + ": not a raw recording (bad magic)");
  }
  binio::ByteReader r(binio::checked_payload(file, src), src);
  r.bytes(4);
  if (const auto v = r.u32(); v != kRawVersion) {
    throw IntegrityError(src + ": unsupported raw format version " + std::to_string(v));
  }
  RawRecording rec;
  const std::uint32_t n_channels = r.u32();
  rec.n_samples = r.u32();
  const std::uint32_t n_events = r.u32();
  rec.fs = r.f32();
  rec.subject = r.u32();
  const std::uint8_t kind = r.u8();
  if (kind > 1) throw IntegrityError(src + ": unknown session kind " + std::to_string(kind));
  rec.session.online = kind == 1;
  rec.session.index = r.u8();
  for (std::uint32_t c = 0; c < n_channels; ++c) rec.channel_names.push_back(r.bytes(r.u16()));
  for (std::uint32_t e = 0; e < n_events; ++e) {
    Event ev;
    ev.onset = r.u32();
    ev.code = r.i32();
    rec.events.push_back(ev);
  }
  const std::size_t total = static_cast<std::size_t>(n_channels) * rec.n_samples;
  if (r.remaining() != total * 4) throw IntegrityError(src + ": sample block size does not match header");
  rec.samples.resize(total);
  for (auto& v : rec.samples) v = r.f32();
  try {
    rec.validate();
  } catch (const ConfigError& e) {
    throw IntegrityError(src + ": " + e.what());
  }
  return rec;
}

void write_raw_manifest(const RawManifest& m, const std::filesystem::path& dir) {
  json j;
  j["format"] = kRawFormat;
  j["version"] = kRawVersion;
  j["dataset"] = m.dataset;
  j["classes"] = json::array();
  for (const auto& c : m.classes) j["classes"].push_back({{"name", c.name}, {"code", c.code}});
  j["recordings"] = json::array();
  for (const auto& e : m.recordings) {
    j["recordings"].push_back(
        {{"file", e.file}, {"subject", e.subject}, {"session", session_json(e.session)}, {"crc32", e.crc32}});
  }
  j["absent_subjects"] = m.absent_subjects;
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / kManifestName, std::ios::trunc);
  if (!out) throw IoError("cannot write " + (dir / kManifestName).string());
  out << j.dump(2) << '\n';
}

RawManifest read_raw_manifest(const std::filesystem::path& dir) {
  const auto path = dir / kManifestName;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string src = path.string();
  RawManifest m;
  try {
    const json j = json::parse(in);
    if (j.at("format").get<std::string>() != kRawFormat) throw IntegrityError(src + ": not a raw manifest");
    if (j.at("version").get<std::uint32_t>() != kRawVersion) throw IntegrityError(src + ": unsupported version");
    m.dataset = j.value("dataset", "");
    for (const auto& c : j.at("classes")) m.classes.push_back({c.at("name").get<std::string>(), c.at("code").get<std::int32_t>()});
    for (const auto& e : j.at("recordings")) {
      m.recordings.push_back({e.at("file").get<std::string>(), e.at("subject").get<std::uint32_t>(),
                              session_from(e.at("session"), src), e.at("crc32").get<std::string>()});
    }
    if (j.contains("absent_subjects")) m.absent_subjects = j["absent_subjects"].get<std::vector<std::uint32_t>>();
  } catch (const json::exception& e) {
    throw IntegrityError(src + ": malformed manifest: " + e.what());
  }
  return m;
}

RawEntry add_raw_recording(const RawRecording& rec, const std::filesystem::path& dir, const std::string& file_name) {
  std::filesystem::create_directories(dir);
  write_raw(rec, dir / file_name);
  const auto bytes = binio::read_file(dir / file_name);
  return {file_name, rec.subject, rec.session, binio::crc_hex(binio::stored_crc(bytes, file_name))};
}

RawRecording load_raw_entry(const RawEntry& entry, const std::filesystem::path& dir) {
  const auto path = dir / entry.file;
  RawRecording rec = read_raw(path);
  const auto bytes = binio::read_file(path);
  if (binio::crc_hex(binio::stored_crc(bytes, path.string())) != entry.crc32) {
    throw IntegrityError(path.string() + ": checksum differs from manifest");
  }
  if (rec.subject != entry.subject || rec.session != entry.session) {
    throw IntegrityError(path.string() + ": subject/session header differs from manifest");
  }
  return rec;
}

}  // namespace min2net::preproc
