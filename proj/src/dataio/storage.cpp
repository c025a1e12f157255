#include "min2net/dataio/storage.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "min2net/binio.hpp"

namespace min2net::dataio {
namespace {

using nlohmann::json;

constexpr std::string_view kMagic = "MIEG";
constexpr const char* kManifestName = "manifest.json";
constexpr const char* kFormat = "min2net-dataset";

std::string subject_file(std::uint32_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "subject_%03u.mieg", id);
  return buf;
}

json session_json(const SessionTag& s) { return {{"kind", s.online ? "online" : "offline"}, {"index", s.index}}; }

SessionTag session_from(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "online" && kind != "offline") throw IntegrityError("unknown session kind '" + kind + "' in manifest");
  return {kind == "online", static_cast<std::uint8_t>(j.at("index").get<unsigned>() & 0x7Fu)};
}

}  // namespace

DatasetManifest write_dataset(const EpochedDataset& ds, const std::filesystem::path& dir, const std::string& name) {
  ds.validate();
  for (int y : ds.labels) {
    if (y > 255) throw ConfigError("label " + std::to_string(y) + " does not fit the u8 label field");
  }
  std::filesystem::create_directories(dir);

  DatasetManifest m;
  m.dataset = name;
  m.fs = ds.fs;
  m.channels = ds.channels;
  m.samples = ds.samples;
  m.channel_names = ds.channel_names;
  m.class_names = ds.class_names;

  std::vector<std::uint32_t> first_seen;
  std::map<std::uint32_t, std::vector<std::size_t>> by_subject;
  for (std::size_t i = 0; i < ds.n_trials(); ++i) {
    const auto s = ds.subject_ids[i];
    if (!by_subject.count(s)) first_seen.push_back(s);
    by_subject[s].push_back(i);
    if (m.order.empty() || m.order.back().subject != s) m.order.push_back({s, 0});
    ++m.order.back().trials;
  }

  for (std::uint32_t id : first_seen) {
    const auto& idx = by_subject[id];
    binio::ByteWriter w;
    w.bytes(kMagic);
    w.u32(kDatasetVersion);
    w.u32(static_cast<std::uint32_t>(idx.size()));
    w.u32(static_cast<std::uint32_t>(ds.channels));
    w.u32(static_cast<std::uint32_t>(ds.samples));
    w.f32(ds.fs);
    SubjectEntry e;
    e.id = id;
    e.file = subject_file(id);
    e.trials = idx.size();
    for (std::size_t i : idx) w.u8(static_cast<std::uint8_t>(ds.labels[i]));
    for (std::size_t i : idx) {
      w.u8(ds.sessions[i].encode());
      if (std::find(e.sessions.begin(), e.sessions.end(), ds.sessions[i]) == e.sessions.end()) {
        e.sessions.push_back(ds.sessions[i]);
      }
    }
    for (std::size_t i : idx) w.f32s(ds.trial(i));
    w.seal();
    binio::write_file(dir / e.file, w.buffer());
    e.crc32 = binio::crc_hex(binio::stored_crc(w.buffer(), e.file));
    m.subjects.push_back(std::move(e));
  }

  json j;
  j["format"] = kFormat;
  j["version"] = m.version;
  j["dataset"] = m.dataset;
  j["fs"] = m.fs;
  j["n_channels"] = m.channels;
  j["n_samples"] = m.samples;
  j["channel_names"] = m.channel_names;
  j["class_names"] = m.class_names;
  j["subjects"] = json::array();
  for (const auto& e : m.subjects) {
    json sessions = json::array();
    for (const auto& s : e.sessions) sessions.push_back(session_json(s));
    j["subjects"].push_back(
        {{"id", e.id}, {"file", e.file}, {"trials", e.trials}, {"sessions", sessions}, {"crc32", e.crc32}});
  }
  j["order"] = json::array();
  for (const auto& s : m.order) j["order"].push_back({s.subject, s.trials});
  std::ofstream out(dir / kManifestName, std::ios::trunc);
  if (!out) throw IoError("cannot write " + (dir / kManifestName).string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("error writing " + (dir / kManifestName).string());
  return m;
}

DatasetManifest read_manifest(const std::filesystem::path& dir) {
  const auto path = dir / kManifestName;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string src = path.string();
  DatasetManifest m;
  try {
    const json j = json::parse(in);
    if (j.at("format").get<std::string>() != kFormat) throw IntegrityError(src + ": not a dataset manifest");
    m.version = j.at("version").get<std::uint32_t>();
    if (m.version != kDatasetVersion) {
      throw IntegrityError(src + ": unsupported dataset version " + std::to_string(m.version));
    }
    m.dataset = j.value("dataset", "");
    m.fs = j.at("fs").get<float>();
    m.channels = j.at("n_channels").get<std::size_t>();
    m.samples = j.at("n_samples").get<std::size_t>();
    m.channel_names = j.at("channel_names").get<std::vector<std::string>>();
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    for (const auto& e : j.at("subjects")) {
      SubjectEntry s;
      s.id = e.at("id").get<std::uint32_t>();
      s.file = e.at("file").get<std::string>();
      s.trials = e.at("trials").get<std::size_t>();
      for (const auto& t : e.at("sessions")) s.sessions.push_back(session_from(t));
      s.crc32 = e.at("crc32").get<std::string>();
      m.subjects.push_back(std::move(s));
    }
    for (const auto& s : j.at("order")) m.order.push_back({s.at(0).get<std::uint32_t>(), s.at(1).get<std::size_t>()});
  } catch (const json::exception& e) {
    throw IntegrityError(src + ": malformed manifest: " + e.what());
  }
  return m;
}

EpochedDataset read_dataset(const std::filesystem::path& dir) {
  const DatasetManifest m = read_manifest(dir);
  EpochedDataset out;
  out.channels = m.channels;
  out.samples = m.samples;
  out.fs = m.fs;
  out.channel_names = m.channel_names;
  out.class_names = m.class_names;

  std::map<std::uint32_t, EpochedDataset> parts;
  for (const auto& e : m.subjects) {
    const auto path = dir / e.file;
    const std::string src = path.string();
    const auto file = binio::read_file(path);
    binio::ByteReader r(binio::checked_payload(file, src), src);
    if (r.bytes(4) != kMagic) throw IntegrityError(src + ": bad magic");
    if (const auto v = r.u32(); v != kDatasetVersion) {
      throw IntegrityError(src + ": unsupported version " + std::to_string(v));
    }
    if (binio::crc_hex(binio::stored_crc(file, src)) != e.crc32) {
      throw IntegrityError(src + ": checksum differs from manifest");
    }
    const std::size_t n = r.u32();
    if (r.u32() != m.channels || r.u32() != m.samples) throw IntegrityError(src + ": geometry differs from manifest");
    const float fs = r.f32();
    if (fs != m.fs) throw IntegrityError(src + ": sampling rate differs from manifest");
    if (n != e.trials) throw IntegrityError(src + ": trial count differs from manifest");
    EpochedDataset part = out.empty_like();
    for (std::size_t i = 0; i < n; ++i) {
      const int y = r.u8();
      if (!m.class_names.empty() && static_cast<std::size_t>(y) >= m.class_names.size()) {
        throw IntegrityError(src + ": label " + std::to_string(y) + " outside the class list");
      }
      part.labels.push_back(y);
    }
    for (std::size_t i = 0; i < n; ++i) part.sessions.push_back(SessionTag::decode(r.u8()));
    part.subject_ids.assign(n, e.id);
    part.data.resize(n * m.channels * m.samples);
    if (r.remaining() != part.data.size() * 4) throw IntegrityError(src + ": sample block size does not match header");
    r.f32s(part.data);
    parts.emplace(e.id, std::move(part));
  }

  // Re-interleave subject runs into the original trial order.
  std::map<std::uint32_t, std::size_t> cursor;
  for (const auto& seg : m.order) {
    auto it = parts.find(seg.subject);
    if (it == parts.end()) throw IntegrityError(dir.string() + ": order refers to unknown subject " + std::to_string(seg.subject));
    std::size_t& c = cursor[seg.subject];
    if (c + seg.trials > it->second.n_trials()) throw IntegrityError(dir.string() + ": order overruns subject " + std::to_string(seg.subject));
    for (std::size_t k = 0; k < seg.trials; ++k) out.append_trial(it->second, c + k);
    c += seg.trials;
  }
  for (const auto& [id, part] : parts) {
    if (cursor[id] != part.n_trials()) throw IntegrityError(dir.string() + ": order does not cover subject " + std::to_string(id));
  }
  return out;
}

}  // namespace min2net::dataio
