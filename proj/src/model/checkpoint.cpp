#include "min2net/model/checkpoint.hpp"

#include <map>
#include <string>

#include "min2net/binio.hpp"

namespace min2net::model {
namespace {

constexpr std::string_view kMagic = "MN2C";

void write_record(binio::ByteWriter& w, const std::string& name, const nn::Tensor& t) {
  w.u32(static_cast<std::uint32_t>(name.size()));
  w.bytes(name);
  w.u32(static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.shape()) w.u32(static_cast<std::uint32_t>(d));
  w.f32s(t.values());
}

std::vector<std::pair<std::string, const nn::Tensor*>> running_stats(const Min2NetParams<float>& p) {
  return {{"encoder.bn1.running_mean", &p.bn1.running_mean},
          {"encoder.bn1.running_var", &p.bn1.running_var},
          {"encoder.bn2.running_mean", &p.bn2.running_mean},
          {"encoder.bn2.running_var", &p.bn2.running_var}};
}

}  // namespace

void save_checkpoint(const Min2NetParams<float>& params, const std::filesystem::path& path) {
  binio::ByteWriter w;
  const auto& c = params.config;
  w.bytes(kMagic);
  w.u32(kCheckpointVersion);
  w.u32(c.channels);
  w.u32(c.samples);
  w.u32(c.latent);
  w.u32(c.classes);
  w.f64(c.margin);
  w.f64(c.beta_mse);
  w.f64(c.beta_triplet);
  w.f64(c.beta_ce);
  w.u64(params.seed);
  const auto stats = running_stats(params);
  w.u32(static_cast<std::uint32_t>(kParamCount + stats.size()));
  for (const auto* p : params.parameters()) write_record(w, p->name, p->value);
  for (const auto& [name, t] : stats) write_record(w, name, *t);
  w.seal();
  binio::write_file(path, w.buffer());
}

Min2NetParams<float> load_checkpoint(const std::filesystem::path& path, const std::optional<Min2NetConfig>& expected) {
  const auto file = binio::read_file(path);
  const std::string src = path.string();
  binio::ByteReader r(binio::checked_payload(file, src), src);
  if (r.bytes(4) != kMagic) throw IntegrityError(src + ": not a checkpoint (bad magic)");
  if (const auto v = r.u32(); v != kCheckpointVersion) {
    throw IntegrityError(src + ": unsupported checkpoint version " + std::to_string(v));
  }
  Min2NetConfig cfg;
  cfg.channels = r.u32();
  cfg.samples = r.u32();
  cfg.latent = r.u32();
  cfg.classes = r.u32();
  cfg.margin = r.f64();
  cfg.beta_mse = r.f64();
  cfg.beta_triplet = r.f64();
  cfg.beta_ce = r.f64();
  const std::uint64_t seed = r.u64();

  if (expected) {
    auto mismatch = [&](const char* what, std::uint32_t stored, std::uint32_t want) {
      if (stored != want) {
        throw ConfigError(src + ": checkpoint " + what + "=" + std::to_string(stored) + " but expected " +
                          std::to_string(want));
      }
    };
    mismatch("C", cfg.channels, expected->channels);
    mismatch("T", cfg.samples, expected->samples);
    mismatch("z", cfg.latent, expected->latent);
    mismatch("N", cfg.classes, expected->classes);
    cfg.mse_elementwise = expected->mse_elementwise;
    cfg.bn_momentum = expected->bn_momentum;
    cfg.bn_epsilon = expected->bn_epsilon;
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw IntegrityError(src + ": stored configuration is invalid: " + e.what());
  }

  std::map<std::string, nn::Tensor> records;
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = r.bytes(r.u32());
    const std::uint32_t rank = r.u32();
    nn::Shape shape(rank);
    for (auto& d : shape) d = r.u32();
    nn::Tensor t(shape);
    r.f32s(t.values());
    records.emplace(name, std::move(t));
  }
  if (r.remaining() != 0) throw IntegrityError(src + ": trailing bytes after records");

  // Start from a freshly built model so every shape is checked against the config.
  Min2NetParams<float> params = build<float>(cfg, seed);
  auto take = [&](const std::string& name, nn::Tensor& dst) {
    auto it = records.find(name);
    if (it == records.end()) throw IntegrityError(src + ": missing record '" + name + "'");
    if (it->second.shape() != dst.shape()) {
      throw IntegrityError(src + ": record '" + name + "' has shape " + nn::shape_str(it->second.shape()) +
                           ", expected " + nn::shape_str(dst.shape()));
    }
    dst = std::move(it->second);
  };
  for (auto* p : params.parameters()) {
    take(p->name, p->value);
    p->zero_grad();
  }
  take("encoder.bn1.running_mean", params.bn1.running_mean);
  take("encoder.bn1.running_var", params.bn1.running_var);
  take("encoder.bn2.running_mean", params.bn2.running_mean);
  take("encoder.bn2.running_var", params.bn2.running_var);
  return params;
}

}  // namespace min2net::model
