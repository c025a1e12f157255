#pragma once

// Binary checkpoint ("MN2C"): magic, u32 version, config block (C, T, z, N
// as u32; margin and the three loss weights as f64), u64 seed, u32 record
// count, then per record: u32 name length, name bytes, u32 rank, u32 dims,
// little-endian f32 values. Batch-norm running statistics are stored as
// extra records. A trailing CRC32 covers every preceding byte.

#include <filesystem>
#include <optional>

#include "min2net/model/network.hpp"

namespace min2net::model {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const Min2NetParams<float>& params, const std::filesystem::path& path);

/// Throws IoError when the file cannot be read, IntegrityError on a bad
/// magic/version/CRC or truncated file, and ConfigError when `expected` is
/// given and its architecture (C, T, z, N) differs from the stored one.
Min2NetParams<float> load_checkpoint(const std::filesystem::path& path,
                                     const std::optional<Min2NetConfig>& expected = std::nullopt);

}  // namespace min2net::model
