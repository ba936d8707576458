#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dioph::cli {

std::uint64_t fnv1a(std::string_view bytes);

/// Hex digest of the command name and the canonical (sorted-key) JSON inputs.
std::string cache_key(const std::string& command, const nlohmann::json& inputs);

/// Line-oriented result store `<dir>/cache.v1.tsv`, one entry per line:
/// key, checksum of the payload, payload (compact JSON). Later lines win.
/// Corrupt lines are skipped with a warning; I/O failures turn the cache off.
class ResultCache {
 public:
  /// --cache-dir, then DIOPH_CACHE_DIR, then $HOME/.cache/dioph.
  static std::optional<std::filesystem::path> default_dir(const std::optional<std::string>& flag);

  ResultCache() = default;  // disabled
  explicit ResultCache(std::filesystem::path dir);

  bool enabled() const { return enabled_; }
  const std::filesystem::path& file() const { return file_; }

  std::optional<nlohmann::json> get(const std::string& key);
  void put(const std::string& key, const nlohmann::json& payload);

  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  bool enabled_ = false;
  std::filesystem::path file_;
  std::vector<std::string> warnings_;
};

}  // namespace dioph::cli
