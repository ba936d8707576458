#include "cache.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace dioph::cli {

namespace {

std::string hex(std::uint64_t value) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << value;
  return out.str();
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string cache_key(const std::string& command, const nlohmann::json& inputs) {
  return hex(fnv1a(command + "\n" + inputs.dump()));
}

std::optional<std::filesystem::path> ResultCache::default_dir(const std::optional<std::string>& flag) {
  if (flag) return std::filesystem::path(*flag);
  if (const char* env = std::getenv("DIOPH_CACHE_DIR"); env && *env) return std::filesystem::path(env);
  if (const char* home = std::getenv("HOME"); home && *home) {
    return std::filesystem::path(home) / ".cache" / "dioph";
  }
  return std::nullopt;
}

ResultCache::ResultCache(std::filesystem::path dir) : file_(dir / "cache.v1.tsv") {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    warnings_.push_back("cache disabled: cannot create " + dir.string() + ": " + ec.message());
    return;
  }
  enabled_ = true;
}

std::optional<nlohmann::json> ResultCache::get(const std::string& key) {
  if (!enabled_) return std::nullopt;
  std::ifstream in(file_);
  if (!in) return std::nullopt;  // nothing stored yet
  std::optional<nlohmann::json> found;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? tab1 : line.find('\t', tab1 + 1);
    bool ok = tab2 != std::string::npos;
    if (ok && line.compare(0, tab1, key) != 0) continue;
    std::optional<nlohmann::json> payload;
    if (ok) {
      const std::string body = line.substr(tab2 + 1);
      ok = line.substr(tab1 + 1, tab2 - tab1 - 1) == hex(fnv1a(body));
      if (ok) {
        payload = nlohmann::json::parse(body, nullptr, false);
        ok = !payload->is_discarded();
      }
    }
    if (!ok) {
      warnings_.push_back("cache line " + std::to_string(number) + " in " + file_.string() +
                          " is corrupt; ignored");
      continue;
    }
    found = std::move(payload);
  }
  return found;
}

void ResultCache::put(const std::string& key, const nlohmann::json& payload) {
  if (!enabled_) return;
  const std::string body = payload.dump();
  std::ofstream out(file_, std::ios::app);
  out << key << '\t' << hex(fnv1a(body)) << '\t' << body << '\n';
  if (!out) {
    warnings_.push_back("cache disabled: cannot write " + file_.string());
    enabled_ = false;
  }
}

}  // namespace dioph::cli
