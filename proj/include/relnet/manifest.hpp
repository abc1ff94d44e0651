#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

namespace relnet {

inline constexpr std::string_view kToolVersion = "0.3.0";

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string content_hash(std::string_view bytes);
/// Throws InputError if the file cannot be read.
std::string file_hash(const std::string& path);

/// What produced an artifact. The hash covers everything except the
/// timestamp, so identical runs share a hash.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, std::string> inputs;  // role -> content hash
  std::uint64_t seed = 0;
  std::string version{kToolVersion};
  std::string created_at;  // ISO-8601 UTC; excluded from the hash

  std::string hash() const;
  nlohmann::json to_json() const;
  /// Stamps created_at with the current time and writes JSON to `path`.
  void write(const std::string& path);
};

}  // namespace relnet
