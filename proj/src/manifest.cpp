#include "relnet/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "relnet/error.hpp"

namespace relnet {

std::string content_hash(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "' for hashing");
  std::ostringstream ss;
  ss << in.rdbuf();
  return content_hash(ss.str());
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config;
  j["inputs"] = inputs;
  j["seed"] = seed;
  j["version"] = version;
  return j;
}

std::string RunManifest::hash() const { return content_hash(to_json().dump()); }

void RunManifest::write(const std::string& path) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  created_at = buf;

  auto j = to_json();
  j["hash"] = hash();
  j["created_at"] = created_at;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write manifest '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace relnet
