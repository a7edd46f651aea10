#include "selfalign/config.hpp"

#include <fstream>
#include <string_view>

#include "selfalign/errors.hpp"

namespace selfalign::config {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

KvMap read_kv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path.string());
  KvMap kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    std::size_t eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) +
                       ": expected key=value");
    }
    std::string key(trim(s.substr(0, eq)));
    std::string value(trim(s.substr(eq + 1)));
    if (key.empty()) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) +
                       ": empty key");
    }
    if (!kv.emplace(key, value).second) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) +
                       ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

void write_kv(const std::filesystem::path& path, const KvMap& kv) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open config file for writing: " + path.string());
  for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
  if (!os) throw ConfigError("failed writing config file: " + path.string());
}

}  // namespace selfalign::config
