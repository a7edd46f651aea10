#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace selfalign::config {

using KvMap = std::map<std::string, std::string>;

// Flat key=value text. '#' lines and blank lines are skipped; keys and values
// are whitespace-trimmed; duplicate keys are an error.
KvMap read_kv(const std::filesystem::path& path);

// Writes keys in sorted order, one key=value per line.
void write_kv(const std::filesystem::path& path, const KvMap& kv);

}  // namespace selfalign::config
