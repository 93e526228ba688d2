#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vvnet/common.hpp"
#include "vvnet/io.hpp"

namespace vvnet {

// Plain-text configuration: one "key = value" per line, '#' comments.
using ConfigMap = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace detail

inline void apply_config_line(ConfigMap& cfg, const std::string& raw, const std::string& where) {
  std::string line = raw;
  const std::size_t hash = line.find('#');
  if (hash != std::string::npos) line.resize(hash);
  line = detail::trim(line);
  if (line.empty()) return;
  const std::size_t eq = line.find('=');
  require(eq != std::string::npos, ErrorCategory::config, where + ": expected key=value, got '" + line + "'");
  const std::string key = detail::trim(line.substr(0, eq));
  const std::string value = detail::trim(line.substr(eq + 1));
  require(!key.empty(), ErrorCategory::config, where + ": empty key");
  cfg[key] = value;
}

inline ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCategory::io, "cannot open config file: " + path);
  ConfigMap cfg;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    apply_config_line(cfg, line, path + ":" + std::to_string(line_no));
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Typed getters; missing keys either take the given default or fail.

inline bool cfg_has(const ConfigMap& cfg, const std::string& key) { return cfg.count(key) > 0; }

inline std::string cfg_str(const ConfigMap& cfg, const std::string& key, const std::string& dflt) {
  auto it = cfg.find(key);
  return it == cfg.end() ? dflt : it->second;
}

inline std::string cfg_str_required(const ConfigMap& cfg, const std::string& key) {
  auto it = cfg.find(key);
  require(it != cfg.end(), ErrorCategory::config, "missing config key: " + key);
  return it->second;
}

inline long cfg_int(const ConfigMap& cfg, const std::string& key, long dflt) {
  auto it = cfg.find(key);
  if (it == cfg.end()) return dflt;
  try {
    std::size_t used = 0;
    const long v = std::stol(it->second, &used);
    require(used == it->second.size(), ErrorCategory::config, "bad integer for " + key);
    return v;
  } catch (const Error&) {
    throw;
  } catch (...) {
    fail(ErrorCategory::config, "bad integer for " + key + ": '" + it->second + "'");
  }
}

inline double cfg_double(const ConfigMap& cfg, const std::string& key, double dflt) {
  auto it = cfg.find(key);
  if (it == cfg.end()) return dflt;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    require(used == it->second.size(), ErrorCategory::config, "bad number for " + key);
    return v;
  } catch (const Error&) {
    throw;
  } catch (...) {
    fail(ErrorCategory::config, "bad number for " + key + ": '" + it->second + "'");
  }
}

inline bool cfg_bool(const ConfigMap& cfg, const std::string& key, bool dflt) {
  auto it = cfg.find(key);
  if (it == cfg.end()) return dflt;
  if (it->second == "1" || it->second == "true" || it->second == "yes") return true;
  if (it->second == "0" || it->second == "false" || it->second == "no") return false;
  fail(ErrorCategory::config, "bad boolean for " + key + ": '" + it->second + "'");
}

inline std::vector<int> cfg_int_list(const ConfigMap& cfg, const std::string& key,
                                     const std::vector<int>& dflt) {
  auto it = cfg.find(key);
  if (it == cfg.end()) return dflt;
  std::vector<int> out;
  std::stringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = detail::trim(tok);
    if (tok.empty()) continue;
    try {
      out.push_back(std::stoi(tok));
    } catch (...) {
      fail(ErrorCategory::config, "bad integer list for " + key + ": '" + it->second + "'");
    }
  }
  require(!out.empty(), ErrorCategory::config, "empty integer list for " + key);
  return out;
}

// FNV-1a over the sorted "key=value" pairs; the map is already ordered.
inline std::uint64_t config_hash(const ConfigMap& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& [k, v] : cfg) {
    mix(k);
    h ^= '=';
    h *= 0x100000001b3ull;
    mix(v);
    h ^= '\n';
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string config_hash_hex(const ConfigMap& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
  return buf;
}

// Every run writes a manifest next to its outputs: the fully resolved
// config, its hash, the seed, and format versions, enough to reproduce the
// artifact exactly.
inline void write_manifest(const std::string& path, const std::string& command,
                           const ConfigMap& cfg) {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = cfg;
  j["config_hash"] = config_hash_hex(cfg);
  j["seed"] = cfg_int(cfg, "seed", 1);
  j["versions"] = {{"grid_format", kGridFormatVersion},
                   {"checkpoint_format", kCheckpointFormatVersion},
                   {"tool", kToolVersion}};
  atomic_write_file(path, j.dump(2) + "\n");
}

inline ConfigMap config_from_manifest(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_bytes(path));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCategory::parse, "bad manifest json: " + path + " (" + e.what() + ")");
  }
  require(j.contains("config") && j["config"].is_object(), ErrorCategory::parse,
          "manifest has no config object: " + path);
  ConfigMap cfg;
  for (auto it = j["config"].begin(); it != j["config"].end(); ++it)
    cfg[it.key()] = it.value().get<std::string>();
  return cfg;
}

}  // namespace vvnet
