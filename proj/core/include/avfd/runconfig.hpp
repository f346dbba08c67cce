#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>

namespace avfd {

/// Flat key=value run configuration. Precedence: config file, then
/// environment overrides, then command-line flags (flags win). The merged
/// result is echoed into the run directory so a run can be reproduced from
/// its artifacts alone.
struct RunConfig {
  std::map<std::string, std::string> values;

  /// Parses `key = value` lines; '#' starts a comment, blank lines ignored.
  static RunConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values.count(key) > 0; }
  void set(const std::string& key, const std::string& value);

  /// Overlays `overrides` on top of this config.
  void merge(const RunConfig& overrides);

  /// Applies recognized environment overrides (AVFD_SEED -> seed).
  void apply_env();

  /// Rejects any key outside `allowed` for the named command.
  void restrict_to(const std::set<std::string>& allowed,
                   const std::string& command) const;

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  /// Writes sorted `key=value` lines; byte-stable for equal contents.
  void echo(const std::filesystem::path& path) const;
};

}  // namespace avfd
