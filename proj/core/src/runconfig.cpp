#include "avfd/runconfig.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "avfd/errors.hpp"

namespace avfd {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  RunConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": empty key");
    }
    cfg.values[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  values[key] = value;
}

void RunConfig::merge(const RunConfig& overrides) {
  for (const auto& [k, v] : overrides.values) values[k] = v;
}

void RunConfig::apply_env() {
  if (const char* seed = std::getenv("AVFD_SEED")) {
    values["seed"] = seed;
  }
}

void RunConfig::restrict_to(const std::set<std::string>& allowed,
                            const std::string& command) const {
  for (const auto& [k, _] : values) {
    if (!allowed.count(k)) {
      throw ConfigError("unknown config key for " + command + ": '" + k + "'");
    }
  }
}

std::string RunConfig::get_string(const std::string& key,
                                  const std::string& fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

std::string RunConfig::require_string(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end() || it->second.empty()) {
    throw ConfigError("missing required config key: '" + key + "'");
  }
  return it->second;
}

namespace {

template <typename T, typename Parse>
T parse_value(const std::map<std::string, std::string>& values,
              const std::string& key, T fallback, Parse parse) {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    std::size_t used = 0;
    T out = parse(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return out;
  } catch (const std::logic_error&) {
    throw ConfigError("bad value for '" + key + "': '" + it->second + "'");
  }
}

}  // namespace

int RunConfig::get_int(const std::string& key, int fallback) const {
  return parse_value<int>(values, key, fallback,
                          [](const std::string& s, std::size_t* used) {
                            return std::stoi(s, used);
                          });
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  return parse_value<double>(values, key, fallback,
                             [](const std::string& s, std::size_t* used) {
                               return std::stod(s, used);
                             });
}

std::uint64_t RunConfig::get_u64(const std::string& key,
                                 std::uint64_t fallback) const {
  return parse_value<std::uint64_t>(
      values, key, fallback, [](const std::string& s, std::size_t* used) {
        return static_cast<std::uint64_t>(std::stoull(s, used));
      });
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ConfigError("bad boolean for '" + key + "': '" + it->second + "'");
}

void RunConfig::echo(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write config echo: " + path.string());
  for (const auto& [k, v] : values) out << k << "=" << v << "\n";
}

}  // namespace avfd
