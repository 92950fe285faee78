#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qpkdv {

/// Flat `key = value` configuration. `#` starts a comment, lists are written
/// `[a, b, c]` (brackets optional), surrounding double quotes are stripped.
/// Precedence: command-line overrides, then the environment variable
/// QPKDV_<KEY> (key upper-cased, '.' replaced by '_'), then the file.
class Config {
 public:
  Config() = default;
  static Config parse(std::istream& is, std::string source = "<config>");
  static Config from_file(const std::string& path);

  /// Command-line override; wins over the environment and the file.
  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const;

  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) const;
  double real(const std::string& key, std::optional<double> fallback = std::nullopt) const;
  int integer(const std::string& key, std::optional<int> fallback = std::nullopt) const;
  std::uint64_t u64(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt) const;
  bool boolean(const std::string& key, std::optional<bool> fallback = std::nullopt) const;
  std::vector<std::string> strings(const std::string& key,
                                   std::optional<std::vector<std::string>> fallback = std::nullopt) const;
  std::vector<double> reals(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt) const;

  /// Throws ConfigError naming the first key that no lookup asked for.
  void check_consumed() const;
  /// Resolved value of every key looked up so far (defaults included), sorted by key.
  const std::map<std::string, std::string>& echo() const noexcept { return echo_; }
  const std::string& source() const noexcept { return source_; }

  static std::string env_name(const std::string& key);
  static std::vector<std::string> split_list(std::string_view text);

 private:
  struct Entry {
    std::string value;
    int line = 0;
    bool forced = false;
  };
  /// Raw text and a location prefix for diagnostics.
  std::optional<std::pair<std::string, std::string>> lookup(const std::string& key) const;
  [[noreturn]] void fail(const std::string& where, const std::string& key, const std::string& what) const;

  std::string source_ = "<config>";
  std::map<std::string, Entry> entries_;
  mutable std::map<std::string, bool> used_;
  mutable std::map<std::string, std::string> echo_;
};

}  // namespace qpkdv
