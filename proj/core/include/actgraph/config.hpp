#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace actgraph::run {

/// Flat key=value configuration ('#' starts a comment). Flags override file
/// values via set(). Readers mark keys as consumed so commands can reject
/// misspelled keys.
class KvConfig {
 public:
  KvConfig() = default;
  static KvConfig from_file(const std::filesystem::path& path);
  static KvConfig from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  /// Parses "key=value" (as passed to a --set flag).
  void set_pair(const std::string& pair);
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  int get_int(const std::string& key, int fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::vector<std::string> get_list(const std::string& key,
                                    const std::vector<std::string>& fallback) const;

  /// Keys present but never read; nonempty usually means a typo.
  std::vector<std::string> unused_keys() const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
};

}  // namespace actgraph::run
