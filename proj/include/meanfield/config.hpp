#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace meanfield {

/// Flat `[section]` / `key = value` configuration. Values are stored as text;
/// surrounding double quotes are stripped. Lines starting with '#' or ';' are
/// comments.
class Config {
 public:
  using Section = std::map<std::string, std::string>;

  /// Throws ConfigError with the line number on malformed input.
  static Config parse(const std::string& text, const std::string& origin = "<string>");
  /// Throws ConfigError naming the path when the file cannot be read.
  static Config load(const std::filesystem::path& path);

  /// Applies `section.key=value`; throws ConfigError on a malformed override.
  void apply_override(const std::string& assignment);
  void set(const std::string& section, const std::string& key, const std::string& value);
  void erase(const std::string& section, const std::string& key);

  bool has(const std::string& section, const std::string& key) const;
  std::optional<std::string> find(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& section, const std::string& key) const;
  /// Numbers accept constant expressions such as `5*pi`.
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  double require_double(const std::string& section, const std::string& key) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  /// Comma-separated list of constant expressions.
  std::vector<double> get_list(const std::string& section, const std::string& key,
                               const std::vector<double>& fallback) const;

  const std::map<std::string, Section>& sections() const { return sections_; }

  /// Sections and keys sorted, one `key = "value"` per line. Parsing the echo
  /// gives back an equal Config.
  std::string canonical_echo() const;
  /// Git blob hash (SHA-1 over "blob <len>\0" + canonical_echo()).
  std::string content_hash() const;

 private:
  std::map<std::string, Section> sections_;
};

/// Parses a constant expression; throws ConfigError mentioning `what` if it
/// does not parse or depends on x, y, r or theta.
double parse_constant(const std::string& text, const std::string& what);

/// Splits on `sep`, trimming whitespace and dropping empty pieces.
std::vector<std::string> split_list(const std::string& text, char sep);

std::string git_blob_hash(const std::string& content);

}  // namespace meanfield
